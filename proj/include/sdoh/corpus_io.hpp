#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdoh/schema.hpp"

namespace sdoh {

enum class NoteType { Progress, Emergency, SocialHistory };

std::string_view to_string(NoteType t);
std::optional<NoteType> parse_note_type(std::string_view name);

struct Document {
  std::string id;
  std::string patient_id;
  std::string timestamp;  // ISO-8601, e.g. 2021-03-04T10:30:00
  NoteType note_type = NoteType::Progress;
  std::string specialty;
  std::string full_text;
  std::string section_text;  // social-history portion of full_text
  int section_offset = 0;    // start of section_text within full_text
};

struct Token {
  std::string text;
  Span span;  // in section_text coordinates
};

struct TokenizedDocument {
  std::string document_id;
  std::vector<Token> tokens;
  /// Token-index ranges [begin, end), one per sentence, all non-empty.
  std::vector<std::pair<int, int>> sentences;

  int sentence_length(int s) const {
    return sentences[static_cast<std::size_t>(s)].second -
           sentences[static_cast<std::size_t>(s)].first;
  }
};

struct AnnotatedDoc {
  Document doc;
  AnnotationSet anns;
};

struct CorpusPartition {
  std::string name;  // train, dev, test
  std::vector<AnnotatedDoc> docs;
};

using Corpus = std::vector<CorpusPartition>;

class StandoffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Section extraction and tokenization
// ---------------------------------------------------------------------------

const std::vector<std::string>& default_section_headers();

/// Finds the social-history section: text between a recognized header
/// (case-insensitive) and the next all-caps header line, trimmed. Returns
/// (section_text, offset into full_text), or nullopt when no header matches.
std::optional<std::pair<std::string, int>> extract_social_history(
    const std::string& full_text,
    const std::vector<std::string>& headers = default_section_headers());

/// Whitespace tokenization with punctuation detached, except decimal points
/// and a small abbreviation list. Sentences split on {. ; newline}.
TokenizedDocument tokenize(const std::string& section_text,
                           const std::string& document_id = "");

// ---------------------------------------------------------------------------
// Standoff annotation format. Tab-separated lines against the section text:
//   T<n>\t<Type> <start> <end>\t<span text>
//   A<n>\t<LabeledArgType>Val T<m> <subtype value>
//   E<n>\t<EventType>:T<trigger> <Role>:T<arg> ...
// ---------------------------------------------------------------------------

/// Parses one document's annotation content. The document's section is
/// located with extract_social_history; when no header is present the whole
/// text is treated as the section. Spans are section-relative. Throws
/// StandoffError with a line number on malformed input.
AnnotatedDoc parse_standoff(
    const std::string& document_id, const std::string& text_content,
    const std::string& ann_content, const LabelInventory& inv,
    const std::vector<std::string>& headers = default_section_headers());

/// Inverse of parse_standoff up to id renumbering. Events are emitted in
/// document order; shared argument spans are written once and referenced by
/// every event that uses them.
std::string serialize_standoff(const Document& doc, const AnnotationSet& anns);

/// Sorts events, per-event arguments, and orphans into a stable order so two
/// annotation sets can be compared independently of construction order.
AnnotationSet canonical(const AnnotationSet& anns);

// ---------------------------------------------------------------------------
// Corpus directory layout: <id>.txt / <id>.ann pairs plus manifest.csv with
// columns id,patient_id,timestamp,note_type,specialty,partition.
// ---------------------------------------------------------------------------

void write_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(
    const std::string& dir, const LabelInventory& inv,
    const std::vector<std::string>& headers = default_section_headers());

/// Keeps, per patient, only the social-history document with the newest
/// timestamp; other note types pass through untouched.
CorpusPartition filter_latest_social_history(const CorpusPartition& part);

/// Comparable key (YYYYMMDDhhmmss) for an ISO-8601 timestamp; throws
/// std::invalid_argument on malformed input.
std::int64_t timestamp_key(const std::string& iso);
int timestamp_year(const std::string& iso);

// ---------------------------------------------------------------------------
// Synthetic corpus generation. A template is a sequence of parts; each part
// contributes one phrase chosen uniformly from its alternatives, and parts
// are joined with single spaces. Exactly one part per template is the
// trigger.
// ---------------------------------------------------------------------------

struct TemplatePart {
  enum class Kind { Text, Trigger, SpanOnly, Labeled };
  Kind kind = Kind::Text;
  SpanOnlyArg span_only_type = SpanOnlyArg::Amount;
  LabeledArg labeled_type = LabeledArg::StatusTime;
  Subtype subtype = Subtype::Null;
  std::vector<std::string> phrases;
};

struct EventTemplate {
  double weight = 1.0;
  std::vector<TemplatePart> parts;
};

struct SynthGrammar {
  std::uint64_t seed = 0;
  int year = 2021;
  int min_sentences = 1;
  int max_sentences = 3;
  std::array<double, 3> note_type_weights = {0.5, 0.25, 0.25};
  std::vector<std::string> specialties;
  std::array<double, 5> event_type_weights = {1, 1, 1, 1, 1};
  std::array<std::vector<EventTemplate>, 5> templates;  // by EventType

  bool uses_method() const;
};

SynthGrammar default_grammar();
SynthGrammar load_grammar(const std::string& path);
SynthGrammar parse_grammar_json(const std::string& json_text);
std::string grammar_to_json(const SynthGrammar& grammar);

/// Deterministic for a fixed seed; every generated annotation set passes
/// validate_event. Throws std::invalid_argument on an empty grammar.
CorpusPartition generate_corpus(const SynthGrammar& grammar, int n_docs,
                                std::uint64_t seed,
                                const std::string& partition_name = "train");

}  // namespace sdoh
