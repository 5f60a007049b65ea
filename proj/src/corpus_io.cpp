#include "sdoh/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdoh/csv.hpp"
#include "sdoh/rng.hpp"

namespace sdoh {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ci_starts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

/// Matches clinical header style: ^[A-Z][A-Z /]+: at the start of a line.
bool is_terminator_line(std::string_view line) {
  if (line.size() < 3 || !is_upper(line[0])) return false;
  std::size_t i = 1;
  while (i < line.size() &&
         (is_upper(line[i]) || line[i] == ' ' || line[i] == '/')) {
    ++i;
  }
  return i >= 2 && i < line.size() && line[i] == ':';
}

}  // namespace

std::string_view to_string(NoteType t) {
  switch (t) {
    case NoteType::Progress: return "progress";
    case NoteType::Emergency: return "emergency";
    case NoteType::SocialHistory: return "social_history";
  }
  return "?";
}

std::optional<NoteType> parse_note_type(std::string_view name) {
  if (name == "progress") return NoteType::Progress;
  if (name == "emergency") return NoteType::Emergency;
  if (name == "social_history") return NoteType::SocialHistory;
  return std::nullopt;
}

const std::vector<std::string>& default_section_headers() {
  static const std::vector<std::string> headers = {"SOCIAL HISTORY",
                                                   "SOCIAL HX", "SHX"};
  return headers;
}

std::optional<std::pair<std::string, int>> extract_social_history(
    const std::string& full_text, const std::vector<std::string>& headers) {
  const std::size_t n = full_text.size();
  std::size_t line_start = 0;
  while (line_start <= n) {
    std::size_t line_end = full_text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = n;
    std::string_view line(full_text.data() + line_start, line_end - line_start);

    std::size_t indent = 0;
    while (indent < line.size() && is_space(line[indent])) ++indent;
    std::string_view body = line.substr(indent);

    for (const std::string& header : headers) {
      if (!ci_starts_with(body, header)) continue;
      std::string_view rest = body.substr(header.size());
      std::size_t r = 0;
      while (r < rest.size() && rest[r] == ' ') ++r;
      bool has_colon = r < rest.size() && rest[r] == ':';
      if (!(r == rest.size() || has_colon)) continue;

      // Section content begins after the colon when present on the same
      // line, otherwise on the next line.
      std::size_t start;
      if (has_colon) {
        start = line_start + indent + (body.size() - rest.size()) + r + 1;
      } else {
        start = line_end < n ? line_end + 1 : n;
      }
      // If nothing but whitespace remains on the header line, move on.
      while (start < line_end && full_text[start] == ' ') ++start;
      if (start >= line_end) start = line_end < n ? line_end + 1 : n;

      // End at the next all-caps header line.
      std::size_t end = n;
      std::size_t scan = line_end < n ? line_end + 1 : n;
      while (scan < n) {
        std::size_t scan_end = full_text.find('\n', scan);
        if (scan_end == std::string::npos) scan_end = n;
        std::string_view scan_line(full_text.data() + scan, scan_end - scan);
        if (scan >= start && is_terminator_line(scan_line)) {
          end = scan;
          break;
        }
        scan = scan_end < n ? scan_end + 1 : n;
      }

      while (start < end && is_space(full_text[start])) ++start;
      while (end > start && is_space(full_text[end - 1])) --end;
      return std::make_pair(full_text.substr(start, end - start),
                            static_cast<int>(start));
    }
    if (line_end >= n) break;
    line_start = line_end + 1;
  }
  return std::nullopt;
}

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbrevs = {
      "mr.", "mrs.", "ms.", "dr.", "etc.", "vs.", "approx.",
      "yr.", "yrs.", "pt.", "hx.", "wk."};
  return abbrevs;
}

}  // namespace

TokenizedDocument tokenize(const std::string& text,
                           const std::string& document_id) {
  TokenizedDocument out;
  out.document_id = document_id;
  const int n = static_cast<int>(text.size());
  int i = 0;
  int sentence_start = 0;

  auto close_sentence = [&]() {
    int end = static_cast<int>(out.tokens.size());
    if (end > sentence_start) {
      out.sentences.emplace_back(sentence_start, end);
      sentence_start = end;
    }
  };

  while (i < n) {
    char c = text[static_cast<std::size_t>(i)];
    if (is_space(c)) {
      if (c == '\n') close_sentence();
      ++i;
      continue;
    }
    const int start = i;
    std::string tok;
    if (is_punct(c)) {
      tok += c;
      ++i;
    } else {
      while (i < n) {
        char d = text[static_cast<std::size_t>(i)];
        if (is_space(d)) break;
        if (is_punct(d)) {
          // keep decimal points inside numbers: "2.5"
          if (d == '.' && i > start && is_digit(text[static_cast<std::size_t>(i - 1)]) &&
              i + 1 < n && is_digit(text[static_cast<std::size_t>(i + 1)])) {
            tok += d;
            ++i;
            continue;
          }
          break;
        }
        tok += d;
        ++i;
      }
      if (i < n && text[static_cast<std::size_t>(i)] == '.' &&
          abbreviations().count(to_lower(tok) + ".")) {
        tok += '.';
        ++i;
      }
    }
    out.tokens.push_back(Token{tok, Span{start, i}});
    if (tok == "." || tok == ";") close_sentence();
  }
  close_sentence();
  return out;
}

// ---------------------------------------------------------------------------
// Standoff parsing
// ---------------------------------------------------------------------------

namespace {

struct RawEntity {
  std::string type_name;
  Span span;
  int line = 0;
  int order = 0;
  bool referenced = false;
};

[[noreturn]] void fail(const std::string& what, int line) {
  throw StandoffError(what + ": line " + std::to_string(line));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) parts.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return parts;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  int value = 0;
  for (char c : s) {
    if (!is_digit(c)) return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

}  // namespace

AnnotatedDoc parse_standoff(const std::string& document_id,
                            const std::string& text_content,
                            const std::string& ann_content,
                            const LabelInventory& inv,
                            const std::vector<std::string>& headers) {
  AnnotatedDoc result;
  result.doc.id = document_id;
  result.doc.full_text = text_content;
  if (auto sec = extract_social_history(text_content, headers)) {
    result.doc.section_text = sec->first;
    result.doc.section_offset = sec->second;
  } else {
    result.doc.section_text = text_content;
    result.doc.section_offset = 0;
  }
  result.anns.document_id = document_id;

  const int section_len = static_cast<int>(result.doc.section_text.size());

  std::vector<std::pair<int, std::string>> lines;  // (line number, content)
  {
    std::istringstream in(ann_content);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      lines.emplace_back(number, line);
    }
  }

  std::map<std::string, RawEntity> entities;
  std::vector<std::string> entity_order;
  std::map<std::string, Subtype> attributes;  // T id -> subtype
  std::set<std::string> attr_ids, event_ids;

  // Pass 1: T lines.
  for (const auto& [number, line] : lines) {
    if (line[0] != 'T') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) fail("malformed T line", number);
    const std::string& tid = fields[0];
    if (entities.count(tid)) fail("duplicate id " + tid, number);
    auto head = split_ws(fields[1]);
    if (head.size() != 3) fail("malformed T line", number);
    const std::string& type_name = head[0];
    if (!parse_event_type(type_name) && !parse_span_only_arg(type_name) &&
        !parse_labeled_arg(type_name)) {
      fail("unknown type name '" + type_name + "'", number);
    }
    Span span;
    if (!parse_int(head[1], span.start) || !parse_int(head[2], span.end)) {
      fail("malformed T line", number);
    }
    if (!(0 <= span.start && span.start < span.end && span.end <= section_len)) {
      fail("span out of range", number);
    }
    const std::string actual = result.doc.section_text.substr(
        static_cast<std::size_t>(span.start),
        static_cast<std::size_t>(span.length()));
    if (actual != fields[2]) fail("span text mismatch", number);
    entities[tid] = RawEntity{type_name, span, number,
                              static_cast<int>(entity_order.size()), false};
    entity_order.push_back(tid);
  }

  // Pass 2: A lines attach subtype labels.
  for (const auto& [number, line] : lines) {
    if (line[0] != 'A') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2) fail("malformed A line", number);
    if (attr_ids.count(fields[0])) fail("duplicate id " + fields[0], number);
    attr_ids.insert(fields[0]);
    const std::string& body = fields[1];
    std::size_t sp1 = body.find(' ');
    std::size_t sp2 = sp1 == std::string::npos ? std::string::npos
                                               : body.find(' ', sp1 + 1);
    if (sp2 == std::string::npos) fail("malformed A line", number);
    std::string name = body.substr(0, sp1);
    std::string tid = body.substr(sp1 + 1, sp2 - sp1 - 1);
    std::string value = body.substr(sp2 + 1);
    if (name.size() < 4 || name.substr(name.size() - 3) != "Val") {
      fail("unknown attribute '" + name + "'", number);
    }
    auto arg = parse_labeled_arg(name.substr(0, name.size() - 3));
    if (!arg) fail("unknown attribute '" + name + "'", number);
    auto ent = entities.find(tid);
    if (ent == entities.end()) fail("attribute references unknown " + tid, number);
    if (ent->second.type_name != to_string(*arg)) {
      fail("attribute " + name + " does not match type of " + tid, number);
    }
    auto subtype = parse_subtype(value);
    if (!subtype || inv.subtype_index(*arg, *subtype) < 0) {
      fail("unknown subtype value '" + value + "'", number);
    }
    if (attributes.count(tid)) fail("duplicate attribute for " + tid, number);
    attributes[tid] = *subtype;
  }

  // Pass 3: E lines assemble events.
  for (const auto& [number, line] : lines) {
    if (line[0] == 'T' || line[0] == 'A') continue;
    if (line[0] != 'E') fail("unsupported line type", number);
    auto fields = split_tabs(line);
    if (fields.size() != 2) fail("malformed E line", number);
    if (event_ids.count(fields[0])) fail("duplicate id " + fields[0], number);
    event_ids.insert(fields[0]);
    auto parts = split_ws(fields[1]);
    if (parts.empty()) fail("malformed E line", number);

    Event event;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      std::size_t colon = parts[p].find(':');
      if (colon == std::string::npos) fail("malformed E line", number);
      std::string role = parts[p].substr(0, colon);
      std::string tid = parts[p].substr(colon + 1);
      auto ent = entities.find(tid);
      if (ent == entities.end()) fail("event references unknown " + tid, number);
      ent->second.referenced = true;

      if (p == 0) {
        auto etype = parse_event_type(role);
        if (!etype || ent->second.type_name != role) {
          fail("trigger role '" + role + "' does not match " + tid, number);
        }
        event.trigger = Trigger{*etype, ent->second.span};
        continue;
      }
      if (auto so = parse_span_only_arg(ent->second.type_name)) {
        event.arguments.push_back(Argument::span_only(*so, ent->second.span));
      } else if (auto la = parse_labeled_arg(ent->second.type_name)) {
        auto sub = attributes.find(tid);
        if (sub == attributes.end()) {
          fail("labeled argument " + tid + " has no attribute", number);
        }
        event.arguments.push_back(
            Argument::labeled(*la, sub->second, ent->second.span));
      } else {
        fail("argument " + tid + " references a trigger span", number);
      }
    }
    event.incomplete = !has_required_labeled_arg(event);
    result.anns.events.push_back(std::move(event));
  }

  for (const std::string& tid : entity_order) {
    const RawEntity& ent = entities[tid];
    if (!ent.referenced) {
      result.anns.orphans.push_back(OrphanEntity{ent.type_name, ent.span});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Standoff serialization
// ---------------------------------------------------------------------------

namespace {

std::string role_name(const Argument& a) {
  if (a.kind == Argument::Kind::SpanOnly) {
    return std::string(to_string(a.span_only_type));
  }
  switch (a.labeled_type) {
    case LabeledArg::StatusTime:
    case LabeledArg::StatusEmploy: return "Status";
    case LabeledArg::TypeLiving: return "Type";
  }
  return "Arg";
}

struct EntityKey {
  std::string type;
  Span span;
  Subtype subtype;  // Null for triggers and span-only arguments
  auto operator<=>(const EntityKey&) const = default;
};

}  // namespace

std::string serialize_standoff(const Document& doc, const AnnotationSet& anns) {
  std::vector<Event> events = anns.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) {
                     return std::tie(a.trigger.span, a.trigger.type) <
                            std::tie(b.trigger.span, b.trigger.type);
                   });

  std::set<EntityKey> keys;
  for (const Event& e : events) {
    keys.insert(EntityKey{std::string(to_string(e.trigger.type)),
                          e.trigger.span, Subtype::Null});
    for (const Argument& a : e.arguments) {
      if (a.kind == Argument::Kind::SpanOnly) {
        keys.insert(EntityKey{std::string(to_string(a.span_only_type)), a.span,
                              Subtype::Null});
      } else {
        keys.insert(EntityKey{std::string(to_string(a.labeled_type)), a.span,
                              a.subtype});
      }
    }
  }
  for (const OrphanEntity& o : anns.orphans) {
    keys.insert(EntityKey{o.type, o.span, Subtype::Null});
  }

  std::vector<EntityKey> ordered(keys.begin(), keys.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const EntityKey& a, const EntityKey& b) {
              return std::tie(a.span, a.type, a.subtype) <
                     std::tie(b.span, b.type, b.subtype);
            });
  std::map<EntityKey, int> tid;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    tid[ordered[i]] = static_cast<int>(i) + 1;
  }

  std::ostringstream out;
  for (const EntityKey& k : ordered) {
    out << 'T' << tid[k] << '\t' << k.type << ' ' << k.span.start << ' '
        << k.span.end << '\t'
        << doc.section_text.substr(static_cast<std::size_t>(k.span.start),
                                   static_cast<std::size_t>(k.span.length()))
        << '\n';
  }
  int aid = 0;
  for (const EntityKey& k : ordered) {
    if (k.subtype == Subtype::Null) continue;
    out << 'A' << ++aid << '\t' << k.type << "Val T" << tid[k] << ' '
        << to_string(k.subtype) << '\n';
  }
  int eid = 0;
  for (const Event& e : events) {
    EntityKey trig{std::string(to_string(e.trigger.type)), e.trigger.span,
                   Subtype::Null};
    out << 'E' << ++eid << '\t' << trig.type << ":T" << tid[trig];
    std::map<std::string, int> role_uses;
    for (const Argument& a : e.arguments) {
      EntityKey key = a.kind == Argument::Kind::SpanOnly
                          ? EntityKey{std::string(to_string(a.span_only_type)),
                                      a.span, Subtype::Null}
                          : EntityKey{std::string(to_string(a.labeled_type)),
                                      a.span, a.subtype};
      std::string role = role_name(a);
      int uses = ++role_uses[role];
      out << ' ' << role;
      if (uses > 1) out << uses;
      out << ":T" << tid[key];
    }
    out << '\n';
  }
  return out.str();
}

AnnotationSet canonical(const AnnotationSet& anns) {
  AnnotationSet out = anns;
  for (Event& e : out.events) {
    std::stable_sort(e.arguments.begin(), e.arguments.end());
  }
  std::stable_sort(out.events.begin(), out.events.end());
  std::stable_sort(out.orphans.begin(), out.orphans.end());
  return out;
}

// ---------------------------------------------------------------------------
// Corpus directory I/O
// ---------------------------------------------------------------------------

void write_corpus(const std::string& dir, const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::string manifest = "id,patient_id,timestamp,note_type,specialty,partition\n";
  for (const CorpusPartition& part : corpus) {
    for (const AnnotatedDoc& ad : part.docs) {
      const Document& d = ad.doc;
      write_file(dir + "/" + d.id + ".txt", d.full_text);
      write_file(dir + "/" + d.id + ".ann", serialize_standoff(d, ad.anns));
      manifest += csv_join({d.id, d.patient_id, d.timestamp,
                            std::string(to_string(d.note_type)), d.specialty,
                            part.name}) +
                  "\n";
    }
  }
  write_file(dir + "/manifest.csv", manifest);
}

Corpus load_corpus(const std::string& dir, const LabelInventory& inv,
                   const std::vector<std::string>& headers) {
  auto rows = read_csv(dir + "/manifest.csv");
  if (rows.empty() || rows[0] != std::vector<std::string>{"id", "patient_id",
                                                          "timestamp",
                                                          "note_type",
                                                          "specialty",
                                                          "partition"}) {
    throw std::runtime_error("manifest.csv: unexpected header");
  }
  Corpus corpus;
  std::map<std::string, std::size_t> partition_index;
  std::map<std::string, std::set<std::string>> seen_ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 6) {
      throw std::runtime_error("manifest.csv row " + std::to_string(r + 1) +
                               ": expected 6 columns");
    }
    const std::string& id = row[0];
    const std::string& partition = row[5];
    auto note_type = parse_note_type(row[3]);
    if (!note_type) {
      throw std::runtime_error("manifest.csv row " + std::to_string(r + 1) +
                               ": unknown note_type '" + row[3] + "'");
    }
    timestamp_key(row[2]);  // validates
    if (!seen_ids[partition].insert(id).second) {
      throw std::runtime_error("manifest.csv: duplicate id '" + id +
                               "' in partition " + partition);
    }
    AnnotatedDoc ad = parse_standoff(id, read_file(dir + "/" + id + ".txt"),
                                     read_file(dir + "/" + id + ".ann"), inv,
                                     headers);
    ad.doc.patient_id = row[1];
    ad.doc.timestamp = row[2];
    ad.doc.note_type = *note_type;
    ad.doc.specialty = row[4];

    auto it = partition_index.find(partition);
    if (it == partition_index.end()) {
      it = partition_index.emplace(partition, corpus.size()).first;
      corpus.push_back(CorpusPartition{partition, {}});
    }
    corpus[it->second].docs.push_back(std::move(ad));
  }
  return corpus;
}

std::int64_t timestamp_key(const std::string& iso) {
  // YYYY-MM-DD  optionally followed by T or space and HH:MM[:SS]
  auto bad = [&]() {
    throw std::invalid_argument("unparseable timestamp '" + iso + "'");
  };
  auto digits = [&](std::size_t pos, int count) -> int {
    if (pos + static_cast<std::size_t>(count) > iso.size()) bad();
    int value = 0;
    for (int i = 0; i < count; ++i) {
      char c = iso[pos + static_cast<std::size_t>(i)];
      if (!is_digit(c)) bad();
      value = value * 10 + (c - '0');
    }
    return value;
  };
  int year = digits(0, 4);
  if (iso.size() < 10 || iso[4] != '-' || iso[7] != '-') bad();
  int month = digits(5, 2);
  int day = digits(8, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31) bad();
  int hour = 0, minute = 0, second = 0;
  if (iso.size() > 10) {
    if (iso.size() < 16 || (iso[10] != 'T' && iso[10] != ' ') || iso[13] != ':') bad();
    hour = digits(11, 2);
    minute = digits(14, 2);
    if (iso.size() > 16) {
      if (iso.size() != 19 || iso[16] != ':') bad();
      second = digits(17, 2);
    }
    if (hour > 23 || minute > 59 || second > 59) bad();
  }
  return ((((static_cast<std::int64_t>(year) * 100 + month) * 100 + day) * 100 +
           hour) * 100 + minute) * 100 + second;
}

int timestamp_year(const std::string& iso) {
  return static_cast<int>(timestamp_key(iso) / 10000000000LL);
}

CorpusPartition filter_latest_social_history(const CorpusPartition& part) {
  std::map<std::string, std::pair<std::int64_t, std::size_t>> latest;
  for (std::size_t i = 0; i < part.docs.size(); ++i) {
    const Document& d = part.docs[i].doc;
    if (d.note_type != NoteType::SocialHistory) continue;
    std::int64_t key = timestamp_key(d.timestamp);
    auto it = latest.find(d.patient_id);
    if (it == latest.end() || key > it->second.first ||
        (key == it->second.first && part.docs[i].doc.id > part.docs[it->second.second].doc.id)) {
      latest[d.patient_id] = {key, i};
    }
  }
  CorpusPartition out;
  out.name = part.name;
  for (std::size_t i = 0; i < part.docs.size(); ++i) {
    const Document& d = part.docs[i].doc;
    if (d.note_type == NoteType::SocialHistory &&
        latest[d.patient_id].second != i) {
      continue;
    }
    out.docs.push_back(part.docs[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic grammar
// ---------------------------------------------------------------------------

bool SynthGrammar::uses_method() const {
  for (const auto& list : templates) {
    for (const EventTemplate& t : list) {
      for (const TemplatePart& p : t.parts) {
        if (p.kind == TemplatePart::Kind::SpanOnly &&
            p.span_only_type == SpanOnlyArg::Method) {
          return true;
        }
      }
    }
  }
  return false;
}

namespace {

TemplatePart text_part(std::vector<std::string> phrases) {
  TemplatePart p;
  p.kind = TemplatePart::Kind::Text;
  p.phrases = std::move(phrases);
  return p;
}

TemplatePart trigger_part(std::vector<std::string> phrases) {
  TemplatePart p;
  p.kind = TemplatePart::Kind::Trigger;
  p.phrases = std::move(phrases);
  return p;
}

TemplatePart span_only_part(SpanOnlyArg type, std::vector<std::string> phrases) {
  TemplatePart p;
  p.kind = TemplatePart::Kind::SpanOnly;
  p.span_only_type = type;
  p.phrases = std::move(phrases);
  return p;
}

TemplatePart labeled_part(LabeledArg type, Subtype subtype,
                          std::vector<std::string> phrases) {
  TemplatePart p;
  p.kind = TemplatePart::Kind::Labeled;
  p.labeled_type = type;
  p.subtype = subtype;
  p.phrases = std::move(phrases);
  return p;
}

void validate_grammar(const SynthGrammar& g) {
  LabelInventory inv(true);
  for (EventType t : kEventTypes) {
    for (const EventTemplate& tmpl : g.templates[static_cast<std::size_t>(t)]) {
      if (tmpl.weight <= 0) {
        throw std::invalid_argument("grammar: template weight must be > 0");
      }
      int triggers = 0;
      EventCompat compat = compatibility(t, inv);
      for (const TemplatePart& p : tmpl.parts) {
        if (p.phrases.empty()) {
          throw std::invalid_argument("grammar: part with no phrases");
        }
        for (const std::string& phrase : p.phrases) {
          if (phrase.empty()) {
            throw std::invalid_argument("grammar: empty phrase");
          }
        }
        switch (p.kind) {
          case TemplatePart::Kind::Trigger: ++triggers; break;
          case TemplatePart::Kind::SpanOnly:
            if (!compat.allows(p.span_only_type)) {
              throw std::invalid_argument(
                  std::string("grammar: ") + std::string(to_string(p.span_only_type)) +
                  " not permitted for " + std::string(to_string(t)));
            }
            break;
          case TemplatePart::Kind::Labeled:
            if (p.labeled_type != required_labeled_arg(t)) {
              throw std::invalid_argument(
                  std::string("grammar: ") + std::string(to_string(p.labeled_type)) +
                  " not permitted for " + std::string(to_string(t)));
            }
            if (labeled_arg_of(p.subtype) != p.labeled_type) {
              throw std::invalid_argument(
                  std::string("grammar: subtype '") + std::string(to_string(p.subtype)) +
                  "' not in the " + std::string(to_string(p.labeled_type)) + " set");
            }
            break;
          case TemplatePart::Kind::Text: break;
        }
      }
      if (triggers != 1) {
        throw std::invalid_argument(
            "grammar: every template needs exactly one trigger part");
      }
    }
  }
  if (g.min_sentences < 1 || g.max_sentences < g.min_sentences) {
    throw std::invalid_argument("grammar: bad sentences_per_doc range");
  }
}

}  // namespace

SynthGrammar default_grammar() {
  SynthGrammar g;
  g.seed = 7;
  g.year = 2021;
  g.min_sentences = 1;
  g.max_sentences = 3;
  g.specialties = {"Family Medicine", "Internal Medicine", "Cardiology",
                   "Oncology", "Psychiatry", "Pediatrics"};

  auto& tobacco = g.templates[static_cast<std::size_t>(EventType::Tobacco)];
  tobacco.push_back(EventTemplate{
      3.0,
      {trigger_part({"Tobacco", "Smoking"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::None,
                    {"denies", "never smoked", "none"})}});
  tobacco.push_back(EventTemplate{
      2.0,
      {trigger_part({"Tobacco", "Smoking"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Current,
                    {"smokes daily", "current smoker"}),
       span_only_part(SpanOnlyArg::Amount, {"1 ppd", "2 packs", "half pack"})}});
  tobacco.push_back(EventTemplate{
      2.0,
      {trigger_part({"Tobacco", "Smoking"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Past, {"quit", "former smoker"}),
       span_only_part(SpanOnlyArg::Duration, {"10 years ago", "5 yrs ago"})}});

  auto& alcohol = g.templates[static_cast<std::size_t>(EventType::Alcohol)];
  alcohol.push_back(EventTemplate{
      3.0,
      {trigger_part({"Alcohol", "EtOH"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::None,
                    {"denies", "no use", "abstains"})}});
  alcohol.push_back(EventTemplate{
      2.0,
      {trigger_part({"Alcohol", "EtOH"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Current,
                    {"drinks socially", "occasional drinks"}),
       span_only_part(SpanOnlyArg::Type, {"wine", "beer", "whiskey"}),
       span_only_part(SpanOnlyArg::Frequency, {"per week", "on weekends"})}});
  alcohol.push_back(EventTemplate{
      1.5,
      {trigger_part({"Alcohol", "EtOH"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Past,
                    {"sober", "quit drinking"}),
       span_only_part(SpanOnlyArg::History, {"since 2010", "for 6 years"})}});

  auto& drug = g.templates[static_cast<std::size_t>(EventType::Drug)];
  drug.push_back(EventTemplate{
      3.0,
      {trigger_part({"Drugs", "Drug use"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::None,
                    {"denies", "never", "negative"})}});
  drug.push_back(EventTemplate{
      2.0,
      {trigger_part({"Drugs", "Drug use"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Current,
                    {"uses", "active use of"}),
       span_only_part(SpanOnlyArg::Type,
                      {"marijuana", "MJ", "meth", "heroin", "cocaine"})}});
  drug.push_back(EventTemplate{
      1.5,
      {trigger_part({"Drugs", "Drug use"}), text_part({":"}),
       labeled_part(LabeledArg::StatusTime, Subtype::Past,
                    {"prior use of", "remote use of"}),
       span_only_part(SpanOnlyArg::Type, {"crack", "opioids", "meth"})}});

  auto& employment = g.templates[static_cast<std::size_t>(EventType::Employment)];
  employment.push_back(EventTemplate{
      2.0,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::Employed,
                    {"employed", "working"}),
       span_only_part(SpanOnlyArg::Type, {"mechanic", "teacher", "nurse"})}});
  employment.push_back(EventTemplate{
      1.0,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::Unemployed,
                    {"unemployed", "between jobs", "not working"})}});
  employment.push_back(EventTemplate{
      1.0,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::Retired, {"retired"}),
       span_only_part(SpanOnlyArg::History, {"since 2015", "for 4 years"})}});
  employment.push_back(EventTemplate{
      0.7,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::OnDisability,
                    {"on disability", "disability benefits"})}});
  employment.push_back(EventTemplate{
      0.4,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::Student,
                    {"student", "in school"})}});
  employment.push_back(EventTemplate{
      0.3,
      {trigger_part({"Work", "Employment"}), text_part({":"}),
       labeled_part(LabeledArg::StatusEmploy, Subtype::Homemaker,
                    {"homemaker", "stays home"})}});

  auto& living = g.templates[static_cast<std::size_t>(EventType::LivingStatus)];
  living.push_back(EventTemplate{
      1.5,
      {trigger_part({"Lives", "Living situation"}), text_part({":"}),
       labeled_part(LabeledArg::TypeLiving, Subtype::Alone,
                    {"alone", "by himself", "by herself"})}});
  living.push_back(EventTemplate{
      1.5,
      {trigger_part({"Lives", "Living situation"}), text_part({":"}),
       labeled_part(LabeledArg::TypeLiving, Subtype::WithFamily,
                    {"with family", "with wife", "with parents"})}});
  living.push_back(EventTemplate{
      1.0,
      {trigger_part({"Lives", "Living situation"}), text_part({":"}),
       labeled_part(LabeledArg::TypeLiving, Subtype::WithOthers,
                    {"with roommates", "with a friend"})}});
  living.push_back(EventTemplate{
      1.0,
      {trigger_part({"Lives", "Living situation"}), text_part({":"}),
       labeled_part(LabeledArg::TypeLiving, Subtype::Homeless,
                    {"homeless", "in a shelter", "on the streets"})}});

  g.event_type_weights = {1.0, 1.0, 1.2, 0.9, 0.9};
  validate_grammar(g);
  return g;
}

namespace {

using nlohmann::json;

json part_to_json(const TemplatePart& p) {
  json j;
  switch (p.kind) {
    case TemplatePart::Kind::Text: j["text"] = p.phrases; break;
    case TemplatePart::Kind::Trigger: j["trigger"] = p.phrases; break;
    case TemplatePart::Kind::SpanOnly:
      j["span_only"] = std::string(to_string(p.span_only_type));
      j["phrases"] = p.phrases;
      break;
    case TemplatePart::Kind::Labeled:
      j["labeled"] = std::string(to_string(p.labeled_type));
      j["subtype"] = std::string(to_string(p.subtype));
      j["phrases"] = p.phrases;
      break;
  }
  return j;
}

TemplatePart part_from_json(const json& j) {
  TemplatePart p;
  if (j.contains("text")) {
    p.kind = TemplatePart::Kind::Text;
    p.phrases = j.at("text").get<std::vector<std::string>>();
  } else if (j.contains("trigger")) {
    p.kind = TemplatePart::Kind::Trigger;
    p.phrases = j.at("trigger").get<std::vector<std::string>>();
  } else if (j.contains("span_only")) {
    p.kind = TemplatePart::Kind::SpanOnly;
    auto type = parse_span_only_arg(j.at("span_only").get<std::string>());
    if (!type) throw std::invalid_argument("grammar: unknown span_only type");
    p.span_only_type = *type;
    p.phrases = j.at("phrases").get<std::vector<std::string>>();
  } else if (j.contains("labeled")) {
    p.kind = TemplatePart::Kind::Labeled;
    auto type = parse_labeled_arg(j.at("labeled").get<std::string>());
    auto sub = parse_subtype(j.at("subtype").get<std::string>());
    if (!type || !sub) throw std::invalid_argument("grammar: unknown labeled part");
    p.labeled_type = *type;
    p.subtype = *sub;
    p.phrases = j.at("phrases").get<std::vector<std::string>>();
  } else {
    throw std::invalid_argument("grammar: unknown part kind");
  }
  return p;
}

}  // namespace

std::string grammar_to_json(const SynthGrammar& g) {
  json j;
  j["seed"] = g.seed;
  j["year"] = g.year;
  j["sentences_per_doc"] = {g.min_sentences, g.max_sentences};
  j["note_type_weights"] = {{"progress", g.note_type_weights[0]},
                            {"emergency", g.note_type_weights[1]},
                            {"social_history", g.note_type_weights[2]}};
  j["specialties"] = g.specialties;
  json weights, templates;
  for (EventType t : kEventTypes) {
    weights[std::string(to_string(t))] =
        g.event_type_weights[static_cast<std::size_t>(t)];
    json list = json::array();
    for (const EventTemplate& tmpl : g.templates[static_cast<std::size_t>(t)]) {
      json parts = json::array();
      for (const TemplatePart& p : tmpl.parts) parts.push_back(part_to_json(p));
      list.push_back({{"weight", tmpl.weight}, {"parts", parts}});
    }
    templates[std::string(to_string(t))] = list;
  }
  j["event_type_weights"] = weights;
  j["templates"] = templates;
  return j.dump(2) + "\n";
}

SynthGrammar parse_grammar_json(const std::string& json_text) {
  json j = json::parse(json_text);
  SynthGrammar g;
  g.seed = j.value("seed", std::uint64_t{0});
  g.year = j.value("year", 2021);
  if (j.contains("sentences_per_doc")) {
    g.min_sentences = j["sentences_per_doc"].at(0).get<int>();
    g.max_sentences = j["sentences_per_doc"].at(1).get<int>();
  }
  if (j.contains("note_type_weights")) {
    const json& w = j["note_type_weights"];
    g.note_type_weights = {w.value("progress", 0.0), w.value("emergency", 0.0),
                           w.value("social_history", 0.0)};
  }
  if (j.contains("specialties")) {
    g.specialties = j["specialties"].get<std::vector<std::string>>();
  }
  for (EventType t : kEventTypes) {
    const std::string name(to_string(t));
    if (j.contains("event_type_weights") && j["event_type_weights"].contains(name)) {
      g.event_type_weights[static_cast<std::size_t>(t)] =
          j["event_type_weights"][name].get<double>();
    } else {
      g.event_type_weights[static_cast<std::size_t>(t)] = 0.0;
    }
    if (!j.contains("templates") || !j["templates"].contains(name)) continue;
    for (const json& tj : j["templates"][name]) {
      EventTemplate tmpl;
      tmpl.weight = tj.value("weight", 1.0);
      for (const json& pj : tj.at("parts")) {
        tmpl.parts.push_back(part_from_json(pj));
      }
      g.templates[static_cast<std::size_t>(t)].push_back(std::move(tmpl));
    }
  }
  validate_grammar(g);
  return g;
}

SynthGrammar load_grammar(const std::string& path) {
  return parse_grammar_json(read_file(path));
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

namespace {

const std::string& pick(Rng& rng, const std::vector<std::string>& phrases) {
  return phrases[static_cast<std::size_t>(rng.next_below(phrases.size()))];
}

struct SentenceDraw {
  std::string text;
  Event event;  // spans relative to the sentence start
};

SentenceDraw expand_template(Rng& rng, EventType etype, const EventTemplate& tmpl) {
  SentenceDraw draw;
  draw.event.trigger.type = etype;
  for (const TemplatePart& p : tmpl.parts) {
    const std::string& phrase = pick(rng, p.phrases);
    if (!draw.text.empty()) draw.text += ' ';
    Span span{static_cast<int>(draw.text.size()),
              static_cast<int>(draw.text.size() + phrase.size())};
    draw.text += phrase;
    switch (p.kind) {
      case TemplatePart::Kind::Text: break;
      case TemplatePart::Kind::Trigger: draw.event.trigger.span = span; break;
      case TemplatePart::Kind::SpanOnly:
        draw.event.arguments.push_back(Argument::span_only(p.span_only_type, span));
        break;
      case TemplatePart::Kind::Labeled:
        draw.event.arguments.push_back(
            Argument::labeled(p.labeled_type, p.subtype, span));
        break;
    }
  }
  draw.event.incomplete = !has_required_labeled_arg(draw.event);
  return draw;
}

}  // namespace

CorpusPartition generate_corpus(const SynthGrammar& grammar, int n_docs,
                                std::uint64_t seed,
                                const std::string& partition_name) {
  if (n_docs < 0) throw std::invalid_argument("n_docs must be >= 0");
  validate_grammar(grammar);

  std::vector<double> type_weights;
  double total = 0;
  for (EventType t : kEventTypes) {
    double w = grammar.templates[static_cast<std::size_t>(t)].empty()
                   ? 0.0
                   : grammar.event_type_weights[static_cast<std::size_t>(t)];
    type_weights.push_back(w);
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("empty grammar");

  CorpusPartition part;
  part.name = partition_name;
  const int n_patients = std::max(1, (n_docs * 3) / 5);

  for (int i = 0; i < n_docs; ++i) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(i) + 1));
    AnnotatedDoc ad;
    Document& doc = ad.doc;

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%05d", partition_name.c_str(), i);
    doc.id = buf;
    std::snprintf(buf, sizeof(buf), "p%04d",
                  static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_patients))));
    doc.patient_id = buf;
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:00", grammar.year,
                  static_cast<int>(rng.next_below(12)) + 1,
                  static_cast<int>(rng.next_below(28)) + 1,
                  static_cast<int>(rng.next_below(10)) + 8,
                  static_cast<int>(rng.next_below(60)));
    doc.timestamp = buf;

    std::vector<double> ntw(grammar.note_type_weights.begin(),
                            grammar.note_type_weights.end());
    doc.note_type = static_cast<NoteType>(rng.next_weighted(ntw));
    switch (doc.note_type) {
      case NoteType::Progress:
        doc.specialty = grammar.specialties.empty()
                            ? ""
                            : pick(rng, grammar.specialties);
        break;
      case NoteType::Emergency: doc.specialty = "Emergency Medicine"; break;
      case NoteType::SocialHistory: doc.specialty = ""; break;
    }

    const int span_count =
        grammar.min_sentences +
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
            grammar.max_sentences - grammar.min_sentences + 1)));

    std::string section;
    for (int s = 0; s < span_count; ++s) {
      EventType etype = static_cast<EventType>(rng.next_weighted(type_weights));
      const auto& list = grammar.templates[static_cast<std::size_t>(etype)];
      std::vector<double> tw;
      tw.reserve(list.size());
      for (const EventTemplate& t : list) tw.push_back(t.weight);
      const EventTemplate& tmpl = list[rng.next_weighted(tw)];

      SentenceDraw draw = expand_template(rng, etype, tmpl);
      if (!section.empty()) section += '\n';
      const int offset = static_cast<int>(section.size());
      section += draw.text;

      Event event = draw.event;
      event.trigger.span.start += offset;
      event.trigger.span.end += offset;
      for (Argument& a : event.arguments) {
        a.span.start += offset;
        a.span.end += offset;
      }
      ad.anns.events.push_back(std::move(event));
    }

    const std::string prefix = "CHIEF COMPLAINT: follow up.\nSOCIAL HISTORY:\n";
    doc.full_text = prefix + section + "\nMEDICATIONS: reviewed.\n";
    doc.section_offset = static_cast<int>(prefix.size());
    doc.section_text = section;
    ad.anns.document_id = doc.id;
    part.docs.push_back(std::move(ad));
  }
  return part;
}

}  // namespace sdoh
