#pragma once

#include <string>
#include <vector>

#include "sdoh/corpus_io.hpp"
#include "sdoh/model.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {

/// Argmax decisions for one sentence's candidates, ready for assembly. A
/// candidate may act as several entities at once (trigger plus labeled
/// argument, say); single label within each head, multi-label across heads.
struct DecodedEntities {
  std::vector<SpanCandidate> candidates;
  std::vector<int> entity_choice;                    // Phi_e argmax
  std::array<std::vector<int>, 3> subtype_choice;    // per head argmax
  std::vector<std::pair<int, int>> has_pairs;        // relation argmax == has

  bool is_trigger(int i, const LabelInventory& inv) const {
    return inv.event_type_of(entity_choice[static_cast<std::size_t>(i)]).has_value();
  }
};

/// Applies the decoding rule to raw logits: argmax per head, ties toward
/// null. Relation pairs keep only those with argmax == has.
DecodedEntities decode(const RawPredictions& raw, const LabelInventory& inv);

struct AssemblyStats {
  int dropped_incompatible = 0;
  int duplicate_labeled = 0;
};

/// Builds events from decoded entities: every trigger yields one event; each
/// has-pair attaches the tail's argument roles to the head trigger when the
/// compatibility table permits them. Duplicate labeled arguments keep the
/// latest-starting span. Output sorted by trigger start offset.
std::vector<Event> assemble_events(const DecodedEntities& decoded,
                                   const LabelInventory& inv,
                                   AssemblyStats* stats = nullptr);

/// Full decode for one document: forward + decode + assemble per sentence.
AnnotationSet predict_document(const AnnotatedDoc& ad, const ModelParams& params,
                               const EmbeddingFile* side,
                               AssemblyStats* stats = nullptr);

/// Document-parallel prediction; results indexed like part.docs.
std::vector<AnnotationSet> predict_corpus(const CorpusPartition& part,
                                          const ModelParams& params,
                                          const EmbeddingFile* side,
                                          int threads = 0);

/// Serial reference implementation kept for testing and benchmarking.
std::vector<AnnotationSet> predict_corpus_serial(const CorpusPartition& part,
                                                 const ModelParams& params,
                                                 const EmbeddingFile* side);

// Predicted-events JSON: one object per document,
// {document_id, events:[{type, trigger:{start,end,text}, arguments:[...]}]}.
std::string events_to_json(const std::vector<const Document*>& docs,
                           const std::vector<AnnotationSet>& anns);
std::vector<AnnotationSet> events_from_json(const std::string& json_text);

}  // namespace sdoh
