#pragma once

#include <array>
#include <string>
#include <vector>

#include "sdoh/schema.hpp"
#include "sdoh/scorer.hpp"

namespace sdoh {

enum class NoteField { Alcohol, Drug, Tobacco, Employment, Living };

inline constexpr std::array<NoteField, 5> kNoteFields = {
    NoteField::Alcohol, NoteField::Drug, NoteField::Tobacco,
    NoteField::Employment, NoteField::Living};

std::string_view to_string(NoteField f);

/// Valid labels for a field; index 0 is always "unknown".
const std::vector<std::string>& note_label_values(NoteField f);

/// One multi-class label per SDOH per document; unknown is the default and
/// the designated negative.
struct NoteLabelSet {
  std::array<std::string, 5> labels = {"unknown", "unknown", "unknown",
                                       "unknown", "unknown"};

  std::string& operator[](NoteField f) { return labels[static_cast<std::size_t>(f)]; }
  const std::string& operator[](NoteField f) const {
    return labels[static_cast<std::size_t>(f)];
  }
  bool operator==(const NoteLabelSet&) const = default;
};

/// Maps one document's events to note-level labels. Where a field is
/// described more than once, the occurrence whose trigger starts latest in
/// the text wins; order of the input list does not matter.
NoteLabelSet events_to_note_labels(const std::vector<Event>& events);

struct FieldMetrics {
  double accuracy = 0;
  Counts counts;
  Metric metric;
};

struct NoteMetrics {
  std::array<FieldMetrics, 5> fields;
  double macro_accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
};

/// Accuracy is exact label agreement. For P/R/F1, unknown is the negative
/// label: a true positive needs an exact match on a non-unknown gold; a
/// mismatch between two positives counts as both fp and fn. Throws
/// std::invalid_argument on a length mismatch.
NoteMetrics note_metrics(const std::vector<NoteLabelSet>& gold,
                         const std::vector<NoteLabelSet>& pred);

// CSV: document_id,alcohol,drug,tobacco,employment,living
std::string note_labels_to_csv(
    const std::vector<std::pair<std::string, NoteLabelSet>>& rows);
std::vector<std::pair<std::string, NoteLabelSet>> note_labels_from_csv(
    const std::string& content);

std::string note_metrics_to_json(const NoteMetrics& metrics);

}  // namespace sdoh
