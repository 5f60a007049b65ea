#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdoh/corpus_io.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {

enum class StructuredSource {
  Flowsheet,
  SocialHistoryTable,
  EmploymentStatus,
  Occupation
};

std::string_view to_string(StructuredSource s);
std::optional<StructuredSource> parse_structured_source(std::string_view name);

struct StructuredRecord {
  std::string patient_id;
  StructuredSource source = StructuredSource::Flowsheet;
  std::string field;
  std::string value;
  std::string timestamp;  // empty for employment_status rows
};

enum class SdohIndicator {
  AlcoholCurrent,
  TobaccoCurrent,
  DrugCurrent,
  EmploymentAny,
  HomelessCurrent
};

inline constexpr std::array<SdohIndicator, 5> kSdohIndicators = {
    SdohIndicator::AlcoholCurrent, SdohIndicator::TobaccoCurrent,
    SdohIndicator::DrugCurrent, SdohIndicator::EmploymentAny,
    SdohIndicator::HomelessCurrent};

std::string_view to_string(SdohIndicator s);
std::optional<SdohIndicator> parse_sdoh_indicator(std::string_view name);

enum class IndicatorSource { Structured, Extracted };

struct PatientIndicator {
  std::string patient_id;
  SdohIndicator sdoh = SdohIndicator::AlcoholCurrent;
  IndicatorSource source = IndicatorSource::Structured;
  auto operator<=>(const PatientIndicator&) const = default;
};

// ---------------------------------------------------------------------------
// Ingestion. CSV schemas:
//   flowsheet.csv:            patient_id,field,value,timestamp
//   social_history_table.csv: patient_id,alcohol_use,tobacco_use,drug_use,timestamp
//   employment_status.csv:    patient_id,status
//   occupation.csv:           patient_id,title,timestamp
//   visits.csv:               patient_id,visit_date
// Employment-status rows carry no timestamp and are kept only for patients
// with a completed visit in the given year. Missing files are treated as
// empty sources.
// ---------------------------------------------------------------------------

std::vector<StructuredRecord> ingest_structured(const std::string& dir, int year);

/// Maps a structured (source, field, value) onto an indicator. A rule fires
/// when source and field match and either `equals` compares equal
/// (case-insensitive) or no `equals` is set and the value is non-empty.
struct MappingRule {
  StructuredSource source = StructuredSource::Flowsheet;
  std::string field;
  std::optional<std::string> equals;
  SdohIndicator sdoh = SdohIndicator::AlcoholCurrent;
};

std::vector<MappingRule> default_field_mapping();
std::vector<MappingRule> parse_field_mapping_json(const std::string& json_text);
std::string field_mapping_to_json(const std::vector<MappingRule>& rules);

/// Document + its (gold or predicted) events, for patient-level aggregation.
struct DocEvents {
  const Document* doc = nullptr;
  const AnnotationSet* anns = nullptr;
};

std::vector<DocEvents> doc_events(const CorpusPartition& part);
std::vector<DocEvents> doc_events(const CorpusPartition& part,
                                  const std::vector<AnnotationSet>& predicted);

/// Patient-level positives, set semantics, restricted to the given year.
/// Extracted side: a substance is current when any event of that type
/// carries StatusTime=current; employment when any Employment event carries
/// any StatusEmploy; homeless when any LivingStatus event carries
/// TypeLiving=homeless.
std::vector<PatientIndicator> patient_indicators(
    const std::vector<StructuredRecord>& structured,
    const std::vector<DocEvents>& extracted, int year,
    const std::vector<MappingRule>& mapping);

// ---------------------------------------------------------------------------
// Comparison report
// ---------------------------------------------------------------------------

struct SdohPartition {
  long only_structured = 0;
  long only_extracted = 0;
  long both = 0;
  long total() const { return only_structured + only_extracted + both; }
};

struct ComparisonReport {
  int year = 0;
  std::map<SdohIndicator, SdohPartition> full;
  /// Structured side restricted to patients with narrative social-history
  /// text before partitioning.
  std::map<SdohIndicator, SdohPartition> narrative_restricted;
};

/// Partitions positive patients per SDOH into only-structured /
/// only-extracted / both; proportions are over the union of positives.
ComparisonReport compare(const std::vector<PatientIndicator>& indicators,
                         const std::set<std::string>& narrative_patients,
                         int year);

std::string comparison_to_json(const ComparisonReport& report);
std::string comparison_table(const ComparisonReport& report);

// ---------------------------------------------------------------------------
// Stratification
// ---------------------------------------------------------------------------

struct StratifyReport {
  /// Unique documents with at least one event of the type, per note type.
  std::map<EventType, std::map<NoteType, long>> by_note_type;
  /// Same per specialty, limited to the top 20 specialties by section count.
  std::map<EventType, std::map<std::string, long>> by_specialty;
  std::vector<std::string> top_specialties;
};

StratifyReport stratify(const std::vector<DocEvents>& extracted);

std::string stratify_to_json(const StratifyReport& report);
std::string stratify_table(const StratifyReport& report);

// ---------------------------------------------------------------------------
// Substance normalization
// ---------------------------------------------------------------------------

enum class SubstanceCategory { Drug, Alcohol };

struct LexiconRule {
  std::string pattern;  // ECMAScript regex, matched case-insensitively
  std::string canonical;
  SubstanceCategory category = SubstanceCategory::Drug;
};

std::vector<LexiconRule> default_lexicon();
std::vector<LexiconRule> parse_lexicon_json(const std::string& json_text);
std::string lexicon_to_json(const std::vector<LexiconRule>& rules);

struct NormalizationReport {
  /// canonical value -> unique patient count, per category.
  std::map<SubstanceCategory, std::map<std::string, long>> patient_counts;
  std::map<SubstanceCategory, long> patients_with_values;
  std::map<SubstanceCategory, long> patients_multi_value;
};

/// Applies the lexicon (first match wins) to the Type-argument span texts of
/// Drug and Alcohol events; unmatched spans land in the "unnormalized"
/// bucket.
NormalizationReport normalize_substances(const std::vector<DocEvents>& extracted,
                                         const std::vector<LexiconRule>& lexicon);

std::string normalization_to_json(const NormalizationReport& report);
std::string normalization_table(const NormalizationReport& report);

}  // namespace sdoh
