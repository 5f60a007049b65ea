#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdoh/schema.hpp"

namespace sdoh {

enum class PhenomKind { Trigger, SpanOnly, Labeled };

/// One scored phenomenon: a trigger per event type, a span-only argument per
/// (event type, argument type), or a labeled argument per (event type,
/// argument type, subtype).
struct PhenomKey {
  PhenomKind kind = PhenomKind::Trigger;
  EventType event_type = EventType::Alcohol;
  SpanOnlyArg span_only = SpanOnlyArg::Amount;
  LabeledArg labeled = LabeledArg::StatusTime;
  Subtype subtype = Subtype::Null;

  static PhenomKey trigger(EventType t);
  static PhenomKey span_only_arg(EventType t, SpanOnlyArg a);
  static PhenomKey labeled_arg(EventType t, LabeledArg a, Subtype s);

  std::string label() const;  // e.g. "labeled/Tobacco/StatusTime/past"
  auto operator<=>(const PhenomKey&) const = default;
};

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

struct MatchCounts {
  std::map<PhenomKey, Counts> by_key;

  Counts overall() const;
  MatchCounts& operator+=(const MatchCounts& o);
  bool operator==(const MatchCounts&) const = default;
};

/// Any-overlap equivalence: same event type and spans sharing >= 1 character.
bool triggers_equivalent(const Trigger& a, const Trigger& b);

struct Alignment {
  std::vector<std::pair<int, int>> pairs;  // (gold index, pred index)
  std::vector<int> unmatched_gold;
  std::vector<int> unmatched_pred;
};

/// One-to-one greedy alignment: gold events in trigger-start order each take
/// the equivalent unmatched prediction with maximal overlap, ties broken
/// toward the earliest prediction start.
Alignment align_events(const std::vector<Event>& gold,
                       const std::vector<Event>& pred);

/// Slot-filling counts for one document: matched triggers are tp; span-only
/// arguments of aligned events match on (type, exact span); labeled
/// arguments match on (type, subtype) ignoring spans; arguments of unmatched
/// events count wholly against their side.
MatchCounts score_document(const AnnotationSet& gold, const AnnotationSet& pred);

/// Corpus-level counting; gold and pred must cover identical document-id
/// sets (throws std::invalid_argument otherwise). Counting is parallel over
/// documents and merged in document order.
MatchCounts score_documents(const std::vector<AnnotationSet>& gold,
                            const std::vector<AnnotationSet>& pred,
                            int threads = 0);

/// Serial reference implementation kept for testing and benchmarking.
MatchCounts score_documents_serial(const std::vector<AnnotationSet>& gold,
                                   const std::vector<AnnotationSet>& pred);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Metric {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool empty = false;  // tp == fp == fn == 0; triple reported as 1.0
};

/// Degenerate cases: all-zero counts give 1.0 with the empty flag; a 0/0
/// precision or recall against a nonzero opposing count gives 0.0.
Metric metric_from(const Counts& c);

struct ReportRow {
  PhenomKey key;
  Counts counts;
  Metric metric;
  long gold_count = 0;  // tp + fn
};

struct SubtypeBreakdownRow {
  LabeledArg labeled = LabeledArg::StatusTime;
  Subtype subtype = Subtype::Null;
  Counts counts;
  Metric metric;
  long gold_count = 0;
};

struct ScoreReport {
  std::vector<ReportRow> rows;
  Counts overall_counts;
  Metric overall;
  /// Micro-average per subtype label across event types.
  std::vector<SubtypeBreakdownRow> subtype_breakdown;
};

ScoreReport make_report(const MatchCounts& counts);

std::string report_to_json(const ScoreReport& report);
std::string report_table(const ScoreReport& report);

/// Per-document match listing for error analysis.
std::string alignment_debug_json(const std::vector<AnnotationSet>& gold,
                                 const std::vector<AnnotationSet>& pred);

}  // namespace sdoh
