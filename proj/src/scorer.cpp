#include "sdoh/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sdoh/parallel.hpp"

namespace sdoh {

PhenomKey PhenomKey::trigger(EventType t) {
  PhenomKey k;
  k.kind = PhenomKind::Trigger;
  k.event_type = t;
  return k;
}

PhenomKey PhenomKey::span_only_arg(EventType t, SpanOnlyArg a) {
  PhenomKey k;
  k.kind = PhenomKind::SpanOnly;
  k.event_type = t;
  k.span_only = a;
  return k;
}

PhenomKey PhenomKey::labeled_arg(EventType t, LabeledArg a, Subtype s) {
  PhenomKey k;
  k.kind = PhenomKind::Labeled;
  k.event_type = t;
  k.labeled = a;
  k.subtype = s;
  return k;
}

std::string PhenomKey::label() const {
  std::string out;
  switch (kind) {
    case PhenomKind::Trigger:
      out = "trigger/" + std::string(to_string(event_type));
      break;
    case PhenomKind::SpanOnly:
      out = "span_only/" + std::string(to_string(event_type)) + "/" +
            std::string(to_string(span_only));
      break;
    case PhenomKind::Labeled:
      out = "labeled/" + std::string(to_string(event_type)) + "/" +
            std::string(to_string(labeled)) + "/" + std::string(to_string(subtype));
      break;
  }
  return out;
}

Counts MatchCounts::overall() const {
  Counts total;
  for (const auto& [key, counts] : by_key) total += counts;
  return total;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  for (const auto& [key, counts] : o.by_key) by_key[key] += counts;
  return *this;
}

bool triggers_equivalent(const Trigger& a, const Trigger& b) {
  return a.type == b.type && a.span.overlaps(b.span);
}

Alignment align_events(const std::vector<Event>& gold,
                       const std::vector<Event>& pred) {
  Alignment out;
  std::vector<int> gold_order(gold.size());
  std::iota(gold_order.begin(), gold_order.end(), 0);
  std::stable_sort(gold_order.begin(), gold_order.end(), [&](int a, int b) {
    return gold[static_cast<std::size_t>(a)].trigger.span <
           gold[static_cast<std::size_t>(b)].trigger.span;
  });

  std::vector<bool> pred_taken(pred.size(), false);
  std::vector<int> gold_match(gold.size(), -1);
  for (int gi : gold_order) {
    const Trigger& gt = gold[static_cast<std::size_t>(gi)].trigger;
    int best = -1;
    int best_overlap = 0;
    for (int pi = 0; pi < static_cast<int>(pred.size()); ++pi) {
      if (pred_taken[static_cast<std::size_t>(pi)]) continue;
      const Trigger& pt = pred[static_cast<std::size_t>(pi)].trigger;
      if (!triggers_equivalent(gt, pt)) continue;
      const int overlap = gt.span.overlap_length(pt.span);
      if (best < 0 || overlap > best_overlap ||
          (overlap == best_overlap &&
           pt.span.start < pred[static_cast<std::size_t>(best)].trigger.span.start)) {
        best = pi;
        best_overlap = overlap;
      }
    }
    if (best >= 0) {
      pred_taken[static_cast<std::size_t>(best)] = true;
      gold_match[static_cast<std::size_t>(gi)] = best;
    }
  }
  for (int gi = 0; gi < static_cast<int>(gold.size()); ++gi) {
    if (gold_match[static_cast<std::size_t>(gi)] >= 0) {
      out.pairs.emplace_back(gi, gold_match[static_cast<std::size_t>(gi)]);
    } else {
      out.unmatched_gold.push_back(gi);
    }
  }
  for (int pi = 0; pi < static_cast<int>(pred.size()); ++pi) {
    if (!pred_taken[static_cast<std::size_t>(pi)]) out.unmatched_pred.push_back(pi);
  }
  return out;
}

namespace {

void count_event_one_sided(const Event& e, bool gold_side, MatchCounts& counts) {
  Counts& trig = counts.by_key[PhenomKey::trigger(e.trigger.type)];
  (gold_side ? trig.fn : trig.fp) += 1;
  for (const Argument& a : e.arguments) {
    PhenomKey key = a.kind == Argument::Kind::SpanOnly
                        ? PhenomKey::span_only_arg(e.trigger.type, a.span_only_type)
                        : PhenomKey::labeled_arg(e.trigger.type, a.labeled_type,
                                                 a.subtype);
    Counts& c = counts.by_key[key];
    (gold_side ? c.fn : c.fp) += 1;
  }
}

void count_aligned_pair(const Event& gold, const Event& pred, MatchCounts& counts) {
  const EventType etype = gold.trigger.type;
  counts.by_key[PhenomKey::trigger(etype)].tp += 1;

  // Span-only arguments: multiset match on (type, exact span).
  std::map<std::pair<SpanOnlyArg, Span>, int> pred_pool;
  for (const Argument& a : pred.arguments) {
    if (a.kind == Argument::Kind::SpanOnly) {
      ++pred_pool[{a.span_only_type, a.span}];
    }
  }
  for (const Argument& a : gold.arguments) {
    if (a.kind != Argument::Kind::SpanOnly) continue;
    Counts& c = counts.by_key[PhenomKey::span_only_arg(etype, a.span_only_type)];
    auto it = pred_pool.find({a.span_only_type, a.span});
    if (it != pred_pool.end() && it->second > 0) {
      --it->second;
      c.tp += 1;
    } else {
      c.fn += 1;
    }
  }
  for (const auto& [key, remaining] : pred_pool) {
    if (remaining > 0) {
      counts.by_key[PhenomKey::span_only_arg(etype, key.first)].fp += remaining;
    }
  }

  // Labeled arguments: span-agnostic multiset match on (type, subtype).
  std::map<std::pair<LabeledArg, Subtype>, int> gold_labels, pred_labels;
  for (const Argument& a : gold.arguments) {
    if (a.kind == Argument::Kind::Labeled) ++gold_labels[{a.labeled_type, a.subtype}];
  }
  for (const Argument& a : pred.arguments) {
    if (a.kind == Argument::Kind::Labeled) ++pred_labels[{a.labeled_type, a.subtype}];
  }
  for (const auto& [key, gold_count] : gold_labels) {
    const auto it = pred_labels.find(key);
    const int pred_count = it == pred_labels.end() ? 0 : it->second;
    const int matched = std::min(gold_count, pred_count);
    Counts& c = counts.by_key[PhenomKey::labeled_arg(etype, key.first, key.second)];
    c.tp += matched;
    c.fn += gold_count - matched;
  }
  for (const auto& [key, pred_count] : pred_labels) {
    const auto it = gold_labels.find(key);
    const int gold_count = it == gold_labels.end() ? 0 : it->second;
    if (pred_count > gold_count) {
      counts.by_key[PhenomKey::labeled_arg(etype, key.first, key.second)].fp +=
          pred_count - gold_count;
    }
  }
}

}  // namespace

MatchCounts score_document(const AnnotationSet& gold, const AnnotationSet& pred) {
  MatchCounts counts;
  Alignment alignment = align_events(gold.events, pred.events);
  for (const auto& [gi, pi] : alignment.pairs) {
    count_aligned_pair(gold.events[static_cast<std::size_t>(gi)],
                       pred.events[static_cast<std::size_t>(pi)], counts);
  }
  for (int gi : alignment.unmatched_gold) {
    count_event_one_sided(gold.events[static_cast<std::size_t>(gi)], true, counts);
  }
  for (int pi : alignment.unmatched_pred) {
    count_event_one_sided(pred.events[static_cast<std::size_t>(pi)], false, counts);
  }
  return counts;
}

namespace {

std::vector<int> pair_documents(const std::vector<AnnotationSet>& gold,
                                const std::vector<AnnotationSet>& pred) {
  std::map<std::string, int> pred_index;
  for (int i = 0; i < static_cast<int>(pred.size()); ++i) {
    if (!pred_index.emplace(pred[static_cast<std::size_t>(i)].document_id, i).second) {
      throw std::invalid_argument("duplicate document id '" +
                                  pred[static_cast<std::size_t>(i)].document_id +
                                  "' in predictions");
    }
  }
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("gold and pred document sets differ in size");
  }
  std::vector<int> mapping(gold.size(), -1);
  for (int i = 0; i < static_cast<int>(gold.size()); ++i) {
    auto it = pred_index.find(gold[static_cast<std::size_t>(i)].document_id);
    if (it == pred_index.end()) {
      throw std::invalid_argument("unknown document id '" +
                                  gold[static_cast<std::size_t>(i)].document_id + "'");
    }
    mapping[static_cast<std::size_t>(i)] = it->second;
  }
  return mapping;
}

}  // namespace

MatchCounts score_documents(const std::vector<AnnotationSet>& gold,
                            const std::vector<AnnotationSet>& pred,
                            int threads) {
  const std::vector<int> mapping = pair_documents(gold, pred);
  std::vector<MatchCounts> per_doc(gold.size());
  parallel_for(gold.size(), threads, [&](std::size_t i) {
    per_doc[i] = score_document(gold[i], pred[static_cast<std::size_t>(mapping[i])]);
  });
  MatchCounts total;
  for (const MatchCounts& c : per_doc) total += c;
  return total;
}

MatchCounts score_documents_serial(const std::vector<AnnotationSet>& gold,
                                   const std::vector<AnnotationSet>& pred) {
  const std::vector<int> mapping = pair_documents(gold, pred);
  MatchCounts total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    total += score_document(gold[i], pred[static_cast<std::size_t>(mapping[i])]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

Metric metric_from(const Counts& c) {
  Metric m;
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
    m.precision = m.recall = m.f1 = 1.0;
    m.empty = true;
    return m;
  }
  m.precision = c.tp + c.fp > 0
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : 0.0;
  m.recall = c.tp + c.fn > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

ScoreReport make_report(const MatchCounts& counts) {
  ScoreReport report;
  std::map<std::pair<LabeledArg, Subtype>, Counts> breakdown;
  for (const auto& [key, c] : counts.by_key) {
    ReportRow row;
    row.key = key;
    row.counts = c;
    row.metric = metric_from(c);
    row.gold_count = c.tp + c.fn;
    report.rows.push_back(row);
    if (key.kind == PhenomKind::Labeled) {
      breakdown[{key.labeled, key.subtype}] += c;
    }
  }
  report.overall_counts = counts.overall();
  report.overall = metric_from(report.overall_counts);
  for (const auto& [key, c] : breakdown) {
    SubtypeBreakdownRow row;
    row.labeled = key.first;
    row.subtype = key.second;
    row.counts = c;
    row.metric = metric_from(c);
    row.gold_count = c.tp + c.fn;
    report.subtype_breakdown.push_back(row);
  }
  return report;
}

namespace {

using nlohmann::json;

json metric_json(const Counts& c, const Metric& m) {
  json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  if (m.empty) j["empty"] = true;
  return j;
}

}  // namespace

std::string report_to_json(const ScoreReport& report) {
  json j;
  json rows = json::object();
  for (const ReportRow& row : report.rows) {
    json r = metric_json(row.counts, row.metric);
    r["gold"] = row.gold_count;
    rows[row.key.label()] = r;
  }
  j["per_phenomenon"] = rows;
  j["overall"] = metric_json(report.overall_counts, report.overall);
  json breakdown = json::array();
  for (const SubtypeBreakdownRow& row : report.subtype_breakdown) {
    json r = metric_json(row.counts, row.metric);
    r["argument"] = std::string(to_string(row.labeled));
    r["subtype"] = std::string(to_string(row.subtype));
    r["gold"] = row.gold_count;
    breakdown.push_back(r);
  }
  j["subtype_breakdown"] = breakdown;
  j["reference"] = {
      {"note", "full-scale clinical study result, for context; not a target "
               "for synthetic corpora"},
      {"overall_f1", 0.86}};
  return j.dump(2) + "\n";
}

std::string report_table(const ScoreReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-44s %6s %6s %6s %8s %8s %8s %6s\n",
                "phenomenon", "tp", "fp", "fn", "P", "R", "F1", "gold");
  out << line;
  auto print_row = [&](const std::string& name, const Counts& c, const Metric& m,
                       long gold) {
    std::snprintf(line, sizeof(line),
                  "%-44s %6ld %6ld %6ld %8.4f %8.4f %8.4f %6ld%s\n", name.c_str(),
                  c.tp, c.fp, c.fn, m.precision, m.recall, m.f1, gold,
                  m.empty ? " (empty)" : "");
    out << line;
  };
  for (const ReportRow& row : report.rows) {
    print_row(row.key.label(), row.counts, row.metric, row.gold_count);
  }
  print_row("overall (micro)", report.overall_counts, report.overall,
            report.overall_counts.tp + report.overall_counts.fn);
  out << "\nsubtype breakdown (micro across event types)\n";
  for (const SubtypeBreakdownRow& row : report.subtype_breakdown) {
    print_row(std::string(to_string(row.labeled)) + "/" +
                  std::string(to_string(row.subtype)),
              row.counts, row.metric, row.gold_count);
  }
  return out.str();
}

std::string alignment_debug_json(const std::vector<AnnotationSet>& gold,
                                 const std::vector<AnnotationSet>& pred) {
  const std::vector<int> mapping = pair_documents(gold, pred);
  json out = json::array();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const AnnotationSet& g = gold[i];
    const AnnotationSet& p = pred[static_cast<std::size_t>(mapping[i])];
    Alignment alignment = align_events(g.events, p.events);
    json dj;
    dj["document_id"] = g.document_id;
    auto trig = [](const Event& e) {
      return json{{"type", std::string(to_string(e.trigger.type))},
                  {"start", e.trigger.span.start},
                  {"end", e.trigger.span.end}};
    };
    json pairs = json::array();
    for (const auto& [gi, pi] : alignment.pairs) {
      pairs.push_back({{"gold", trig(g.events[static_cast<std::size_t>(gi)])},
                       {"pred", trig(p.events[static_cast<std::size_t>(pi)])}});
    }
    dj["matched"] = pairs;
    json ug = json::array(), up = json::array();
    for (int gi : alignment.unmatched_gold) {
      ug.push_back(trig(g.events[static_cast<std::size_t>(gi)]));
    }
    for (int pi : alignment.unmatched_pred) {
      up.push_back(trig(p.events[static_cast<std::size_t>(pi)]));
    }
    dj["unmatched_gold"] = ug;
    dj["unmatched_pred"] = up;
    out.push_back(dj);
  }
  return out.dump(2) + "\n";
}

}  // namespace sdoh
