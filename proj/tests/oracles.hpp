#pragma once

// Test-only oracles and fixture generators. The brute-force matcher here is
// an independent implementation path: it enumerates every one-to-one
// matching among equivalent triggers instead of the production greedy loop,
// and recounts argument matches with its own code.

#include <algorithm>
#include <map>
#include <vector>

#include "sdoh/rng.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/scorer.hpp"

namespace sdoh::testing {

struct OracleResult {
  int max_pairs = 0;
  std::vector<std::pair<int, int>> matching;  // chosen per the alignment rule
  MatchCounts counts;
};

namespace detail {

inline void count_side(const Event& e, bool gold_side, MatchCounts& out) {
  auto bump = [&](const PhenomKey& key) {
    Counts& c = out.by_key[key];
    if (gold_side) c.fn += 1;
    else c.fp += 1;
  };
  bump(PhenomKey::trigger(e.trigger.type));
  for (const Argument& a : e.arguments) {
    if (a.kind == Argument::Kind::SpanOnly) {
      bump(PhenomKey::span_only_arg(e.trigger.type, a.span_only_type));
    } else {
      bump(PhenomKey::labeled_arg(e.trigger.type, a.labeled_type, a.subtype));
    }
  }
}

inline void count_pair(const Event& g, const Event& p, MatchCounts& out) {
  out.by_key[PhenomKey::trigger(g.trigger.type)].tp += 1;
  std::vector<bool> pred_used(p.arguments.size(), false);
  for (const Argument& ga : g.arguments) {
    bool matched = false;
    for (std::size_t j = 0; j < p.arguments.size(); ++j) {
      if (pred_used[j]) continue;
      const Argument& pa = p.arguments[j];
      if (ga.kind != pa.kind) continue;
      if (ga.kind == Argument::Kind::SpanOnly) {
        if (ga.span_only_type == pa.span_only_type && ga.span == pa.span) {
          pred_used[j] = true;
          matched = true;
          break;
        }
      } else {
        if (ga.labeled_type == pa.labeled_type && ga.subtype == pa.subtype) {
          pred_used[j] = true;
          matched = true;
          break;
        }
      }
    }
    PhenomKey key =
        ga.kind == Argument::Kind::SpanOnly
            ? PhenomKey::span_only_arg(g.trigger.type, ga.span_only_type)
            : PhenomKey::labeled_arg(g.trigger.type, ga.labeled_type, ga.subtype);
    if (matched) out.by_key[key].tp += 1;
    else out.by_key[key].fn += 1;
  }
  for (std::size_t j = 0; j < p.arguments.size(); ++j) {
    if (pred_used[j]) continue;
    const Argument& pa = p.arguments[j];
    PhenomKey key =
        pa.kind == Argument::Kind::SpanOnly
            ? PhenomKey::span_only_arg(g.trigger.type, pa.span_only_type)
            : PhenomKey::labeled_arg(g.trigger.type, pa.labeled_type, pa.subtype);
    out.by_key[key].fp += 1;
  }
}

struct Assignment {
  std::vector<int> pred_of_gold;  // -1 = unmatched
  int pairs = 0;
};

inline void enumerate(const std::vector<Event>& gold,
                      const std::vector<Event>& pred, std::size_t gi,
                      std::vector<bool>& used, Assignment& current,
                      std::vector<Assignment>& best) {
  if (gi == gold.size()) {
    if (best.empty() || current.pairs > best.front().pairs) {
      best.assign(1, current);
    } else if (current.pairs == best.front().pairs) {
      best.push_back(current);
    }
    return;
  }
  enumerate(gold, pred, gi + 1, used, current, best);  // leave gi unmatched
  for (int pi = 0; pi < static_cast<int>(pred.size()); ++pi) {
    if (used[static_cast<std::size_t>(pi)]) continue;
    if (!triggers_equivalent(gold[gi].trigger,
                             pred[static_cast<std::size_t>(pi)].trigger)) {
      continue;
    }
    used[static_cast<std::size_t>(pi)] = true;
    current.pred_of_gold[gi] = pi;
    current.pairs += 1;
    enumerate(gold, pred, gi + 1, used, current, best);
    current.pairs -= 1;
    current.pred_of_gold[gi] = -1;
    used[static_cast<std::size_t>(pi)] = false;
  }
}

}  // namespace detail

/// Enumerates every matching, keeps the maximum-cardinality ones, and selects
/// among them with the documented alignment rule (gold events by trigger
/// start; prefer larger overlap, then earlier prediction start, then lower
/// index). Argument counts are recomputed independently of the scorer.
inline OracleResult brute_force_score(const std::vector<Event>& gold,
                                      const std::vector<Event>& pred) {
  std::vector<detail::Assignment> best;
  detail::Assignment current;
  current.pred_of_gold.assign(gold.size(), -1);
  std::vector<bool> used(pred.size(), false);
  detail::enumerate(gold, pred, 0, used, current, best);

  std::vector<int> gold_order(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) gold_order[i] = static_cast<int>(i);
  std::stable_sort(gold_order.begin(), gold_order.end(), [&](int a, int b) {
    return gold[static_cast<std::size_t>(a)].trigger.span <
           gold[static_cast<std::size_t>(b)].trigger.span;
  });

  // Rank a gold's assigned prediction; smaller is preferred.
  auto rank = [&](int gi, int pi) -> std::tuple<int, int, int, int> {
    if (pi < 0) return {1, 0, 0, 0};  // unmatched sorts after any match
    const Span& gs = gold[static_cast<std::size_t>(gi)].trigger.span;
    const Span& ps = pred[static_cast<std::size_t>(pi)].trigger.span;
    return {0, -gs.overlap_length(ps), ps.start, pi};
  };
  const detail::Assignment* chosen = &best.front();
  for (const detail::Assignment& cand : best) {
    for (int gi : gold_order) {
      auto a = rank(gi, cand.pred_of_gold[static_cast<std::size_t>(gi)]);
      auto b = rank(gi, chosen->pred_of_gold[static_cast<std::size_t>(gi)]);
      if (a < b) {
        chosen = &cand;
        break;
      }
      if (a > b) break;
    }
  }

  OracleResult out;
  out.max_pairs = chosen->pairs;
  std::vector<bool> pred_matched(pred.size(), false);
  for (std::size_t gi = 0; gi < gold.size(); ++gi) {
    int pi = chosen->pred_of_gold[gi];
    if (pi >= 0) {
      out.matching.emplace_back(static_cast<int>(gi), pi);
      pred_matched[static_cast<std::size_t>(pi)] = true;
      detail::count_pair(gold[gi], pred[static_cast<std::size_t>(pi)], out.counts);
    } else {
      detail::count_side(gold[gi], true, out.counts);
    }
  }
  for (std::size_t pi = 0; pi < pred.size(); ++pi) {
    if (!pred_matched[pi]) detail::count_side(pred[pi], false, out.counts);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixture generation: gold/pred event lists on a virtual document. Gold
// events sit in disjoint 40-char zones, so no prediction can overlap two
// gold triggers and no two gold triggers overlap a common prediction.
// ---------------------------------------------------------------------------

struct FixtureOptions {
  int max_events = 4;
  /// Allow a second prediction overlapping the same gold trigger (exercises
  /// alignment multiplicity). Off for swap-symmetry fixtures.
  bool allow_double_pred = true;
};

struct ScoredFixture {
  std::vector<Event> gold;
  std::vector<Event> pred;
};

inline Event random_event(Rng& rng, int zone_base, const LabelInventory& inv) {
  EventType t = kEventTypes[rng.next_below(kEventTypes.size())];
  Event e;
  const int start = zone_base + static_cast<int>(rng.next_below(6));
  const int len = 3 + static_cast<int>(rng.next_below(6));
  e.trigger = Trigger{t, Span{start, start + len}};
  const EventCompat compat = compatibility(t, inv);
  const auto& subtypes = inv.subtype_set(compat.required_labeled);
  const Subtype sub = subtypes[1 + rng.next_below(subtypes.size() - 1)];
  const int arg_start = zone_base + 12 + static_cast<int>(rng.next_below(4));
  e.arguments.push_back(Argument::labeled(compat.required_labeled, sub,
                                          Span{arg_start, arg_start + 4}));
  const std::uint64_t n_span_only = rng.next_below(3);
  for (std::uint64_t k = 0; k < n_span_only; ++k) {
    SpanOnlyArg so = compat.allowed_span_only[rng.next_below(
        compat.allowed_span_only.size())];
    const int s = zone_base + 18 + static_cast<int>(k) * 6 +
                  static_cast<int>(rng.next_below(2));
    e.arguments.push_back(Argument::span_only(so, Span{s, s + 4}));
  }
  return e;
}

inline ScoredFixture random_fixture(std::uint64_t seed,
                                    const LabelInventory& inv,
                                    const FixtureOptions& options = {}) {
  Rng rng(seed);
  ScoredFixture fx;
  const int n_events = 1 + static_cast<int>(rng.next_below(
                               static_cast<std::uint64_t>(options.max_events)));
  int next_fresh_zone = n_events;
  for (int i = 0; i < n_events; ++i) {
    const int zone = i * 40;
    Event gold = random_event(rng, zone, inv);
    fx.gold.push_back(gold);

    const double roll = rng.next_double();
    if (roll < 0.72) {
      // Derived prediction: jitter the trigger while keeping overlap.
      Event pred = gold;
      const int shift = static_cast<int>(rng.next_below(7)) - 3;
      pred.trigger.span.start = std::max(zone, pred.trigger.span.start + shift);
      pred.trigger.span.end =
          std::max(pred.trigger.span.start + 1, pred.trigger.span.end + shift / 2);
      if (!pred.trigger.span.overlaps(gold.trigger.span)) {
        pred.trigger.span = gold.trigger.span;
      }
      for (Argument& a : pred.arguments) {
        const double mutate = rng.next_double();
        if (a.kind == Argument::Kind::Labeled) {
          if (mutate < 0.3) {
            const auto& subtypes = inv.subtype_set(a.labeled_type);
            a.subtype = subtypes[1 + rng.next_below(subtypes.size() - 1)];
          }
        } else if (mutate < 0.3) {
          a.span.start += 1;  // exact-match criterion will reject this
          a.span.end += 1;
        }
      }
      if (!pred.arguments.empty() && rng.next_double() < 0.25) {
        pred.arguments.erase(pred.arguments.begin() +
                             static_cast<long>(rng.next_below(pred.arguments.size())));
      }
      pred.incomplete = !has_required_labeled_arg(pred);
      fx.pred.push_back(pred);

      if (options.allow_double_pred && rng.next_double() < 0.2) {
        Event extra = gold;
        extra.trigger.span.start = gold.trigger.span.end - 1;
        extra.trigger.span.end = extra.trigger.span.start + 3;
        extra.arguments.clear();
        extra.incomplete = true;
        fx.pred.push_back(extra);
      }
    }
    // roll >= 0.72: gold event missed entirely.
  }
  const std::uint64_t spurious = rng.next_below(3);
  for (std::uint64_t k = 0; k < spurious; ++k) {
    fx.pred.push_back(random_event(rng, 40 * next_fresh_zone++, inv));
  }
  return fx;
}

}  // namespace sdoh::testing
