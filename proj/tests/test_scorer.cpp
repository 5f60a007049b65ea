#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sdoh/scorer.hpp"

using namespace sdoh;
using sdoh::testing::FixtureOptions;
using sdoh::testing::ScoredFixture;

TEST_CASE("triggers_equivalent: overlap and type rules") {
  Trigger a{EventType::Tobacco, Span{10, 17}};
  CHECK(triggers_equivalent(a, Trigger{EventType::Tobacco, Span{16, 20}}));
  CHECK_FALSE(triggers_equivalent(a, Trigger{EventType::Alcohol, Span{10, 17}}));
  CHECK_FALSE(triggers_equivalent(Trigger{EventType::Drug, Span{5, 8}},
                                  Trigger{EventType::Drug, Span{8, 12}}));
}

namespace {

Event make_event(EventType t, Span trig, Subtype sub, Span sub_span,
                 std::vector<std::pair<SpanOnlyArg, Span>> span_only = {}) {
  Event e;
  e.trigger = Trigger{t, trig};
  if (sub != Subtype::Null) {
    e.arguments.push_back(Argument::labeled(required_labeled_arg(t), sub, sub_span));
  }
  for (const auto& [arg, span] : span_only) {
    e.arguments.push_back(Argument::span_only(arg, span));
  }
  e.incomplete = !has_required_labeled_arg(e);
  return e;
}

}  // namespace

TEST_CASE("align_events: disjoint, identity, shared prediction") {
  std::vector<Event> gold = {
      make_event(EventType::Tobacco, Span{0, 5}, Subtype::None, Span{6, 9}),
      make_event(EventType::Alcohol, Span{20, 26}, Subtype::Past, Span{27, 30})};

  SUBCASE("disjoint trigger sets match nothing") {
    std::vector<Event> pred = {
        make_event(EventType::Drug, Span{0, 5}, Subtype::None, Span{6, 9})};
    Alignment a = align_events(gold, pred);
    CHECK(a.pairs.empty());
    CHECK(a.unmatched_gold.size() == 2);
    CHECK(a.unmatched_pred.size() == 1);
  }

  SUBCASE("identical lists fully match") {
    Alignment a = align_events(gold, gold);
    CHECK(a.pairs.size() == 2);
    CHECK(a.unmatched_gold.empty());
    CHECK(a.unmatched_pred.empty());
  }

  SUBCASE("two golds overlapping one prediction produce one pair") {
    std::vector<Event> two_gold = {
        make_event(EventType::Tobacco, Span{0, 8}, Subtype::None, Span{30, 33}),
        make_event(EventType::Tobacco, Span{6, 14}, Subtype::Past, Span{34, 37})};
    std::vector<Event> pred = {
        make_event(EventType::Tobacco, Span{5, 9}, Subtype::None, Span{30, 33})};
    Alignment a = align_events(two_gold, pred);
    CHECK(a.pairs.size() == 1);
    CHECK(a.unmatched_gold.size() == 1);
    auto oracle = sdoh::testing::brute_force_score(two_gold, pred);
    CHECK(oracle.max_pairs == 1);
  }

  SUBCASE("maximal overlap wins, ties go to the earliest start") {
    std::vector<Event> one_gold = {
        make_event(EventType::Drug, Span{10, 20}, Subtype::Current, Span{0, 3})};
    std::vector<Event> preds = {
        make_event(EventType::Drug, Span{18, 30}, Subtype::Current, Span{0, 3}),
        make_event(EventType::Drug, Span{12, 19}, Subtype::Past, Span{4, 7})};
    Alignment a = align_events(one_gold, preds);
    REQUIRE(a.pairs.size() == 1);
    CHECK(a.pairs[0].second == 1);  // overlap 7 beats overlap 2
  }
}

TEST_CASE("score_documents: the worked substance fixture") {
  AnnotationSet gold;
  gold.document_id = "doc";
  gold.events = {
      make_event(EventType::Tobacco, Span{20, 27}, Subtype::Past, Span{0, 3},
                 {{SpanOnlyArg::Amount, Span{30, 35}}}),
      make_event(EventType::Alcohol, Span{0, 4}, Subtype::None, Span{5, 9})};
  AnnotationSet pred;
  pred.document_id = "doc";
  pred.events = {
      make_event(EventType::Tobacco, Span{22, 29}, Subtype::Current, Span{0, 3},
                 {{SpanOnlyArg::Amount, Span{30, 35}}}),
      make_event(EventType::Alcohol, Span{0, 4}, Subtype::None, Span{5, 9}),
      make_event(EventType::Drug, Span{40, 44}, Subtype::Null, Span{})};

  MatchCounts counts = score_documents({gold}, {pred});

  Counts triggers;
  for (EventType t : kEventTypes) {
    auto it = counts.by_key.find(PhenomKey::trigger(t));
    if (it != counts.by_key.end()) triggers += it->second;
  }
  CHECK(triggers.tp == 2);
  CHECK(triggers.fp == 1);
  CHECK(triggers.fn == 0);

  Counts status_time;
  for (const auto& [key, c] : counts.by_key) {
    if (key.kind == PhenomKind::Labeled && key.labeled == LabeledArg::StatusTime) {
      status_time += c;
    }
  }
  CHECK(status_time.tp == 1);
  CHECK(status_time.fp == 1);
  CHECK(status_time.fn == 1);

  Counts amount = counts.by_key.at(
      PhenomKey::span_only_arg(EventType::Tobacco, SpanOnlyArg::Amount));
  CHECK(amount.tp == 1);
  CHECK(amount.fp == 0);
  CHECK(amount.fn == 0);

  Counts overall = counts.overall();
  CHECK(overall.tp == 4);
  CHECK(overall.fp == 2);
  CHECK(overall.fn == 1);
  Metric m = metric_from(overall);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(m.recall == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(m.f1 == doctest::Approx(0.72727).epsilon(1e-4));

  auto oracle = sdoh::testing::brute_force_score(gold.events, pred.events);
  CHECK(oracle.counts == counts);
}

TEST_CASE("score_documents: identity gives perfect scores") {
  LabelInventory inv;
  std::vector<AnnotationSet> docs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed * 7 + 1, inv);
    AnnotationSet anns;
    anns.document_id = "d" + std::to_string(seed);
    anns.events = fx.gold;
    docs.push_back(anns);
  }
  MatchCounts counts = score_documents(docs, docs);
  for (const auto& [key, c] : counts.by_key) {
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
  }
  Metric m = metric_from(counts.overall());
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("score_documents: empty predictions and degenerate metrics") {
  AnnotationSet gold;
  gold.document_id = "d";
  gold.events = {make_event(EventType::Drug, Span{0, 4}, Subtype::None, Span{5, 9})};
  AnnotationSet pred;
  pred.document_id = "d";
  MatchCounts counts = score_documents({gold}, {pred});
  Metric m = metric_from(counts.overall());
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK_FALSE(m.empty);

  Metric empty = metric_from(Counts{});
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
  CHECK(empty.f1 == 1.0);
  CHECK(empty.empty);

  Metric simple = metric_from(Counts{2, 1, 1});
  CHECK(simple.precision == doctest::Approx(2.0 / 3.0));
  CHECK(simple.recall == doctest::Approx(2.0 / 3.0));
  CHECK(simple.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("score_documents: mismatched document ids are an error") {
  AnnotationSet a;
  a.document_id = "a";
  AnnotationSet b;
  b.document_id = "b";
  CHECK_THROWS_WITH_AS(score_documents({a}, {b}),
                       doctest::Contains("unknown document id"),
                       std::invalid_argument);
  CHECK_THROWS_AS(score_documents({a}, {}), std::invalid_argument);
}

TEST_CASE("property: greedy alignment equals the brute-force oracle") {
  LabelInventory inv;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed, inv);
    AnnotationSet gold, pred;
    gold.document_id = pred.document_id = "d";
    gold.events = fx.gold;
    pred.events = fx.pred;

    auto oracle = sdoh::testing::brute_force_score(fx.gold, fx.pred);
    Alignment greedy = align_events(fx.gold, fx.pred);
    REQUIRE(static_cast<int>(greedy.pairs.size()) == oracle.max_pairs);
    MatchCounts counts = score_document(gold, pred);
    CHECK(counts == oracle.counts);
  }
}

TEST_CASE("property: swapping gold and pred swaps fp and fn") {
  LabelInventory inv;
  FixtureOptions strict;
  strict.allow_double_pred = false;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed * 13 + 5, inv, strict);
    AnnotationSet gold, pred;
    gold.document_id = pred.document_id = "d";
    gold.events = fx.gold;
    pred.events = fx.pred;
    MatchCounts forward = score_document(gold, pred);
    MatchCounts backward = score_document(pred, gold);
    for (const auto& [key, c] : forward.by_key) {
      const Counts& swapped = backward.by_key.at(key);
      CHECK(c.tp == swapped.tp);
      CHECK(c.fp == swapped.fn);
      CHECK(c.fn == swapped.fp);
    }
    Metric mf = metric_from(forward.overall());
    Metric mb = metric_from(backward.overall());
    CHECK(mf.precision == doctest::Approx(mb.recall).epsilon(1e-12));
    CHECK(mf.recall == doctest::Approx(mb.precision).epsilon(1e-12));
  }
}

TEST_CASE("property: an extra unmatched prediction only adds fp") {
  LabelInventory inv;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed * 3 + 2, inv);
    AnnotationSet gold, pred;
    gold.document_id = pred.document_id = "d";
    gold.events = fx.gold;
    pred.events = fx.pred;
    MatchCounts before = score_document(gold, pred);

    // Spurious event far beyond every existing zone.
    Rng rng(seed);
    pred.events.push_back(sdoh::testing::random_event(rng, 4000, inv));
    MatchCounts after = score_document(gold, pred);

    Counts b = before.overall(), a = after.overall();
    CHECK(a.tp == b.tp);
    CHECK(a.fn == b.fn);
    CHECK(a.fp > b.fp);
  }
}

TEST_CASE("property: f1 is consistent with the counts") {
  LabelInventory inv;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed * 11 + 3, inv);
    AnnotationSet gold, pred;
    gold.document_id = pred.document_id = "d";
    gold.events = fx.gold;
    pred.events = fx.pred;
    ScoreReport report = make_report(score_document(gold, pred));
    for (const ReportRow& row : report.rows) {
      const Metric& m = row.metric;
      if (!m.empty && m.precision + m.recall > 0) {
        CHECK(std::abs(m.f1 - 2 * m.precision * m.recall /
                                  (m.precision + m.recall)) < 1e-12);
      }
      CHECK(row.gold_count == row.counts.tp + row.counts.fn);
    }
  }
}

TEST_CASE("report: json and table forms mention every phenomenon") {
  AnnotationSet gold;
  gold.document_id = "d";
  gold.events = {make_event(EventType::Tobacco, Span{0, 7}, Subtype::Past, Span{8, 12})};
  AnnotationSet pred = gold;
  ScoreReport report = make_report(score_documents({gold}, {pred}));
  const std::string json_text = report_to_json(report);
  CHECK(json_text.find("trigger/Tobacco") != std::string::npos);
  CHECK(json_text.find("labeled/Tobacco/StatusTime/past") != std::string::npos);
  CHECK(json_text.find("\"overall\"") != std::string::npos);
  const std::string table = report_table(report);
  CHECK(table.find("overall (micro)") != std::string::npos);
  CHECK(table.find("StatusTime/past") != std::string::npos);
  REQUIRE_FALSE(report.subtype_breakdown.empty());
  CHECK(report.subtype_breakdown[0].gold_count == 1);

  const std::string debug = alignment_debug_json({gold}, {pred});
  CHECK(debug.find("\"matched\"") != std::string::npos);
}

TEST_CASE("parallel and serial scoring agree") {
  LabelInventory inv;
  std::vector<AnnotationSet> gold, pred;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto fx = sdoh::testing::random_fixture(seed + 400, inv);
    AnnotationSet g, p;
    g.document_id = p.document_id = "d" + std::to_string(seed);
    g.events = fx.gold;
    p.events = fx.pred;
    gold.push_back(g);
    pred.push_back(p);
  }
  CHECK(score_documents(gold, pred, 0) == score_documents_serial(gold, pred));
}
