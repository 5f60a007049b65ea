#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <map>
#include <set>

#include "sdoh/corpus_io.hpp"
#include "sdoh/csv.hpp"
#include "sdoh/rng.hpp"

using namespace sdoh;

TEST_CASE("extract_social_history: header then all-caps terminator") {
  const std::string text =
      "HPI: doing well.\nSOCIAL HISTORY:\nTobacco: denies\nMEDICATIONS:\nnone\n";
  auto section = extract_social_history(text);
  REQUIRE(section.has_value());
  CHECK(section->first == "Tobacco: denies");
  CHECK(text.substr(static_cast<std::size_t>(section->second),
                    section->first.size()) == section->first);
}

TEST_CASE("extract_social_history: absent header") {
  CHECK_FALSE(extract_social_history("ASSESSMENT: stable course.\n").has_value());
}

TEST_CASE("extract_social_history: case-insensitive, same-line content, EOF") {
  const std::string text = "note start\nsocial history: lives alone";
  auto section = extract_social_history(text);
  REQUIRE(section.has_value());
  CHECK(section->first == "lives alone");
  CHECK(text.substr(static_cast<std::size_t>(section->second),
                    section->first.size()) == "lives alone");
}

TEST_CASE("extract_social_history: alternate headers and substring property") {
  auto shx = extract_social_history("SHX: smoker\nEXAM: clear\n");
  REQUIRE(shx.has_value());
  CHECK(shx->first == "smoker");

  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    std::string text = "A: b\n";
    if (rng.next_below(2)) text += "Social Hx: uses marijuana daily\n";
    text += "PLAN: rest\n";
    auto section = extract_social_history(text);
    if (section) {
      CHECK(text.substr(static_cast<std::size_t>(section->second),
                        section->first.size()) == section->first);
    }
  }
}

TEST_CASE("tokenize: punctuation detached") {
  auto doc = tokenize("Tobacco: denies");
  REQUIRE(doc.tokens.size() == 3);
  CHECK(doc.tokens[0].text == "Tobacco");
  CHECK(doc.tokens[0].span == Span{0, 7});
  CHECK(doc.tokens[1].text == ":");
  CHECK(doc.tokens[1].span == Span{7, 8});
  CHECK(doc.tokens[2].text == "denies");
  CHECK(doc.tokens[2].span == Span{9, 15});
  REQUIRE(doc.sentences.size() == 1);
}

TEST_CASE("tokenize: empty input") {
  auto doc = tokenize("");
  CHECK(doc.tokens.empty());
  CHECK(doc.sentences.empty());
}

TEST_CASE("tokenize: hand-segmented sentence") {
  auto doc = tokenize("quit 2yrs ago.");
  REQUIRE(doc.tokens.size() == 4);
  CHECK(doc.tokens[0].text == "quit");
  CHECK(doc.tokens[1].text == "2yrs");
  CHECK(doc.tokens[2].text == "ago");
  CHECK(doc.tokens[3].text == ".");
  CHECK(doc.tokens[3].span == Span{13, 14});
  REQUIRE(doc.sentences.size() == 1);
  CHECK(doc.sentences[0] == std::pair<int, int>{0, 4});
}

TEST_CASE("tokenize: sentence splits on period, semicolon, newline") {
  auto doc = tokenize("smokes; drinks wine.\nlives alone");
  REQUIRE(doc.sentences.size() == 3);
  CHECK(doc.sentence_length(0) == 2);  // smokes ;
  CHECK(doc.sentence_length(1) == 3);  // drinks wine .
  CHECK(doc.sentence_length(2) == 2);  // lives alone
}

TEST_CASE("tokenize: decimals and abbreviations stay attached") {
  auto doc = tokenize("drinks 2.5 beers vs. last yr");
  REQUIRE(doc.tokens.size() == 6);
  CHECK(doc.tokens[1].text == "2.5");
  CHECK(doc.tokens[3].text == "vs.");
  CHECK(doc.sentences.size() == 1);
}

TEST_CASE("tokenize: spans cover every non-whitespace character") {
  Rng rng(1234);
  const std::string alphabet = "ab c.;\nx2 ";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::uint64_t len = rng.next_below(40);
    for (std::uint64_t i = 0; i < len; ++i) {
      text += alphabet[rng.next_below(alphabet.size())];
    }
    auto doc = tokenize(text);
    std::vector<bool> covered(text.size(), false);
    int prev_end = 0;
    for (const Token& t : doc.tokens) {
      CHECK(t.span.start >= prev_end);  // sorted, non-overlapping
      prev_end = t.span.end;
      CHECK(t.text == text.substr(static_cast<std::size_t>(t.span.start),
                                  static_cast<std::size_t>(t.span.length())));
      for (int i = t.span.start; i < t.span.end; ++i) {
        covered[static_cast<std::size_t>(i)] = true;
      }
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
      CHECK(covered[i] == !std::isspace(static_cast<unsigned char>(text[i])));
    }
    int token_count = 0;
    for (const auto& [begin, end] : doc.sentences) {
      CHECK(begin < end);
      token_count += end - begin;
    }
    CHECK(token_count == static_cast<int>(doc.tokens.size()));
  }
}

// ---------------------------------------------------------------------------
// Standoff format
// ---------------------------------------------------------------------------

TEST_CASE("parse_standoff: assembles a tobacco event") {
  LabelInventory inv;
  const std::string text = "smoking: denies";
  const std::string ann =
      "T1\tTobacco 0 7\tsmoking\n"
      "T2\tStatusTime 9 15\tdenies\n"
      "A1\tStatusTimeVal T2 none\n"
      "E1\tTobacco:T1 Status:T2\n";
  AnnotatedDoc ad = parse_standoff("d1", text, ann, inv);
  REQUIRE(ad.anns.events.size() == 1);
  const Event& e = ad.anns.events[0];
  CHECK(e.trigger.type == EventType::Tobacco);
  CHECK(e.trigger.span == Span{0, 7});
  REQUIRE(e.arguments.size() == 1);
  CHECK(e.arguments[0].kind == Argument::Kind::Labeled);
  CHECK(e.arguments[0].labeled_type == LabeledArg::StatusTime);
  CHECK(e.arguments[0].subtype == Subtype::None);
  CHECK(e.arguments[0].span == Span{9, 15});
  CHECK_FALSE(e.incomplete);
  CHECK(ad.anns.orphans.empty());
  CHECK(validate_event(e, inv).empty());
}

TEST_CASE("parse_standoff: span out of range") {
  LabelInventory inv;
  const std::string text = "short text, no header";
  CHECK_THROWS_WITH_AS(parse_standoff("d1", text, "T1\tTobacco 0 99\tsmoking\n", inv),
                       doctest::Contains("span out of range: line 1"),
                       StandoffError);
}

TEST_CASE("parse_standoff: empty annotation content") {
  LabelInventory inv;
  AnnotatedDoc ad = parse_standoff("d1", "some text", "", inv);
  CHECK(ad.anns.events.empty());
  CHECK(ad.anns.orphans.empty());
}

TEST_CASE("parse_standoff: errors carry line numbers and tokens") {
  LabelInventory inv;
  const std::string text = "smoking: denies";
  CHECK_THROWS_WITH_AS(
      parse_standoff("d", text, "T1\tSmokes 0 7\tsmoking\n", inv),
      doctest::Contains("unknown type name 'Smokes': line 1"), StandoffError);
  CHECK_THROWS_WITH_AS(parse_standoff("d", text, "T1\tTobacco 0 7\n", inv),
                       doctest::Contains("malformed T line: line 1"),
                       StandoffError);
  CHECK_THROWS_WITH_AS(
      parse_standoff("d", text, "T1\tTobacco 0 7\tsmokes\n", inv),
      doctest::Contains("span text mismatch: line 1"), StandoffError);
  CHECK_THROWS_WITH_AS(
      parse_standoff("d", text,
                     "T1\tTobacco 0 7\tsmoking\nE1\tTobacco:T1 Status:T9\n", inv),
      doctest::Contains("unknown T9: line 2"), StandoffError);
  CHECK_THROWS_WITH_AS(
      parse_standoff("d", text,
                     "T1\tStatusTime 9 15\tdenies\nA1\tStatusTimeVal T1 bogus\n",
                     inv),
      doctest::Contains("unknown subtype value 'bogus': line 2"), StandoffError);
  // Method is parseable; the inventory flag only drives validation.
  const std::string method_text = "IV use";
  AnnotatedDoc ad =
      parse_standoff("d", method_text, "T1\tMethod 0 2\tIV\n", inv);
  REQUIRE(ad.anns.orphans.size() == 1);
  CHECK(ad.anns.orphans[0].type == "Method");
}

TEST_CASE("parse_standoff: labeled argument without attribute is an error") {
  LabelInventory inv;
  const std::string text = "smoking: denies";
  const std::string ann =
      "T1\tTobacco 0 7\tsmoking\n"
      "T2\tStatusTime 9 15\tdenies\n"
      "E1\tTobacco:T1 Status:T2\n";
  CHECK_THROWS_WITH_AS(parse_standoff("d1", text, ann, inv),
                       doctest::Contains("has no attribute"), StandoffError);
}

TEST_CASE("parse_standoff: event missing required argument is incomplete") {
  LabelInventory inv;
  const std::string text = "smoking: denies";
  const std::string ann =
      "T1\tTobacco 0 7\tsmoking\n"
      "E1\tTobacco:T1\n";
  AnnotatedDoc ad = parse_standoff("d1", text, ann, inv);
  REQUIRE(ad.anns.events.size() == 1);
  CHECK(ad.anns.events[0].incomplete);
}

TEST_CASE("serialize_standoff: empty set and small round trip") {
  LabelInventory inv;
  Document doc;
  doc.section_text = "smoking: denies";
  CHECK(serialize_standoff(doc, AnnotationSet{}) == "");

  AnnotatedDoc ad = parse_standoff(
      "d1", "smoking: denies",
      "T1\tTobacco 0 7\tsmoking\nT2\tStatusTime 9 15\tdenies\n"
      "A1\tStatusTimeVal T2 none\nE1\tTobacco:T1 Status:T2\n",
      inv);
  const std::string out = serialize_standoff(ad.doc, ad.anns);
  CHECK(out ==
        "T1\tTobacco 0 7\tsmoking\n"
        "T2\tStatusTime 9 15\tdenies\n"
        "A1\tStatusTimeVal T2 none\n"
        "E1\tTobacco:T1 Status:T2\n");
}

TEST_CASE("serialize_standoff: two events in document order, shared span") {
  LabelInventory inv;
  Document doc;
  doc.id = "d";
  doc.section_text = "drinks wine and smokes now";
  AnnotationSet anns;
  anns.document_id = "d";
  Event smoke;
  smoke.trigger = Trigger{EventType::Tobacco, Span{16, 22}};
  smoke.arguments.push_back(
      Argument::labeled(LabeledArg::StatusTime, Subtype::Current, Span{23, 26}));
  Event drink;
  drink.trigger = Trigger{EventType::Alcohol, Span{0, 6}};
  drink.arguments.push_back(
      Argument::labeled(LabeledArg::StatusTime, Subtype::Current, Span{23, 26}));
  drink.arguments.push_back(Argument::span_only(SpanOnlyArg::Type, Span{7, 11}));
  anns.events = {smoke, drink};  // deliberately unsorted

  const std::string out = serialize_standoff(doc, anns);
  // E1 is the earlier trigger; the shared "now" span appears once.
  CHECK(out.find("E1\tAlcohol:") != std::string::npos);
  CHECK(out.find("E2\tTobacco:") != std::string::npos);
  AnnotatedDoc back = parse_standoff("d", doc.section_text, out, inv);
  CHECK(canonical(back.anns) == canonical(anns));
}

TEST_CASE("standoff round-trip on generated corpora") {
  LabelInventory inv;
  SynthGrammar grammar = default_grammar();
  CorpusPartition part = generate_corpus(grammar, 40, 11, "train");
  for (const AnnotatedDoc& ad : part.docs) {
    for (const Event& e : ad.anns.events) {
      CHECK(validate_event(e, inv).empty());
    }
    const std::string ann = serialize_standoff(ad.doc, ad.anns);
    AnnotatedDoc back = parse_standoff(ad.doc.id, ad.doc.full_text, ann, inv);
    CHECK(back.doc.section_text == ad.doc.section_text);
    CHECK(back.doc.section_offset == ad.doc.section_offset);
    CHECK(canonical(back.anns) == canonical(ad.anns));
  }
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

TEST_CASE("generate_corpus: zero documents") {
  CHECK(generate_corpus(default_grammar(), 0, 1).docs.empty());
}

TEST_CASE("generate_corpus: deterministic for a fixed seed") {
  SynthGrammar grammar = default_grammar();
  CorpusPartition a = generate_corpus(grammar, 3, 7);
  CorpusPartition b = generate_corpus(grammar, 3, 7);
  REQUIRE(a.docs.size() == b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    CHECK(a.docs[i].doc.full_text == b.docs[i].doc.full_text);
    CHECK(a.docs[i].doc.timestamp == b.docs[i].doc.timestamp);
    CHECK(a.docs[i].anns == b.docs[i].anns);
  }
  CorpusPartition c = generate_corpus(grammar, 3, 8);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    if (a.docs[i].doc.full_text != c.docs[i].doc.full_text) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("generate_corpus: single-template contract") {
  SynthGrammar g;
  g.event_type_weights = {0, 0, 1, 0, 0};
  EventTemplate tmpl;
  tmpl.weight = 1;
  TemplatePart trig;
  trig.kind = TemplatePart::Kind::Trigger;
  trig.phrases = {"Tobacco"};
  TemplatePart colon;
  colon.kind = TemplatePart::Kind::Text;
  colon.phrases = {":"};
  TemplatePart status;
  status.kind = TemplatePart::Kind::Labeled;
  status.labeled_type = LabeledArg::StatusTime;
  status.subtype = Subtype::None;
  status.phrases = {"denies"};
  tmpl.parts = {trig, colon, status};
  g.templates[static_cast<std::size_t>(EventType::Tobacco)].push_back(tmpl);
  g.min_sentences = 1;
  g.max_sentences = 1;

  CorpusPartition part = generate_corpus(g, 5, 3);
  for (const AnnotatedDoc& ad : part.docs) {
    CHECK(ad.doc.section_text == "Tobacco : denies");
    REQUIRE(ad.anns.events.size() == 1);
    const Event& e = ad.anns.events[0];
    CHECK(e.trigger.type == EventType::Tobacco);
    CHECK(e.trigger.span == Span{0, 7});
    REQUIRE(e.arguments.size() == 1);
    CHECK(e.arguments[0].subtype == Subtype::None);
    CHECK(e.arguments[0].span == Span{10, 16});
  }
}

TEST_CASE("generate_corpus: empty grammar is an error") {
  SynthGrammar g;
  CHECK_THROWS_AS(generate_corpus(g, 1, 1), std::invalid_argument);
}

TEST_CASE("generate_corpus: subtype marginals track grammar weights") {
  SynthGrammar grammar = default_grammar();
  CorpusPartition part = generate_corpus(grammar, 1500, 42);

  // Expected P(event type, subtype) from the grammar weights.
  std::map<std::pair<EventType, Subtype>, double> expected;
  double type_total = 0;
  for (EventType t : kEventTypes) {
    type_total += grammar.event_type_weights[static_cast<std::size_t>(t)];
  }
  for (EventType t : kEventTypes) {
    const auto& templates = grammar.templates[static_cast<std::size_t>(t)];
    double tmpl_total = 0;
    for (const auto& tmpl : templates) tmpl_total += tmpl.weight;
    for (const auto& tmpl : templates) {
      for (const TemplatePart& p : tmpl.parts) {
        if (p.kind == TemplatePart::Kind::Labeled) {
          expected[{t, p.subtype}] +=
              (grammar.event_type_weights[static_cast<std::size_t>(t)] / type_total) *
              (tmpl.weight / tmpl_total);
        }
      }
    }
  }

  std::map<std::pair<EventType, Subtype>, double> observed;
  long total_events = 0;
  for (const AnnotatedDoc& ad : part.docs) {
    for (const Event& e : ad.anns.events) {
      ++total_events;
      for (const Argument& a : e.arguments) {
        if (a.kind == Argument::Kind::Labeled) {
          observed[{e.trigger.type, a.subtype}] += 1;
        }
      }
    }
  }
  for (auto& [key, count] : observed) count /= static_cast<double>(total_events);
  for (const auto& [key, want] : expected) {
    CHECK(std::abs(observed[key] - want) < 0.05);
  }
}

// ---------------------------------------------------------------------------
// Corpus directory and filters
// ---------------------------------------------------------------------------

TEST_CASE("write_corpus / load_corpus round trip with manifest") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "sdoh_corpus_test").string();
  fs::remove_all(dir);

  LabelInventory inv;
  Corpus corpus;
  corpus.push_back(generate_corpus(default_grammar(), 6, 5, "train"));
  corpus.push_back(generate_corpus(default_grammar(), 3, 6, "dev"));
  write_corpus(dir, corpus);

  Corpus loaded = load_corpus(dir, inv);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "train");
  CHECK(loaded[1].name == "dev");
  REQUIRE(loaded[0].docs.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const AnnotatedDoc& a = corpus[0].docs[i];
    const AnnotatedDoc& b = loaded[0].docs[i];
    CHECK(a.doc.id == b.doc.id);
    CHECK(a.doc.patient_id == b.doc.patient_id);
    CHECK(a.doc.timestamp == b.doc.timestamp);
    CHECK(a.doc.note_type == b.doc.note_type);
    CHECK(canonical(a.anns) == canonical(b.anns));
  }
  fs::remove_all(dir);
}

TEST_CASE("timestamp parsing") {
  CHECK(timestamp_key("2021-03-04") == 20210304000000LL);
  CHECK(timestamp_key("2021-03-04T10:30:00") == 20210304103000LL);
  CHECK(timestamp_key("2021-03-04 10:30") == 20210304103000LL);
  CHECK(timestamp_year("2021-12-31") == 2021);
  CHECK_THROWS_AS(timestamp_key("03/04/2021"), std::invalid_argument);
  CHECK_THROWS_AS(timestamp_key("2021-13-01"), std::invalid_argument);
  CHECK_THROWS_AS(timestamp_key(""), std::invalid_argument);
}

TEST_CASE("filter_latest_social_history keeps one record per patient") {
  CorpusPartition part;
  part.name = "train";
  auto make = [](const std::string& id, const std::string& patient,
                 const std::string& ts, NoteType type) {
    AnnotatedDoc ad;
    ad.doc.id = id;
    ad.doc.patient_id = patient;
    ad.doc.timestamp = ts;
    ad.doc.note_type = type;
    return ad;
  };
  part.docs.push_back(make("d1", "p1", "2021-01-01", NoteType::SocialHistory));
  part.docs.push_back(make("d2", "p1", "2021-06-01", NoteType::SocialHistory));
  part.docs.push_back(make("d3", "p1", "2021-03-01", NoteType::Progress));
  part.docs.push_back(make("d4", "p2", "2021-02-01", NoteType::SocialHistory));

  CorpusPartition filtered = filter_latest_social_history(part);
  std::set<std::string> kept;
  for (const auto& ad : filtered.docs) kept.insert(ad.doc.id);
  CHECK(kept == std::set<std::string>{"d2", "d3", "d4"});
}

TEST_CASE("grammar json round trip") {
  SynthGrammar grammar = default_grammar();
  const std::string json_text = grammar_to_json(grammar);
  SynthGrammar parsed = parse_grammar_json(json_text);
  CorpusPartition a = generate_corpus(grammar, 4, 9);
  CorpusPartition b = generate_corpus(parsed, 4, 9);
  REQUIRE(a.docs.size() == b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    CHECK(a.docs[i].doc.full_text == b.docs[i].doc.full_text);
    CHECK(a.docs[i].anns == b.docs[i].anns);
  }
}

TEST_CASE("csv quoting") {
  auto fields = csv_split("a,\"b,c\",\"d\"\"e\"");
  REQUIRE(fields.size() == 3);
  CHECK(fields[1] == "b,c");
  CHECK(fields[2] == "d\"e");
  CHECK(csv_join({"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"");
}
