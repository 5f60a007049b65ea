// Command-line entry point wiring the toolkit into reproducible pipelines:
// synth -> train -> predict -> score -> note-labels / note-metrics -> compare
// -> report. Every subcommand is deterministic given its flags and seed, and
// all artifacts land under --output-dir.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdoh/assembly.hpp"
#include "sdoh/casestudy.hpp"
#include "sdoh/corpus_io.hpp"
#include "sdoh/csv.hpp"
#include "sdoh/log.hpp"
#include "sdoh/model.hpp"
#include "sdoh/notelevel.hpp"
#include "sdoh/rng.hpp"
#include "sdoh/scorer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sdoh;

namespace {

constexpr const char* kVersion =
    "sdoh_eventkit 1.0.0 (checkpoint format 1, standoff T/A/E format 1)";

struct Options {
  std::string config_path;
  std::string corpus_dir;
  std::string output_dir = "out";
  std::string partition = "train";
  std::string grammar_path;
  std::string checkpoint_path;
  std::string embeddings_path;
  std::string gold_dir;
  std::string pred_dir;
  std::string events_path;
  std::string structured_dir;
  std::string mapping_path;
  std::string lexicon_path;
  std::string gold_csv;
  std::string pred_csv;
  int docs = 100;
  int dev_docs = 0;
  int test_docs = 0;
  int year = 2021;
  int threads = 0;
  bool include_method = false;
  bool latest_social_only = false;
  std::uint64_t seed = 7;
  std::vector<std::string> section_headers;
  ModelConfig model;
  std::string encoder = "toy";
  std::string relation_policy = "entity_or_subtype";
};

/// Registered option with its config-file key, so that --config can fill in
/// anything the command line left unset (flags win).
struct ConfigBinding {
  CLI::Option* option = nullptr;
  std::function<void(const json&)> apply;
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<ConfigBinding> bindings;
  std::map<std::string, std::string> keys;  // option name -> config key
};

template <typename T>
void bind(Command& cmd, CLI::Option* opt, const std::string& key, T& target) {
  cmd.bindings.push_back(
      {opt, [&target, key](const json& cfg) { target = cfg.at(key).get<T>(); }});
  cmd.keys[opt->get_name()] = key;
}

void apply_config_file(Command& cmd, const std::string& path) {
  if (path.empty()) return;
  json cfg = json::parse(read_file(path));
  for (ConfigBinding& binding : cmd.bindings) {
    if (binding.option->count() > 0) continue;  // explicit flags win
    try {
      binding.apply(cfg);
    } catch (const json::out_of_range&) {
      // key absent: keep the built-in default
    }
  }
}

void write_text(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  write_file(path, content);
  if (log_level() >= 1) log_line("wrote " + path);
}

const CorpusPartition& find_partition(const Corpus& corpus,
                                      const std::string& name) {
  for (const CorpusPartition& part : corpus) {
    if (part.name == name) return part;
  }
  throw std::runtime_error("no partition named '" + name + "' in corpus");
}

const std::vector<std::string>& headers_of(const Options& opt) {
  return opt.section_headers.empty() ? default_section_headers()
                                     : opt.section_headers;
}

EmbeddingFile load_side_if(const std::string& path) {
  EmbeddingFile side;
  if (!path.empty()) side = load_embeddings(path);
  return side;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_validate(const Options& opt) {
  LabelInventory inv(opt.include_method);
  Corpus corpus = load_corpus(opt.corpus_dir, inv, headers_of(opt));
  long violations = 0;
  for (const CorpusPartition& part : corpus) {
    for (const AnnotatedDoc& ad : part.docs) {
      for (const Event& e : ad.anns.events) {
        for (const std::string& message : validate_event(e, inv)) {
          if (message.find("missing required labeled argument") !=
                  std::string::npos &&
              e.incomplete) {
            continue;  // flagged, not a violation
          }
          std::cout << ad.doc.id << ": " << message << "\n";
          ++violations;
        }
      }
    }
  }
  std::cout << (violations == 0 ? "corpus is valid\n"
                                : std::to_string(violations) + " violation(s)\n");
  return violations == 0 ? 0 : 1;
}

int run_synth(const Options& opt) {
  SynthGrammar grammar =
      opt.grammar_path.empty() ? default_grammar() : load_grammar(opt.grammar_path);
  Corpus corpus;
  corpus.push_back(generate_corpus(grammar, opt.docs, opt.seed, opt.partition));
  if (opt.dev_docs > 0) {
    corpus.push_back(
        generate_corpus(grammar, opt.dev_docs, Rng::mix(opt.seed, 0xDE5), "dev"));
  }
  if (opt.test_docs > 0) {
    corpus.push_back(
        generate_corpus(grammar, opt.test_docs, Rng::mix(opt.seed, 0x7E57), "test"));
  }
  fs::create_directories(opt.output_dir);
  write_corpus(opt.output_dir, corpus);
  write_text(opt.output_dir + "/grammar.json", grammar_to_json(grammar));
  long total = 0;
  for (const auto& part : corpus) total += static_cast<long>(part.docs.size());
  std::cout << "wrote " << total << " documents to " << opt.output_dir << "\n";
  return 0;
}

ModelConfig resolve_model_config(const Options& opt) {
  ModelConfig cfg = opt.model;
  cfg.seed = opt.seed;
  auto encoder = parse_encoder_kind(opt.encoder);
  if (!encoder) throw std::runtime_error("unknown encoder '" + opt.encoder + "'");
  cfg.encoder = *encoder;
  auto policy = parse_relation_policy(opt.relation_policy);
  if (!policy) {
    throw std::runtime_error("unknown relation policy '" + opt.relation_policy + "'");
  }
  cfg.relation_candidate_policy = *policy;
  return cfg;
}

int run_train(const Options& opt) {
  LabelInventory inv(opt.include_method);
  ModelConfig cfg = resolve_model_config(opt);
  Corpus corpus = load_corpus(opt.corpus_dir, inv, headers_of(opt));
  const CorpusPartition& part = find_partition(corpus, opt.partition);
  EmbeddingFile side = load_side_if(opt.embeddings_path);
  TrainResult result =
      train(part, cfg, inv, side.empty() ? nullptr : &side, opt.threads);

  fs::create_directories(opt.output_dir);
  const std::string ckpt = opt.output_dir + "/checkpoint.bin";
  save_checkpoint(result.params, ckpt);
  std::string loss_log = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
    loss_log += std::to_string(e) + "," + std::to_string(result.epoch_mean_loss[e]) + "\n";
  }
  write_text(opt.output_dir + "/loss_log.csv", loss_log);
  std::cout << "trained " << cfg.epochs << " epochs on " << part.docs.size()
            << " documents; checkpoint at " << ckpt << "\n";
  return 0;
}

int run_predict(const Options& opt) {
  ModelParams params = load_checkpoint(opt.checkpoint_path);
  LabelInventory inv = params.inventory();
  Corpus corpus = load_corpus(opt.corpus_dir, inv, headers_of(opt));
  const CorpusPartition& part = find_partition(corpus, opt.partition);
  EmbeddingFile side = load_side_if(opt.embeddings_path);
  std::vector<AnnotationSet> preds =
      predict_corpus(part, params, side.empty() ? nullptr : &side, opt.threads);

  const std::string pred_dir = opt.output_dir + "/pred";
  fs::create_directories(pred_dir);
  std::vector<const Document*> docs;
  for (std::size_t i = 0; i < part.docs.size(); ++i) {
    const Document& doc = part.docs[i].doc;
    docs.push_back(&doc);
    write_file(pred_dir + "/" + doc.id + ".ann", serialize_standoff(doc, preds[i]));
  }
  write_text(opt.output_dir + "/events.json", events_to_json(docs, preds));
  std::cout << "predicted " << preds.size() << " documents into " << pred_dir
            << "\n";
  return 0;
}

int run_score(const Options& opt) {
  LabelInventory inv(opt.include_method);
  Corpus corpus = load_corpus(opt.gold_dir, inv, headers_of(opt));
  const CorpusPartition& part = find_partition(corpus, opt.partition);
  std::vector<AnnotationSet> gold, pred;
  for (const AnnotatedDoc& ad : part.docs) {
    gold.push_back(ad.anns);
    const std::string ann_path = opt.pred_dir + "/" + ad.doc.id + ".ann";
    AnnotatedDoc pd = parse_standoff(ad.doc.id, ad.doc.full_text,
                                     read_file(ann_path), inv, headers_of(opt));
    pred.push_back(pd.anns);
  }
  MatchCounts counts = score_documents(gold, pred, opt.threads);
  ScoreReport report = make_report(counts);
  fs::create_directories(opt.output_dir);
  write_text(opt.output_dir + "/score_report.json", report_to_json(report));
  write_text(opt.output_dir + "/score_report.txt", report_table(report));
  write_text(opt.output_dir + "/aligned_pairs.json",
             alignment_debug_json(gold, pred));
  std::cout << report_table(report);
  return 0;
}

std::vector<AnnotationSet> events_for_corpus(const Options& opt,
                                             const CorpusPartition& part) {
  if (opt.events_path.empty()) {
    std::vector<AnnotationSet> gold;
    for (const AnnotatedDoc& ad : part.docs) gold.push_back(ad.anns);
    return gold;
  }
  std::vector<AnnotationSet> events = events_from_json(read_file(opt.events_path));
  std::map<std::string, const AnnotationSet*> by_id;
  for (const AnnotationSet& anns : events) by_id[anns.document_id] = &anns;
  std::vector<AnnotationSet> aligned;
  for (const AnnotatedDoc& ad : part.docs) {
    auto it = by_id.find(ad.doc.id);
    if (it == by_id.end()) {
      throw std::runtime_error("events file has no entry for document " +
                               ad.doc.id);
    }
    aligned.push_back(*it->second);
  }
  return aligned;
}

int run_note_labels(const Options& opt) {
  LabelInventory inv(opt.include_method);
  Corpus corpus = load_corpus(opt.corpus_dir, inv, headers_of(opt));
  const CorpusPartition& part = find_partition(corpus, opt.partition);
  std::vector<AnnotationSet> events = events_for_corpus(opt, part);
  std::vector<std::pair<std::string, NoteLabelSet>> rows;
  for (std::size_t i = 0; i < part.docs.size(); ++i) {
    rows.emplace_back(part.docs[i].doc.id, events_to_note_labels(events[i].events));
  }
  fs::create_directories(opt.output_dir);
  write_text(opt.output_dir + "/note_labels.csv", note_labels_to_csv(rows));
  std::cout << "wrote note labels for " << rows.size() << " documents\n";
  return 0;
}

int run_note_metrics(const Options& opt) {
  auto gold_rows = note_labels_from_csv(read_file(opt.gold_csv));
  auto pred_rows = note_labels_from_csv(read_file(opt.pred_csv));
  std::map<std::string, NoteLabelSet> pred_by_id;
  for (const auto& [id, labels] : pred_rows) pred_by_id[id] = labels;
  std::vector<NoteLabelSet> gold, pred;
  for (const auto& [id, labels] : gold_rows) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) {
      throw std::runtime_error("prediction csv has no row for document " + id);
    }
    gold.push_back(labels);
    pred.push_back(it->second);
  }
  NoteMetrics metrics = note_metrics(gold, pred);
  fs::create_directories(opt.output_dir);
  write_text(opt.output_dir + "/note_metrics.json", note_metrics_to_json(metrics));
  for (NoteField f : kNoteFields) {
    const FieldMetrics& fm = metrics.fields[static_cast<std::size_t>(f)];
    std::printf("%-12s accuracy %.4f  P %.4f  R %.4f  F1 %.4f\n",
                std::string(to_string(f)).c_str(), fm.accuracy,
                fm.metric.precision, fm.metric.recall, fm.metric.f1);
  }
  return 0;
}

int run_compare(const Options& opt) {
  LabelInventory inv(opt.include_method);
  Corpus corpus = load_corpus(opt.corpus_dir, inv, headers_of(opt));
  CorpusPartition part = find_partition(corpus, opt.partition);
  if (opt.latest_social_only) part = filter_latest_social_history(part);
  std::vector<AnnotationSet> events = events_for_corpus(opt, part);
  std::vector<DocEvents> extracted = doc_events(part, events);

  std::vector<StructuredRecord> structured;
  if (!opt.structured_dir.empty()) {
    structured = ingest_structured(opt.structured_dir, opt.year);
  }
  auto mapping = opt.mapping_path.empty()
                     ? default_field_mapping()
                     : parse_field_mapping_json(read_file(opt.mapping_path));
  auto lexicon = opt.lexicon_path.empty()
                     ? default_lexicon()
                     : parse_lexicon_json(read_file(opt.lexicon_path));

  auto indicators = patient_indicators(structured, extracted, opt.year, mapping);
  std::set<std::string> narrative;
  for (const AnnotatedDoc& ad : part.docs) narrative.insert(ad.doc.patient_id);

  ComparisonReport comparison = compare(indicators, narrative, opt.year);
  StratifyReport strat = stratify(extracted);
  NormalizationReport norm = normalize_substances(extracted, lexicon);

  fs::create_directories(opt.output_dir);
  write_text(opt.output_dir + "/comparison.json", comparison_to_json(comparison));
  write_text(opt.output_dir + "/comparison.txt", comparison_table(comparison));
  write_text(opt.output_dir + "/stratify.json", stratify_to_json(strat));
  write_text(opt.output_dir + "/stratify.txt", stratify_table(strat));
  write_text(opt.output_dir + "/normalization.json", normalization_to_json(norm));
  write_text(opt.output_dir + "/normalization.txt", normalization_table(norm));
  std::cout << comparison_table(comparison);
  return 0;
}

int run_report(const Options& opt) {
  json summary;
  summary["toolkit"] = kVersion;
  std::vector<std::string> missing;
  auto attach = [&](const char* key, const std::string& file) {
    const std::string path = opt.output_dir + "/" + file;
    if (fs::exists(path)) {
      summary[key] = json::parse(read_file(path));
    } else {
      missing.push_back(file);
    }
  };
  attach("score", "score_report.json");
  attach("note_metrics", "note_metrics.json");
  attach("comparison", "comparison.json");
  attach("stratify", "stratify.json");
  attach("normalization", "normalization.json");
  if (fs::exists(opt.output_dir + "/loss_log.csv")) {
    auto rows = read_csv(opt.output_dir + "/loss_log.csv");
    if (rows.size() > 1) {
      summary["training"] = {{"epochs", rows.size() - 1},
                             {"final_mean_loss", std::stod(rows.back()[1])}};
    }
  }
  summary["reference_targets"] = {
      {"note", "results of the full-scale clinical study this toolkit "
               "reproduces at desk scale; context only, not asserted on "
               "synthetic corpora"},
      {"extraction_overall_f1", 0.86},
      {"note_level_f1_range", {0.77, 0.86}},
      {"notes_only_capture",
       {{"homeless", 0.32}, {"tobacco_current", 0.19}, {"drug_current", 0.10}}}};
  summary["missing_artifacts"] = missing;

  std::string text = "SDOH event extraction summary\n=============================\n";
  if (summary.contains("score")) {
    const json& overall = summary["score"]["overall"];
    text += "extraction micro P/R/F1: " + overall["precision"].dump() + " / " +
            overall["recall"].dump() + " / " + overall["f1"].dump() + "\n";
  }
  if (summary.contains("note_metrics")) {
    text += "note-level macro F1: " + summary["note_metrics"]["macro"]["f1"].dump() + "\n";
  }
  if (summary.contains("comparison")) {
    text += "comparison year: " + summary["comparison"]["year"].dump() + "\n";
  }
  text += "reference targets (full-scale study): overall F1 0.86; note-level "
          "F1 0.77-0.86; notes-only capture 32% homeless / 19% tobacco / 10% drug\n";
  if (!missing.empty()) {
    text += "missing artifacts:";
    for (const std::string& m : missing) text += " " + m;
    text += "\n";
  }

  fs::create_directories(opt.output_dir);
  write_text(opt.output_dir + "/summary.json", summary.dump(2) + "\n");
  write_text(opt.output_dir + "/summary.txt", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based SDOH extraction toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Options opt;
  std::map<std::string, Command> commands;

  auto add_command = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    commands[name].app = sub;
    Command& cmd = commands[name];
    bind(cmd, sub->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile),
         "config", opt.config_path);
    bind(cmd, sub->add_option("--output-dir", opt.output_dir, "artifact directory"),
         "output_dir", opt.output_dir);
    bind(cmd, sub->add_option("--threads", opt.threads, "worker threads (0 = all)"),
         "threads", opt.threads);
    bind(cmd,
         sub->add_flag("--include-method", opt.include_method,
                       "include the Method argument in the inventory"),
         "include_method", opt.include_method);
    bind(cmd,
         sub->add_option("--section-header", opt.section_headers,
                         "recognized social-history header (repeatable)"),
         "section_headers", opt.section_headers);
    return sub;
  };
  auto add_model_flags = [&](const std::string& name) {
    Command& cmd = commands[name];
    CLI::App* sub = cmd.app;
    bind(cmd, sub->add_option("--dim", opt.model.hidden_dim, "encoder width d"),
         "dim", opt.model.hidden_dim);
    bind(cmd, sub->add_option("--width-dim", opt.model.width_dim, "width embedding size"),
         "width_dim", opt.model.width_dim);
    bind(cmd, sub->add_option("--max-span-width", opt.model.max_span_width,
                              "max span width K in tokens"),
         "max_span_width", opt.model.max_span_width);
    bind(cmd, sub->add_option("--epochs", opt.model.epochs, "training epochs"),
         "epochs", opt.model.epochs);
    bind(cmd, sub->add_option("--lr", opt.model.learning_rate, "SGD learning rate"),
         "learning_rate", opt.model.learning_rate);
    bind(cmd, sub->add_option("--batch-size", opt.model.batch_size, "sentences per step"),
         "batch_size", opt.model.batch_size);
    bind(cmd, sub->add_option("--neg-entity", opt.model.neg_entity_samples,
                              "null span samples per sentence"),
         "neg_entity_samples", opt.model.neg_entity_samples);
    bind(cmd, sub->add_option("--neg-relation", opt.model.neg_relation_samples,
                              "null relation samples per sentence"),
         "neg_relation_samples", opt.model.neg_relation_samples);
    bind(cmd, sub->add_option("--encoder", opt.encoder, "toy | file"), "encoder",
         opt.encoder);
    bind(cmd, sub->add_option("--relation-policy", opt.relation_policy,
                              "entity_only | entity_or_subtype"),
         "relation_candidate_policy", opt.relation_policy);
    bind(cmd, sub->add_option("--embeddings", opt.embeddings_path,
                              "embeddings sidecar for the file encoder")
             ->check(CLI::ExistingFile),
         "embeddings", opt.embeddings_path);
  };

  // validate
  {
    CLI::App* sub = add_command("validate", "check a corpus against the schema");
    Command& cmd = commands["validate"];
    bind(cmd,
         sub->add_option("--corpus", opt.corpus_dir, "corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "corpus", opt.corpus_dir);
  }
  // synth
  {
    CLI::App* sub = add_command("synth", "generate a synthetic gold corpus");
    Command& cmd = commands["synth"];
    bind(cmd, sub->add_option("--grammar", opt.grammar_path, "grammar JSON (default built-in)")->check(CLI::ExistingFile),
         "grammar", opt.grammar_path);
    bind(cmd, sub->add_option("--docs", opt.docs, "documents in the main partition"),
         "docs", opt.docs);
    bind(cmd, sub->add_option("--dev-docs", opt.dev_docs, "documents in a dev partition"),
         "dev_docs", opt.dev_docs);
    bind(cmd, sub->add_option("--test-docs", opt.test_docs, "documents in a test partition"),
         "test_docs", opt.test_docs);
    bind(cmd, sub->add_option("--seed", opt.seed, "generator seed"), "seed", opt.seed);
    bind(cmd, sub->add_option("--partition", opt.partition, "main partition name"),
         "partition", opt.partition);
  }
  // train
  {
    CLI::App* sub = add_command("train", "train a model on a corpus partition");
    Command& cmd = commands["train"];
    bind(cmd, sub->add_option("--corpus", opt.corpus_dir, "corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "corpus", opt.corpus_dir);
    bind(cmd, sub->add_option("--partition", opt.partition, "partition to train on"),
         "partition", opt.partition);
    bind(cmd, sub->add_option("--seed", opt.seed, "training seed"), "seed", opt.seed);
    add_model_flags("train");
  }
  // predict
  {
    CLI::App* sub = add_command("predict", "run extraction with a checkpoint");
    Command& cmd = commands["predict"];
    bind(cmd, sub->add_option("--corpus", opt.corpus_dir, "corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "corpus", opt.corpus_dir);
    bind(cmd, sub->add_option("--checkpoint", opt.checkpoint_path, "model checkpoint")
             ->required()
             ->check(CLI::ExistingFile),
         "checkpoint", opt.checkpoint_path);
    bind(cmd, sub->add_option("--partition", opt.partition, "partition to predict"),
         "partition", opt.partition);
    bind(cmd, sub->add_option("--embeddings", opt.embeddings_path,
                              "embeddings sidecar for the file encoder")
             ->check(CLI::ExistingFile),
         "embeddings", opt.embeddings_path);
  }
  // score
  {
    CLI::App* sub = add_command("score", "slot-filling evaluation of predictions");
    Command& cmd = commands["score"];
    bind(cmd, sub->add_option("--gold", opt.gold_dir, "gold corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "gold", opt.gold_dir);
    bind(cmd, sub->add_option("--pred", opt.pred_dir, "directory of predicted .ann files")
             ->required()
             ->check(CLI::ExistingDirectory),
         "pred", opt.pred_dir);
    bind(cmd, sub->add_option("--partition", opt.partition, "gold partition"),
         "partition", opt.partition);
  }
  // note-labels
  {
    CLI::App* sub = add_command("note-labels", "map events to note-level labels");
    Command& cmd = commands["note-labels"];
    bind(cmd, sub->add_option("--corpus", opt.corpus_dir, "corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "corpus", opt.corpus_dir);
    bind(cmd, sub->add_option("--partition", opt.partition, "partition"), "partition",
         opt.partition);
    bind(cmd, sub->add_option("--events", opt.events_path,
                              "predicted events json (default: gold annotations)")
             ->check(CLI::ExistingFile),
         "events", opt.events_path);
  }
  // note-metrics
  {
    CLI::App* sub = add_command("note-metrics", "note-level classification metrics");
    Command& cmd = commands["note-metrics"];
    bind(cmd, sub->add_option("--gold", opt.gold_csv, "gold note labels csv")
             ->required()
             ->check(CLI::ExistingFile),
         "gold", opt.gold_csv);
    bind(cmd, sub->add_option("--pred", opt.pred_csv, "predicted note labels csv")
             ->required()
             ->check(CLI::ExistingFile),
         "pred", opt.pred_csv);
  }
  // compare
  {
    CLI::App* sub = add_command("compare", "structured vs extracted comparison");
    Command& cmd = commands["compare"];
    bind(cmd, sub->add_option("--corpus", opt.corpus_dir, "corpus directory")
             ->required()
             ->check(CLI::ExistingDirectory),
         "corpus", opt.corpus_dir);
    bind(cmd, sub->add_option("--partition", opt.partition, "partition"), "partition",
         opt.partition);
    bind(cmd, sub->add_option("--events", opt.events_path,
                              "predicted events json (default: gold annotations)")
             ->check(CLI::ExistingFile),
         "events", opt.events_path);
    bind(cmd, sub->add_option("--structured", opt.structured_dir,
                              "directory of structured-record csv files")
             ->check(CLI::ExistingDirectory),
         "structured", opt.structured_dir);
    bind(cmd, sub->add_option("--mapping", opt.mapping_path,
                              "structured field mapping json")
             ->check(CLI::ExistingFile),
         "mapping", opt.mapping_path);
    bind(cmd, sub->add_option("--lexicon", opt.lexicon_path,
                              "substance normalization lexicon json")
             ->check(CLI::ExistingFile),
         "lexicon", opt.lexicon_path);
    bind(cmd, sub->add_option("--year", opt.year, "study year"), "year", opt.year);
    bind(cmd,
         sub->add_flag("--latest-social-only", opt.latest_social_only,
                       "keep only each patient's newest social-history document"),
         "latest_social_only", opt.latest_social_only);
  }
  // report
  { add_command("report", "bundle artifacts into one summary"); }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    apply_config_file(commands[name], opt.config_path);
    if (name == "validate") return run_validate(opt);
    if (name == "synth") return run_synth(opt);
    if (name == "train") return run_train(opt);
    if (name == "predict") return run_predict(opt);
    if (name == "score") return run_score(opt);
    if (name == "note-labels") return run_note_labels(opt);
    if (name == "note-metrics") return run_note_metrics(opt);
    if (name == "compare") return run_compare(opt);
    if (name == "report") return run_report(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
