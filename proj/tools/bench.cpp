// Benchmark of the document-parallel kernels against their serial reference
// implementations: prediction, scoring, and batch gradient accumulation.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "sdoh/assembly.hpp"
#include "sdoh/corpus_io.hpp"
#include "sdoh/model.hpp"
#include "sdoh/parallel.hpp"
#include "sdoh/scorer.hpp"

using namespace sdoh;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  const int docs = argc > 1 ? std::atoi(argv[1]) : 400;
  const int threads = hardware_threads();
  std::printf("bench: %d documents, %d hardware threads\n", docs, threads);

  LabelInventory inv;
  SynthGrammar grammar = default_grammar();
  CorpusPartition part = generate_corpus(grammar, docs, 7, "train");

  ModelConfig cfg;
  cfg.hidden_dim = 32;
  cfg.width_dim = 16;
  cfg.max_span_width = 8;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  TrainResult model = train(part, cfg, inv, nullptr, threads);

  // Prediction kernel.
  auto t0 = std::chrono::steady_clock::now();
  std::vector<AnnotationSet> serial_pred =
      predict_corpus_serial(part, model.params, nullptr);
  const double predict_serial = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  std::vector<AnnotationSet> parallel_pred =
      predict_corpus(part, model.params, nullptr, threads);
  const double predict_parallel = seconds_since(t0);
  bool equal = serial_pred.size() == parallel_pred.size();
  for (std::size_t i = 0; equal && i < serial_pred.size(); ++i) {
    equal = serial_pred[i] == parallel_pred[i];
  }
  std::printf("predict   serial %7.3fs   parallel %7.3fs   speedup %.2fx   %s\n",
              predict_serial, predict_parallel,
              predict_serial / predict_parallel, equal ? "match" : "MISMATCH");

  // Scoring kernel (gold vs predictions).
  std::vector<AnnotationSet> gold;
  gold.reserve(part.docs.size());
  for (const AnnotatedDoc& ad : part.docs) gold.push_back(ad.anns);
  t0 = std::chrono::steady_clock::now();
  MatchCounts serial_counts = score_documents_serial(gold, serial_pred);
  const double score_serial = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  MatchCounts parallel_counts = score_documents(gold, parallel_pred, threads);
  const double score_parallel = seconds_since(t0);
  std::printf("score     serial %7.3fs   parallel %7.3fs   speedup %.2fx   %s\n",
              score_serial, score_parallel, score_serial / score_parallel,
              serial_counts == parallel_counts ? "match" : "MISMATCH");

  // Batch gradient kernel: one epoch, serial vs parallel fan-out.
  ModelConfig grad_cfg = cfg;
  grad_cfg.epochs = 1;
  t0 = std::chrono::steady_clock::now();
  TrainResult one = train(part, grad_cfg, inv, nullptr, 1);
  const double grad_serial = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  TrainResult many = train(part, grad_cfg, inv, nullptr, threads);
  const double grad_parallel = seconds_since(t0);
  std::printf("gradient  serial %7.3fs   parallel %7.3fs   speedup %.2fx   %s\n",
              grad_serial, grad_parallel, grad_serial / grad_parallel,
              one.params == many.params ? "match" : "MISMATCH");
  return 0;
}
