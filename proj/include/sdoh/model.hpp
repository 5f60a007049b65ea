#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdoh/corpus_io.hpp"
#include "sdoh/schema.hpp"

namespace sdoh {

enum class RelationCandidatePolicy { EntityOnly, EntityOrSubtype };
enum class EncoderKind { Toy, File };

std::string_view to_string(RelationCandidatePolicy p);
std::string_view to_string(EncoderKind k);
std::optional<RelationCandidatePolicy> parse_relation_policy(std::string_view);
std::optional<EncoderKind> parse_encoder_kind(std::string_view);

struct ModelConfig {
  int hidden_dim = 32;       // d
  int width_dim = 16;        // dw
  int max_span_width = 8;    // K, in tokens
  int neg_entity_samples = 24;
  int neg_relation_samples = 24;
  double learning_rate = 0.02;
  int epochs = 200;
  int batch_size = 16;
  std::uint64_t seed = 7;
  RelationCandidatePolicy relation_candidate_policy =
      RelationCandidatePolicy::EntityOrSubtype;
  EncoderKind encoder = EncoderKind::Toy;
};

using Vec = std::vector<double>;

/// One named view into the flat parameter vector.
struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
};

/// All trainable parameters, stored as one flat double vector with named
/// tensor views. Construction derives every head dimension from the config
/// and inventory and throws std::invalid_argument on an inconsistent setup.
///
/// Tensors (toy encoder only where marked):
///   embeddings        vocab x d      (toy)
///   mix_self          d x d          (toy)
///   mix_neighbor      d x d          (toy)
///   mix_bias          d              (toy)
///   cls_weight        d x d          (toy)
///   cls_bias          d              (toy)
///   width_embeddings  K x dw
///   entity_weight     |Phi_e| x (2d+dw)
///   entity_bias       |Phi_e|
///   subtype_<V>_weight  |Phi_sv| x (2d+dw+|Phi_e|)
///   subtype_<V>_bias    |Phi_sv|
///   relation_weight   2 x (3d+2dw)
///   relation_bias     2
class ModelParams {
 public:
  ModelParams(ModelConfig config, LabelInventory inventory,
              std::vector<std::string> vocab);

  /// Random initialization (uniform Xavier), deterministic in config.seed.
  static ModelParams init(const ModelConfig& config,
                          const LabelInventory& inventory,
                          std::vector<std::string> vocab);

  const ModelConfig& config() const { return config_; }
  const LabelInventory& inventory() const { return inventory_; }
  const std::vector<std::string>& vocab() const { return vocab_; }

  int d() const { return config_.hidden_dim; }
  int dw() const { return config_.width_dim; }
  int max_width() const { return config_.max_span_width; }
  int entity_input_dim() const { return 2 * d() + dw(); }
  int subtype_input_dim() const {
    return entity_input_dim() + inventory_.entity_label_count();
  }
  int relation_input_dim() const { return 3 * d() + 2 * dw(); }

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::span<const double> view(const std::string& name) const;
  std::span<double> view(const std::string& name);
  const TensorInfo& info(const std::string& name) const;

  /// Token id for the entity embedding table; 0 is the reserved UNK slot.
  int token_id(std::string_view token) const;

  bool operator==(const ModelParams& other) const {
    return data_ == other.data_ && vocab_ == other.vocab_;
  }

 private:
  ModelConfig config_;
  LabelInventory inventory_;
  std::vector<std::string> vocab_;
  std::map<std::string, int, std::less<>> vocab_index_;
  std::vector<TensorInfo> tensors_;
  std::map<std::string, std::size_t> tensor_index_;
  std::vector<double> data_;

  void add_tensor(const std::string& name, int rows, int cols);
};

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

struct EncoderOutput {
  Vec h_cls;
  std::vector<Vec> h;  // one vector per token
};

/// Per-document record of externally computed embeddings: one vector per
/// token of the tokenized section and one sentence vector per sentence.
struct DocumentEmbeddings {
  int dim = 0;
  std::vector<Vec> sentence_cls;
  std::vector<Vec> tokens;
};

using EmbeddingFile = std::map<std::string, DocumentEmbeddings>;

void save_embeddings(const std::string& path, const EmbeddingFile& embeddings);
EmbeddingFile load_embeddings(const std::string& path);

/// Toy encoder: embedding lookup, one layer mixing each token with the mean
/// of its +-1 neighborhood, and a learned transform of the mean-pooled token
/// vectors as the sentence representation.
EncoderOutput encode(std::span<const Token> sentence_tokens,
                     const ModelParams& params);

/// Slices the sidecar record for one sentence of a document.
EncoderOutput encode_from_file(const DocumentEmbeddings& record,
                               const TokenizedDocument& doc, int sentence);

/// Dispatches on params.config().encoder; `side` may be null for Toy.
EncoderOutput encode_sentence(const TokenizedDocument& doc, int sentence,
                              const ModelParams& params,
                              const EmbeddingFile* side);

// ---------------------------------------------------------------------------
// Span machinery and heads
// ---------------------------------------------------------------------------

struct SpanCandidate {
  int sentence = 0;
  int first_token = 0;  // document token index
  int width = 1;        // tokens, 1..K
  Span char_span;       // section-text coordinates

  auto operator<=>(const SpanCandidate&) const = default;
};

/// All contiguous token ranges of width 1..K within one sentence, ordered by
/// (start, width).
std::vector<SpanCandidate> enumerate_spans_sentence(
    const TokenizedDocument& doc, int sentence, int max_width);

/// Candidates over every sentence of the document.
std::vector<SpanCandidate> enumerate_spans(const TokenizedDocument& doc,
                                           int max_width);

/// Span representation: elementwise max over the token vectors of the span,
/// concatenated with the width embedding. Output size d + dw.
Vec span_representation(const EncoderOutput& enc, int first_in_sentence,
                        int width, const ModelParams& params);

/// Entity head logits from concat(g, h_cls); input dimension 2d + dw.
Vec entity_type_logits(const Vec& g, const Vec& h_cls,
                       const ModelParams& params);

/// Subtype head logits for labeled-argument set v from
/// concat(entity_input, entity_logits); input dimension 2d + dw + |Phi_e|.
Vec subtype_logits(const Vec& entity_input, const Vec& entity_logit_vec,
                   LabeledArg v, const ModelParams& params);

/// Relation head logits from concat(g_i, c, g_j) where c is the max pool of
/// the token vectors strictly between the spans (zero vector when none).
Vec relation_logits(const EncoderOutput& enc, const SpanCandidate& a,
                    const SpanCandidate& b, int sentence_begin,
                    const ModelParams& params);

struct RawPredictions {
  int sentence = 0;
  std::vector<SpanCandidate> candidates;
  std::vector<Vec> entity_logits;                 // per candidate
  std::array<std::vector<Vec>, 3> subtype_logits; // per head, per candidate
  std::vector<std::pair<int, int>> relation_pairs;  // candidate indices
  std::vector<Vec> relation_logits;
};

/// Full forward pass for one sentence. Relation pairs are the ordered pairs
/// of candidates that pass the relation-candidate policy.
RawPredictions forward(const TokenizedDocument& doc, int sentence,
                       const ModelParams& params, const EmbeddingFile* side);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct GoldSpan {
  int first_token = 0;  // document token index
  int width = 1;
  int entity_label = 0;                       // index into Phi_e, 0 = null
  std::array<int, 3> subtype_labels = {0, 0, 0};  // per head, 0 = null
};

struct TrainingBatch {
  int sentence = 0;
  std::vector<GoldSpan> gold_spans;
  std::vector<std::pair<int, int>> gold_relations;      // gold_span indices
  std::vector<std::pair<int, int>> negative_spans;      // (first_token, width)
  std::vector<std::pair<int, int>> negative_relations;  // gold_span indices
};

/// Projects gold annotations onto one sentence and samples negatives.
/// Deterministic in sample_seed. Gold spans wider than K tokens or not
/// aligned to the sentence are skipped.
TrainingBatch build_training_batch(const TokenizedDocument& doc, int sentence,
                                   const AnnotationSet& gold,
                                   const LabelInventory& inv,
                                   const ModelConfig& config,
                                   std::uint64_t sample_seed);

/// Forward pass whose relation pairs are exactly the batch's gold and
/// sampled negative pairs, so every batch item has logits in the result.
RawPredictions forward_for_batch(const TokenizedDocument& doc,
                                 const TrainingBatch& batch,
                                 const ModelParams& params,
                                 const EmbeddingFile* side);

/// Sum of cross-entropy terms over the entity head, the three subtype heads,
/// and the relation head for all batch items.
double loss(const RawPredictions& raw, const TrainingBatch& batch);

/// Loss plus exact gradient; grad must have the same size as params.data()
/// and is accumulated into.
double loss_and_gradient(const TokenizedDocument& doc,
                         const TrainingBatch& batch, const ModelParams& params,
                         const EmbeddingFile* side, std::vector<double>& grad);

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_mean_loss;
};

/// Mini-batch gradient descent over all sentences of the partition. Batch
/// gradients fan out over sentences and are reduced in sentence order, so the
/// resulting checkpoint does not depend on the thread count.
TrainResult train(const CorpusPartition& corpus, const ModelConfig& config,
                  const LabelInventory& inv, const EmbeddingFile* side = nullptr,
                  int threads = 0);

/// Central-difference check of the analytic gradient on >= min_coords
/// randomly chosen coordinates; returns the max relative error. Throws on a
/// non-finite loss.
double gradient_check(const ModelParams& params, const TokenizedDocument& doc,
                      const TrainingBatch& batch, const EmbeddingFile* side,
                      double epsilon, int min_coords = 200,
                      std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Checkpoints: JSON header (config, inventory hash, named tensor shapes)
// followed by raw little-endian float32 tensor data in header order.
// ---------------------------------------------------------------------------

void save_checkpoint(const ModelParams& params, const std::string& path);

/// Throws std::runtime_error naming the offending field on any version,
/// inventory, or dimension mismatch. When `expected` is given, the checkpoint
/// config must agree with it on every architecture dimension.
ModelParams load_checkpoint(const std::string& path,
                            const ModelConfig* expected = nullptr);

}  // namespace sdoh
