#include "sdoh/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "sdoh/rng.hpp"

namespace sdoh {

std::string_view to_string(RelationCandidatePolicy p) {
  switch (p) {
    case RelationCandidatePolicy::EntityOnly: return "entity_only";
    case RelationCandidatePolicy::EntityOrSubtype: return "entity_or_subtype";
  }
  return "?";
}

std::string_view to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::Toy: return "toy";
    case EncoderKind::File: return "file";
  }
  return "?";
}

std::optional<RelationCandidatePolicy> parse_relation_policy(std::string_view s) {
  if (s == "entity_only") return RelationCandidatePolicy::EntityOnly;
  if (s == "entity_or_subtype") return RelationCandidatePolicy::EntityOrSubtype;
  return std::nullopt;
}

std::optional<EncoderKind> parse_encoder_kind(std::string_view s) {
  if (s == "toy") return EncoderKind::Toy;
  if (s == "file") return EncoderKind::File;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ModelParams
// ---------------------------------------------------------------------------

void ModelParams::add_tensor(const std::string& name, int rows, int cols) {
  TensorInfo info{name, rows, cols, data_.size()};
  tensor_index_[name] = tensors_.size();
  tensors_.push_back(info);
  data_.resize(data_.size() + info.size(), 0.0);
}

ModelParams::ModelParams(ModelConfig config, LabelInventory inventory,
                         std::vector<std::string> vocab)
    : config_(config), inventory_(std::move(inventory)), vocab_(std::move(vocab)) {
  if (config_.hidden_dim < 1 || config_.width_dim < 1 ||
      config_.max_span_width < 1) {
    throw std::invalid_argument("model config: d, dw, K must all be >= 1");
  }
  if (config_.neg_entity_samples < 0 || config_.neg_relation_samples < 0) {
    throw std::invalid_argument("model config: sample counts must be >= 0");
  }

  const int d = config_.hidden_dim;
  const int dw = config_.width_dim;
  const int ne = inventory_.entity_label_count();

  if (config_.encoder == EncoderKind::Toy) {
    if (vocab_.empty() || vocab_[0] != "<unk>") {
      vocab_.insert(vocab_.begin(), "<unk>");
    }
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      vocab_index_[vocab_[i]] = static_cast<int>(i);
    }
    add_tensor("embeddings", static_cast<int>(vocab_.size()), d);
    add_tensor("mix_self", d, d);
    add_tensor("mix_neighbor", d, d);
    add_tensor("mix_bias", d, 1);
    add_tensor("cls_weight", d, d);
    add_tensor("cls_bias", d, 1);
  } else {
    vocab_.clear();
  }
  add_tensor("width_embeddings", config_.max_span_width, dw);
  add_tensor("entity_weight", ne, entity_input_dim());
  add_tensor("entity_bias", ne, 1);
  for (LabeledArg v : kLabeledArgs) {
    const std::string base = "subtype_" + std::string(to_string(v));
    add_tensor(base + "_weight", inventory_.subtype_count(v), subtype_input_dim());
    add_tensor(base + "_bias", inventory_.subtype_count(v), 1);
  }
  add_tensor("relation_weight", LabelInventory::kRelationLabelCount,
             relation_input_dim());
  add_tensor("relation_bias", LabelInventory::kRelationLabelCount, 1);
}

ModelParams ModelParams::init(const ModelConfig& config,
                              const LabelInventory& inventory,
                              std::vector<std::string> vocab) {
  ModelParams params(config, inventory, std::move(vocab));
  Rng rng(Rng::mix(config.seed, 0x9e11));
  for (const TensorInfo& t : params.tensors_) {
    if (t.cols == 1) continue;  // biases start at zero
    const double r = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    for (std::size_t i = 0; i < t.size(); ++i) {
      params.data_[t.offset + i] = rng.next_symmetric(r);
    }
  }
  return params;
}

const TensorInfo& ModelParams::info(const std::string& name) const {
  auto it = tensor_index_.find(name);
  if (it == tensor_index_.end()) {
    throw std::invalid_argument("unknown tensor " + name);
  }
  return tensors_[it->second];
}

std::span<const double> ModelParams::view(const std::string& name) const {
  const TensorInfo& t = info(name);
  return {data_.data() + t.offset, t.size()};
}

std::span<double> ModelParams::view(const std::string& name) {
  const TensorInfo& t = info(name);
  return {data_.data() + t.offset, t.size()};
}

int ModelParams::token_id(std::string_view token) const {
  std::string lowered(token);
  for (char& c : lowered) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  auto it = vocab_index_.find(lowered);
  if (it == vocab_index_.end()) return 0;
  return it->second;
}

// ---------------------------------------------------------------------------
// Dense helpers
// ---------------------------------------------------------------------------

namespace {

void affine(std::span<const double> w, std::span<const double> b, int rows,
            int cols, const Vec& x, Vec& y) {
  y.assign(static_cast<std::size_t>(rows), 0.0);
  for (int r = 0; r < rows; ++r) {
    double acc = b[static_cast<std::size_t>(r)];
    const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

EncoderOutput encode(std::span<const Token> sentence_tokens,
                     const ModelParams& params) {
  if (params.config().encoder != EncoderKind::Toy) {
    throw std::invalid_argument("encode(): params use the file encoder");
  }
  const int n = static_cast<int>(sentence_tokens.size());
  if (n < 1) throw std::invalid_argument("encode(): empty sentence");
  const int d = params.d();
  auto emb = params.view("embeddings");
  auto ws = params.view("mix_self");
  auto wn = params.view("mix_neighbor");
  auto bm = params.view("mix_bias");
  auto wc = params.view("cls_weight");
  auto bc = params.view("cls_bias");

  std::vector<Vec> e(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const int id = params.token_id(sentence_tokens[static_cast<std::size_t>(t)].text);
    e[static_cast<std::size_t>(t)].assign(
        emb.begin() + static_cast<std::size_t>(id) * d,
        emb.begin() + static_cast<std::size_t>(id + 1) * d);
  }

  EncoderOutput out;
  out.h.resize(static_cast<std::size_t>(n));
  Vec mean_h(static_cast<std::size_t>(d), 0.0);
  for (int t = 0; t < n; ++t) {
    const int lo = t > 0 ? t - 1 : 0;
    const int hi = t + 1 < n ? t + 1 : n - 1;
    Vec u(static_cast<std::size_t>(d), 0.0);
    for (int s = lo; s <= hi; ++s) {
      for (int c = 0; c < d; ++c) u[static_cast<std::size_t>(c)] += e[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
    }
    const double inv_window = 1.0 / static_cast<double>(hi - lo + 1);
    Vec& h = out.h[static_cast<std::size_t>(t)];
    h.assign(static_cast<std::size_t>(d), 0.0);
    for (int r = 0; r < d; ++r) {
      double acc = bm[static_cast<std::size_t>(r)];
      const double* wsr = ws.data() + static_cast<std::size_t>(r) * d;
      const double* wnr = wn.data() + static_cast<std::size_t>(r) * d;
      for (int c = 0; c < d; ++c) {
        acc += wsr[c] * e[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] +
               wnr[c] * u[static_cast<std::size_t>(c)] * inv_window;
      }
      h[static_cast<std::size_t>(r)] = std::tanh(acc);
    }
    for (int c = 0; c < d; ++c) mean_h[static_cast<std::size_t>(c)] += h[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < d; ++c) mean_h[static_cast<std::size_t>(c)] /= static_cast<double>(n);

  out.h_cls.assign(static_cast<std::size_t>(d), 0.0);
  for (int r = 0; r < d; ++r) {
    double acc = bc[static_cast<std::size_t>(r)];
    const double* wr = wc.data() + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) acc += wr[c] * mean_h[static_cast<std::size_t>(c)];
    out.h_cls[static_cast<std::size_t>(r)] = std::tanh(acc);
  }
  return out;
}

EncoderOutput encode_from_file(const DocumentEmbeddings& record,
                               const TokenizedDocument& doc, int sentence) {
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(sentence)];
  if (record.tokens.size() != doc.tokens.size() ||
      record.sentence_cls.size() != doc.sentences.size()) {
    throw std::runtime_error("embeddings sidecar does not match document " +
                             doc.document_id);
  }
  EncoderOutput out;
  out.h_cls = record.sentence_cls[static_cast<std::size_t>(sentence)];
  out.h.assign(record.tokens.begin() + begin, record.tokens.begin() + end);
  return out;
}

EncoderOutput encode_sentence(const TokenizedDocument& doc, int sentence,
                              const ModelParams& params,
                              const EmbeddingFile* side) {
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(sentence)];
  if (params.config().encoder == EncoderKind::Toy) {
    return encode(std::span<const Token>(doc.tokens.data() + begin,
                                         static_cast<std::size_t>(end - begin)),
                  params);
  }
  if (!side) {
    throw std::runtime_error("file encoder requires an embeddings sidecar");
  }
  auto it = side->find(doc.document_id);
  if (it == side->end()) {
    throw std::runtime_error("no embeddings record for document " +
                             doc.document_id);
  }
  if (it->second.dim != params.d()) {
    throw std::runtime_error("embeddings dimension mismatch for document " +
                             doc.document_id);
  }
  return encode_from_file(it->second, doc, sentence);
}

// ---------------------------------------------------------------------------
// Span enumeration and heads
// ---------------------------------------------------------------------------

std::vector<SpanCandidate> enumerate_spans_sentence(const TokenizedDocument& doc,
                                                    int sentence,
                                                    int max_width) {
  if (max_width < 1) throw std::invalid_argument("max_width must be >= 1");
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(sentence)];
  std::vector<SpanCandidate> out;
  for (int start = begin; start < end; ++start) {
    const int cap = std::min(max_width, end - start);
    for (int width = 1; width <= cap; ++width) {
      SpanCandidate c;
      c.sentence = sentence;
      c.first_token = start;
      c.width = width;
      c.char_span = Span{doc.tokens[static_cast<std::size_t>(start)].span.start,
                         doc.tokens[static_cast<std::size_t>(start + width - 1)].span.end};
      out.push_back(c);
    }
  }
  return out;
}

std::vector<SpanCandidate> enumerate_spans(const TokenizedDocument& doc,
                                           int max_width) {
  std::vector<SpanCandidate> out;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    auto one = enumerate_spans_sentence(doc, static_cast<int>(s), max_width);
    out.insert(out.end(), one.begin(), one.end());
  }
  return out;
}

Vec span_representation(const EncoderOutput& enc, int first_in_sentence,
                        int width, const ModelParams& params) {
  const int d = params.d();
  const int dw = params.dw();
  if (width < 1 || width > params.max_width() ||
      first_in_sentence + width > static_cast<int>(enc.h.size())) {
    throw std::invalid_argument("span out of bounds");
  }
  Vec g(static_cast<std::size_t>(d + dw), 0.0);
  for (int c = 0; c < d; ++c) {
    double best = enc.h[static_cast<std::size_t>(first_in_sentence)][static_cast<std::size_t>(c)];
    for (int t = 1; t < width; ++t) {
      best = std::max(best, enc.h[static_cast<std::size_t>(first_in_sentence + t)][static_cast<std::size_t>(c)]);
    }
    g[static_cast<std::size_t>(c)] = best;
  }
  auto w = params.view("width_embeddings");
  for (int c = 0; c < dw; ++c) {
    g[static_cast<std::size_t>(d + c)] =
        w[static_cast<std::size_t>(width - 1) * dw + static_cast<std::size_t>(c)];
  }
  return g;
}

Vec entity_type_logits(const Vec& g, const Vec& h_cls,
                       const ModelParams& params) {
  if (static_cast<int>(g.size()) != params.d() + params.dw() ||
      static_cast<int>(h_cls.size()) != params.d()) {
    throw std::invalid_argument("entity head: dimension mismatch");
  }
  Vec x;
  x.reserve(g.size() + h_cls.size());
  x.insert(x.end(), g.begin(), g.end());
  x.insert(x.end(), h_cls.begin(), h_cls.end());
  Vec y;
  affine(params.view("entity_weight"), params.view("entity_bias"),
         params.inventory().entity_label_count(), params.entity_input_dim(), x,
         y);
  return y;
}

Vec subtype_logits(const Vec& entity_input, const Vec& entity_logit_vec,
                   LabeledArg v, const ModelParams& params) {
  if (static_cast<int>(entity_input.size()) != params.entity_input_dim() ||
      static_cast<int>(entity_logit_vec.size()) !=
          params.inventory().entity_label_count()) {
    throw std::invalid_argument("subtype head: dimension mismatch");
  }
  Vec x;
  x.reserve(entity_input.size() + entity_logit_vec.size());
  x.insert(x.end(), entity_input.begin(), entity_input.end());
  x.insert(x.end(), entity_logit_vec.begin(), entity_logit_vec.end());
  const std::string base = "subtype_" + std::string(to_string(v));
  Vec y;
  affine(params.view(base + "_weight"), params.view(base + "_bias"),
         params.inventory().subtype_count(v), params.subtype_input_dim(), x, y);
  return y;
}

Vec relation_logits(const EncoderOutput& enc, const SpanCandidate& a,
                    const SpanCandidate& b, int sentence_begin,
                    const ModelParams& params) {
  if (a.first_token == b.first_token && a.width == b.width) {
    throw std::invalid_argument("relation head: identical spans");
  }
  const int d = params.d();
  const int dw = params.dw();
  Vec ga = span_representation(enc, a.first_token - sentence_begin, a.width, params);
  Vec gb = span_representation(enc, b.first_token - sentence_begin, b.width, params);

  // Context: max pool of tokens strictly between the spans; zero when the
  // spans touch or overlap.
  const int a_last = a.first_token + a.width - 1;
  const int b_last = b.first_token + b.width - 1;
  const int lo = std::min(a_last, b_last) + 1 - sentence_begin;
  const int hi = std::max(a.first_token, b.first_token) - sentence_begin;
  Vec c(static_cast<std::size_t>(d), 0.0);
  if (lo < hi) {
    for (int cc = 0; cc < d; ++cc) {
      double best = enc.h[static_cast<std::size_t>(lo)][static_cast<std::size_t>(cc)];
      for (int t = lo + 1; t < hi; ++t) {
        best = std::max(best, enc.h[static_cast<std::size_t>(t)][static_cast<std::size_t>(cc)]);
      }
      c[static_cast<std::size_t>(cc)] = best;
    }
  }

  Vec x;
  x.reserve(static_cast<std::size_t>(3 * d + 2 * dw));
  x.insert(x.end(), ga.begin(), ga.end());
  x.insert(x.end(), c.begin(), c.end());
  x.insert(x.end(), gb.begin(), gb.end());
  Vec y;
  affine(params.view("relation_weight"), params.view("relation_bias"),
         LabelInventory::kRelationLabelCount, params.relation_input_dim(), x, y);
  return y;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

int argmax(const Vec& z) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(z.size()); ++i) {
    if (z[static_cast<std::size_t>(i)] > z[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace

RawPredictions forward(const TokenizedDocument& doc, int sentence,
                       const ModelParams& params, const EmbeddingFile* side) {
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(sentence)];
  RawPredictions raw;
  raw.sentence = sentence;
  if (begin >= end) return raw;

  EncoderOutput enc = encode_sentence(doc, sentence, params, side);
  raw.candidates = enumerate_spans_sentence(doc, sentence, params.max_width());

  std::vector<bool> keep(raw.candidates.size(), false);
  for (std::size_t i = 0; i < raw.candidates.size(); ++i) {
    const SpanCandidate& cand = raw.candidates[i];
    Vec g = span_representation(enc, cand.first_token - begin, cand.width, params);
    Vec x;
    x.reserve(g.size() + enc.h_cls.size());
    x.insert(x.end(), g.begin(), g.end());
    x.insert(x.end(), enc.h_cls.begin(), enc.h_cls.end());
    Vec ze = entity_type_logits(g, enc.h_cls, params);
    bool non_null = argmax(ze) != 0;
    for (LabeledArg v : kLabeledArgs) {
      Vec zv = subtype_logits(x, ze, v, params);
      if (params.config().relation_candidate_policy ==
              RelationCandidatePolicy::EntityOrSubtype &&
          argmax(zv) != 0) {
        non_null = true;
      }
      raw.subtype_logits[static_cast<std::size_t>(v)].push_back(std::move(zv));
    }
    raw.entity_logits.push_back(std::move(ze));
    keep[i] = non_null;
  }

  for (std::size_t i = 0; i < raw.candidates.size(); ++i) {
    if (!keep[i]) continue;
    for (std::size_t j = 0; j < raw.candidates.size(); ++j) {
      if (i == j || !keep[j]) continue;
      raw.relation_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      raw.relation_logits.push_back(relation_logits(
          enc, raw.candidates[i], raw.candidates[j], begin, params));
    }
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

namespace {

double cross_entropy(const Vec& z, int label) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum) - z[static_cast<std::size_t>(label)];
}

}  // namespace

RawPredictions forward_for_batch(const TokenizedDocument& doc,
                                 const TrainingBatch& batch,
                                 const ModelParams& params,
                                 const EmbeddingFile* side) {
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(batch.sentence)];
  RawPredictions raw;
  raw.sentence = batch.sentence;
  if (begin >= end) return raw;
  EncoderOutput enc = encode_sentence(doc, batch.sentence, params, side);
  raw.candidates = enumerate_spans_sentence(doc, batch.sentence, params.max_width());

  std::map<std::pair<int, int>, int> index;
  for (std::size_t i = 0; i < raw.candidates.size(); ++i) {
    index[{raw.candidates[i].first_token, raw.candidates[i].width}] =
        static_cast<int>(i);
  }
  for (std::size_t i = 0; i < raw.candidates.size(); ++i) {
    const SpanCandidate& cand = raw.candidates[i];
    Vec g = span_representation(enc, cand.first_token - begin, cand.width, params);
    Vec x;
    x.insert(x.end(), g.begin(), g.end());
    x.insert(x.end(), enc.h_cls.begin(), enc.h_cls.end());
    Vec ze = entity_type_logits(g, enc.h_cls, params);
    for (LabeledArg v : kLabeledArgs) {
      raw.subtype_logits[static_cast<std::size_t>(v)].push_back(
          subtype_logits(x, ze, v, params));
    }
    raw.entity_logits.push_back(std::move(ze));
  }

  auto add_pair = [&](int gi, int gj) {
    const GoldSpan& a = batch.gold_spans[static_cast<std::size_t>(gi)];
    const GoldSpan& b = batch.gold_spans[static_cast<std::size_t>(gj)];
    int ia = index.at({a.first_token, a.width});
    int ib = index.at({b.first_token, b.width});
    raw.relation_pairs.emplace_back(ia, ib);
    raw.relation_logits.push_back(relation_logits(enc, raw.candidates[static_cast<std::size_t>(ia)],
                                                  raw.candidates[static_cast<std::size_t>(ib)],
                                                  begin, params));
  };
  for (const auto& [gi, gj] : batch.gold_relations) add_pair(gi, gj);
  for (const auto& [gi, gj] : batch.negative_relations) add_pair(gi, gj);
  return raw;
}

double loss(const RawPredictions& raw, const TrainingBatch& batch) {
  std::map<std::pair<int, int>, int> index;
  for (std::size_t i = 0; i < raw.candidates.size(); ++i) {
    index[{raw.candidates[i].first_token, raw.candidates[i].width}] =
        static_cast<int>(i);
  }
  auto candidate_of = [&](int first, int width) {
    auto it = index.find({first, width});
    if (it == index.end()) {
      throw std::invalid_argument("batch references a span missing from raw");
    }
    return it->second;
  };

  double total = 0;
  for (const GoldSpan& g : batch.gold_spans) {
    const int i = candidate_of(g.first_token, g.width);
    total += cross_entropy(raw.entity_logits[static_cast<std::size_t>(i)], g.entity_label);
    for (LabeledArg v : kLabeledArgs) {
      total += cross_entropy(
          raw.subtype_logits[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)],
          g.subtype_labels[static_cast<std::size_t>(v)]);
    }
  }
  for (const auto& [first, width] : batch.negative_spans) {
    const int i = candidate_of(first, width);
    total += cross_entropy(raw.entity_logits[static_cast<std::size_t>(i)], 0);
    for (LabeledArg v : kLabeledArgs) {
      total += cross_entropy(
          raw.subtype_logits[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)], 0);
    }
  }

  std::map<std::pair<int, int>, int> pair_index;
  for (std::size_t p = 0; p < raw.relation_pairs.size(); ++p) {
    pair_index[raw.relation_pairs[p]] = static_cast<int>(p);
  }
  auto pair_of = [&](const std::pair<int, int>& gold_pair) {
    const GoldSpan& a = batch.gold_spans[static_cast<std::size_t>(gold_pair.first)];
    const GoldSpan& b = batch.gold_spans[static_cast<std::size_t>(gold_pair.second)];
    auto it = pair_index.find({candidate_of(a.first_token, a.width),
                               candidate_of(b.first_token, b.width)});
    if (it == pair_index.end()) {
      throw std::invalid_argument("batch references a pair missing from raw");
    }
    return it->second;
  };
  for (const auto& rel : batch.gold_relations) {
    total += cross_entropy(
        raw.relation_logits[static_cast<std::size_t>(pair_of(rel))],
        LabelInventory::kRelationHas);
  }
  for (const auto& rel : batch.negative_relations) {
    total += cross_entropy(
        raw.relation_logits[static_cast<std::size_t>(pair_of(rel))], 0);
  }
  return total;
}

}  // namespace sdoh
