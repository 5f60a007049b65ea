#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

#include "sdoh/log.hpp"
#include "sdoh/model.hpp"
#include "sdoh/parallel.hpp"
#include "sdoh/rng.hpp"

namespace sdoh {

namespace {

// dW += dy (outer) x, for a rows x cols tensor slice of the gradient vector.
void add_outer(double* dw, const Vec& dy, const Vec& x) {
  const std::size_t rows = dy.size();
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dy[r];
    if (s == 0.0) continue;
    double* row = dw + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += s * x[c];
  }
}

// dx += W^T dy
void add_matvec_t(std::span<const double> w, std::size_t rows, std::size_t cols,
                  const Vec& dy, Vec& dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dy[r];
    if (s == 0.0) continue;
    const double* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dx[c] += s * row[c];
  }
}

void add_vec(double* dst, const Vec& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

// softmax(z) with the gold coordinate decremented: d(CE)/dz.
Vec ce_gradient(const Vec& z, int label) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0;
  Vec g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    g[i] = std::exp(z[i] - m);
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  g[static_cast<std::size_t>(label)] -= 1.0;
  return g;
}

double ce_value(const Vec& z, int label) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum) - z[static_cast<std::size_t>(label)];
}

}  // namespace

// ---------------------------------------------------------------------------
// Batch construction
// ---------------------------------------------------------------------------

namespace {

/// Token range [first, last] (document indices) covered by a char span, or
/// nullopt when the span does not align to this sentence.
std::optional<std::pair<int, int>> token_range(const TokenizedDocument& doc,
                                               int begin, int end,
                                               const Span& span) {
  int first = -1, last = -1;
  for (int t = begin; t < end; ++t) {
    const Span& ts = doc.tokens[static_cast<std::size_t>(t)].span;
    if (ts.end > span.start && ts.start < span.end) {
      if (first < 0) first = t;
      last = t;
    }
  }
  if (first < 0) return std::nullopt;
  return std::make_pair(first, last);
}

}  // namespace

TrainingBatch build_training_batch(const TokenizedDocument& doc, int sentence,
                                   const AnnotationSet& gold,
                                   const LabelInventory& inv,
                                   const ModelConfig& config,
                                   std::uint64_t sample_seed) {
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(sentence)];
  TrainingBatch batch;
  batch.sentence = sentence;

  std::map<std::pair<int, int>, int> span_index;
  auto upsert = [&](int first, int width, int entity_label, LabeledArg v,
                    int subtype_label) {
    auto key = std::make_pair(first, width);
    auto it = span_index.find(key);
    if (it == span_index.end()) {
      GoldSpan g;
      g.first_token = first;
      g.width = width;
      g.entity_label = entity_label;
      if (subtype_label > 0) g.subtype_labels[static_cast<std::size_t>(v)] = subtype_label;
      it = span_index.emplace(key, static_cast<int>(batch.gold_spans.size())).first;
      batch.gold_spans.push_back(g);
    } else {
      GoldSpan& g = batch.gold_spans[static_cast<std::size_t>(it->second)];
      if (g.entity_label == 0) g.entity_label = entity_label;
      if (subtype_label > 0 &&
          g.subtype_labels[static_cast<std::size_t>(v)] == 0) {
        g.subtype_labels[static_cast<std::size_t>(v)] = subtype_label;
      }
    }
    return it->second;
  };

  auto map_span = [&](const Span& span) -> std::optional<std::pair<int, int>> {
    auto range = token_range(doc, begin, end, span);
    if (!range) return std::nullopt;
    const int width = range->second - range->first + 1;
    if (width > config.max_span_width) return std::nullopt;
    return std::make_pair(range->first, width);
  };

  std::set<std::pair<int, int>> relation_set;
  for (const Event& e : gold.events) {
    auto trig = map_span(e.trigger.span);
    int trig_idx = -1;
    if (trig) {
      trig_idx = upsert(trig->first, trig->second,
                        inv.entity_label(e.trigger.type), LabeledArg::StatusTime, 0);
    }
    for (const Argument& a : e.arguments) {
      auto range = map_span(a.span);
      if (!range) continue;
      int arg_idx;
      if (a.kind == Argument::Kind::SpanOnly) {
        const int label = inv.entity_label(a.span_only_type);
        if (label < 0) continue;  // Method without include_method
        arg_idx = upsert(range->first, range->second, label, LabeledArg::StatusTime, 0);
      } else {
        const int sub = inv.subtype_index(a.labeled_type, a.subtype);
        if (sub < 0) continue;
        arg_idx = upsert(range->first, range->second, 0, a.labeled_type, sub);
      }
      if (trig_idx >= 0 && arg_idx != trig_idx) {
        if (relation_set.emplace(trig_idx, arg_idx).second) {
          batch.gold_relations.emplace_back(trig_idx, arg_idx);
        }
      }
    }
  }
  for (const OrphanEntity& o : gold.orphans) {
    auto range = map_span(o.span);
    if (!range) continue;
    if (auto so = parse_span_only_arg(o.type)) {
      const int label = inv.entity_label(*so);
      if (label >= 0) upsert(range->first, range->second, label, LabeledArg::StatusTime, 0);
    } else if (auto et = parse_event_type(o.type)) {
      upsert(range->first, range->second, inv.entity_label(*et), LabeledArg::StatusTime, 0);
    }
    // orphan labeled-argument spans carry no subtype, so there is nothing to
    // teach the subtype heads; they are left out of the batch
  }

  Rng rng(sample_seed);

  // Negative spans: non-gold candidates, sampled without replacement.
  std::vector<std::pair<int, int>> pool;
  for (int start = begin; start < end; ++start) {
    const int cap = std::min(config.max_span_width, end - start);
    for (int width = 1; width <= cap; ++width) {
      if (!span_index.count({start, width})) pool.emplace_back(start, width);
    }
  }
  rng.shuffle(pool);
  const std::size_t n_neg =
      std::min<std::size_t>(pool.size(), static_cast<std::size_t>(config.neg_entity_samples));
  batch.negative_spans.assign(pool.begin(), pool.begin() + static_cast<long>(n_neg));

  // Negative relations: unconnected ordered pairs of gold spans.
  std::vector<std::pair<int, int>> rel_pool;
  const int n_gold = static_cast<int>(batch.gold_spans.size());
  for (int i = 0; i < n_gold; ++i) {
    for (int j = 0; j < n_gold; ++j) {
      if (i != j && !relation_set.count({i, j})) rel_pool.emplace_back(i, j);
    }
  }
  rng.shuffle(rel_pool);
  const std::size_t n_rel =
      std::min<std::size_t>(rel_pool.size(), static_cast<std::size_t>(config.neg_relation_samples));
  batch.negative_relations.assign(rel_pool.begin(), rel_pool.begin() + static_cast<long>(n_rel));
  return batch;
}

// ---------------------------------------------------------------------------
// Fused forward + backward for one sentence
// ---------------------------------------------------------------------------

namespace {

struct ItemSpan {
  int first = 0;  // document token index
  int width = 1;
  int entity_target = 0;
  std::array<int, 3> subtype_targets = {0, 0, 0};
};

}  // namespace

double loss_and_gradient(const TokenizedDocument& doc,
                         const TrainingBatch& batch, const ModelParams& params,
                         const EmbeddingFile* side, std::vector<double>& grad) {
  if (grad.size() != params.data().size()) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  const auto [begin, end] = doc.sentences[static_cast<std::size_t>(batch.sentence)];
  const int n = end - begin;
  if (n <= 0) return 0.0;
  const int d = params.d();
  const int dw = params.dw();
  const int ne = params.inventory().entity_label_count();
  const bool toy = params.config().encoder == EncoderKind::Toy;

  const EncoderOutput enc = encode_sentence(doc, batch.sentence, params, side);

  // Items: gold spans (with targets) first, then sampled null spans.
  std::vector<ItemSpan> items;
  items.reserve(batch.gold_spans.size() + batch.negative_spans.size());
  for (const GoldSpan& g : batch.gold_spans) {
    items.push_back(ItemSpan{g.first_token, g.width, g.entity_label, g.subtype_labels});
  }
  for (const auto& [first, width] : batch.negative_spans) {
    items.push_back(ItemSpan{first, width, 0, {0, 0, 0}});
  }

  // Forward caches per item.
  const std::size_t n_items = items.size();
  std::vector<Vec> g_vec(n_items), x_s(n_items), z_e(n_items);
  std::array<std::vector<Vec>, 3> z_v;
  for (auto& v : z_v) v.resize(n_items);
  std::vector<std::vector<int>> pool_argmax(n_items);

  auto emb_w = params.view("width_embeddings");
  for (std::size_t i = 0; i < n_items; ++i) {
    const ItemSpan& it = items[i];
    const int local = it.first - begin;
    Vec g(static_cast<std::size_t>(d + dw));
    std::vector<int>& am = pool_argmax[i];
    am.resize(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
      int best_t = local;
      double best = enc.h[static_cast<std::size_t>(local)][static_cast<std::size_t>(c)];
      for (int t = 1; t < it.width; ++t) {
        const double v = enc.h[static_cast<std::size_t>(local + t)][static_cast<std::size_t>(c)];
        if (v > best) {
          best = v;
          best_t = local + t;
        }
      }
      g[static_cast<std::size_t>(c)] = best;
      am[static_cast<std::size_t>(c)] = best_t;
    }
    for (int c = 0; c < dw; ++c) {
      g[static_cast<std::size_t>(d + c)] =
          emb_w[static_cast<std::size_t>(it.width - 1) * dw + static_cast<std::size_t>(c)];
    }
    x_s[i].reserve(static_cast<std::size_t>(2 * d + dw));
    x_s[i].insert(x_s[i].end(), g.begin(), g.end());
    x_s[i].insert(x_s[i].end(), enc.h_cls.begin(), enc.h_cls.end());
    g_vec[i] = std::move(g);
    z_e[i] = entity_type_logits(g_vec[i], enc.h_cls, params);
    for (LabeledArg v : kLabeledArgs) {
      z_v[static_cast<std::size_t>(v)][i] = subtype_logits(x_s[i], z_e[i], v, params);
    }
  }

  // Relation items.
  struct PairItem {
    int a = 0, b = 0;  // item indices (gold spans come first)
    int label = 0;
  };
  std::vector<PairItem> pairs;
  for (const auto& [gi, gj] : batch.gold_relations) {
    pairs.push_back(PairItem{gi, gj, LabelInventory::kRelationHas});
  }
  for (const auto& [gi, gj] : batch.negative_relations) {
    pairs.push_back(PairItem{gi, gj, 0});
  }
  std::vector<Vec> x_r(pairs.size()), z_r(pairs.size());
  std::vector<std::vector<int>> ctx_argmax(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const ItemSpan& a = items[static_cast<std::size_t>(pairs[p].a)];
    const ItemSpan& b = items[static_cast<std::size_t>(pairs[p].b)];
    const int a_last = a.first + a.width - 1;
    const int b_last = b.first + b.width - 1;
    const int lo = std::min(a_last, b_last) + 1 - begin;
    const int hi = std::max(a.first, b.first) - begin;
    Vec c(static_cast<std::size_t>(d), 0.0);
    if (lo < hi) {
      std::vector<int>& am = ctx_argmax[p];
      am.resize(static_cast<std::size_t>(d));
      for (int cc = 0; cc < d; ++cc) {
        int best_t = lo;
        double best = enc.h[static_cast<std::size_t>(lo)][static_cast<std::size_t>(cc)];
        for (int t = lo + 1; t < hi; ++t) {
          const double v = enc.h[static_cast<std::size_t>(t)][static_cast<std::size_t>(cc)];
          if (v > best) {
            best = v;
            best_t = t;
          }
        }
        c[static_cast<std::size_t>(cc)] = best;
        am[static_cast<std::size_t>(cc)] = best_t;
      }
    }
    Vec x;
    x.reserve(static_cast<std::size_t>(3 * d + 2 * dw));
    x.insert(x.end(), g_vec[static_cast<std::size_t>(pairs[p].a)].begin(),
             g_vec[static_cast<std::size_t>(pairs[p].a)].end());
    x.insert(x.end(), c.begin(), c.end());
    x.insert(x.end(), g_vec[static_cast<std::size_t>(pairs[p].b)].begin(),
             g_vec[static_cast<std::size_t>(pairs[p].b)].end());
    Vec y(static_cast<std::size_t>(LabelInventory::kRelationLabelCount), 0.0);
    auto rw = params.view("relation_weight");
    auto rb = params.view("relation_bias");
    for (int r = 0; r < LabelInventory::kRelationLabelCount; ++r) {
      double acc = rb[static_cast<std::size_t>(r)];
      const double* row = rw.data() + static_cast<std::size_t>(r) * x.size();
      for (std::size_t cc = 0; cc < x.size(); ++cc) acc += row[cc] * x[cc];
      y[static_cast<std::size_t>(r)] = acc;
    }
    x_r[p] = std::move(x);
    z_r[p] = std::move(y);
  }

  // Loss.
  double total = 0;
  for (std::size_t i = 0; i < n_items; ++i) {
    total += ce_value(z_e[i], items[i].entity_target);
    for (LabeledArg v : kLabeledArgs) {
      total += ce_value(z_v[static_cast<std::size_t>(v)][i],
                        items[i].subtype_targets[static_cast<std::size_t>(v)]);
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    total += ce_value(z_r[p], pairs[p].label);
  }

  // ---- Backward ----
  const TensorInfo& t_ew = params.info("entity_weight");
  const TensorInfo& t_eb = params.info("entity_bias");
  const TensorInfo& t_rw = params.info("relation_weight");
  const TensorInfo& t_rb = params.info("relation_bias");
  const TensorInfo& t_w = params.info("width_embeddings");

  std::vector<Vec> dg(n_items, Vec(static_cast<std::size_t>(d + dw), 0.0));
  std::vector<Vec> dh(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(d), 0.0));
  Vec dh_cls(static_cast<std::size_t>(d), 0.0);

  // Relation head.
  auto rw = params.view("relation_weight");
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Vec dz = ce_gradient(z_r[p], pairs[p].label);
    add_outer(grad.data() + t_rw.offset, dz, x_r[p]);
    add_vec(grad.data() + t_rb.offset, dz);
    Vec dx(x_r[p].size(), 0.0);
    add_matvec_t(rw, dz.size(), x_r[p].size(), dz, dx);
    Vec& dga = dg[static_cast<std::size_t>(pairs[p].a)];
    Vec& dgb = dg[static_cast<std::size_t>(pairs[p].b)];
    for (int c = 0; c < d + dw; ++c) {
      dga[static_cast<std::size_t>(c)] += dx[static_cast<std::size_t>(c)];
      dgb[static_cast<std::size_t>(c)] += dx[static_cast<std::size_t>(2 * d + dw + c)];
    }
    if (!ctx_argmax[p].empty()) {
      for (int c = 0; c < d; ++c) {
        dh[static_cast<std::size_t>(ctx_argmax[p][static_cast<std::size_t>(c)])]
          [static_cast<std::size_t>(c)] += dx[static_cast<std::size_t>(d + dw + c)];
      }
    }
  }

  // Span classification heads.
  auto ew = params.view("entity_weight");
  for (std::size_t i = 0; i < n_items; ++i) {
    Vec dz_e(static_cast<std::size_t>(ne), 0.0);
    Vec dx_s(x_s[i].size(), 0.0);

    for (LabeledArg v : kLabeledArgs) {
      const std::string base = "subtype_" + std::string(to_string(v));
      const TensorInfo& t_sw = params.info(base + "_weight");
      const TensorInfo& t_sb = params.info(base + "_bias");
      const Vec& zv = z_v[static_cast<std::size_t>(v)][i];
      Vec dzv = ce_gradient(zv, items[i].subtype_targets[static_cast<std::size_t>(v)]);
      // input was concat(x_s, z_e)
      Vec x_sv;
      x_sv.reserve(x_s[i].size() + z_e[i].size());
      x_sv.insert(x_sv.end(), x_s[i].begin(), x_s[i].end());
      x_sv.insert(x_sv.end(), z_e[i].begin(), z_e[i].end());
      add_outer(grad.data() + t_sw.offset, dzv, x_sv);
      add_vec(grad.data() + t_sb.offset, dzv);
      Vec dx_sv(x_sv.size(), 0.0);
      add_matvec_t(params.view(base + "_weight"), dzv.size(), x_sv.size(), dzv, dx_sv);
      for (std::size_t c = 0; c < x_s[i].size(); ++c) dx_s[c] += dx_sv[c];
      for (int c = 0; c < ne; ++c) {
        dz_e[static_cast<std::size_t>(c)] += dx_sv[x_s[i].size() + static_cast<std::size_t>(c)];
      }
    }

    {
      Vec ce = ce_gradient(z_e[i], items[i].entity_target);
      for (int c = 0; c < ne; ++c) dz_e[static_cast<std::size_t>(c)] += ce[static_cast<std::size_t>(c)];
    }
    add_outer(grad.data() + t_ew.offset, dz_e, x_s[i]);
    add_vec(grad.data() + t_eb.offset, dz_e);
    add_matvec_t(ew, dz_e.size(), x_s[i].size(), dz_e, dx_s);

    Vec& dgi = dg[i];
    for (int c = 0; c < d + dw; ++c) dgi[static_cast<std::size_t>(c)] += dx_s[static_cast<std::size_t>(c)];
    for (int c = 0; c < d; ++c) dh_cls[static_cast<std::size_t>(c)] += dx_s[static_cast<std::size_t>(d + dw + c)];
  }

  // Span representation backward: max pool routing + width embeddings.
  for (std::size_t i = 0; i < n_items; ++i) {
    const ItemSpan& it = items[i];
    for (int c = 0; c < d; ++c) {
      dh[static_cast<std::size_t>(pool_argmax[i][static_cast<std::size_t>(c)])]
        [static_cast<std::size_t>(c)] += dg[i][static_cast<std::size_t>(c)];
    }
    double* dwidth = grad.data() + t_w.offset +
                     static_cast<std::size_t>(it.width - 1) * dw;
    for (int c = 0; c < dw; ++c) dwidth[c] += dg[i][static_cast<std::size_t>(d + c)];
  }

  if (!toy) return total;

  // ---- Toy encoder backward ----
  // Recreate the forward inputs (lookups and averages only).
  auto emb = params.view("embeddings");
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::vector<Vec> e(static_cast<std::size_t>(n));
  std::vector<Vec> u_mean(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    ids[static_cast<std::size_t>(t)] =
        params.token_id(doc.tokens[static_cast<std::size_t>(begin + t)].text);
    e[static_cast<std::size_t>(t)].assign(
        emb.begin() + static_cast<std::size_t>(ids[static_cast<std::size_t>(t)]) * d,
        emb.begin() + static_cast<std::size_t>(ids[static_cast<std::size_t>(t)] + 1) * d);
  }
  for (int t = 0; t < n; ++t) {
    const int lo = t > 0 ? t - 1 : 0;
    const int hi = t + 1 < n ? t + 1 : n - 1;
    Vec u(static_cast<std::size_t>(d), 0.0);
    for (int s = lo; s <= hi; ++s) {
      for (int c = 0; c < d; ++c) u[static_cast<std::size_t>(c)] += e[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo + 1);
    for (double& v : u) v *= inv;
    u_mean[static_cast<std::size_t>(t)] = std::move(u);
  }
  Vec mean_h(static_cast<std::size_t>(d), 0.0);
  for (int t = 0; t < n; ++t) {
    for (int c = 0; c < d; ++c) mean_h[static_cast<std::size_t>(c)] += enc.h[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
  }
  for (double& v : mean_h) v /= static_cast<double>(n);

  const TensorInfo& t_cw = params.info("cls_weight");
  const TensorInfo& t_cb = params.info("cls_bias");
  const TensorInfo& t_ms = params.info("mix_self");
  const TensorInfo& t_mn = params.info("mix_neighbor");
  const TensorInfo& t_mb = params.info("mix_bias");
  const TensorInfo& t_emb = params.info("embeddings");

  // h_cls = tanh(Wc mean_h + bc)
  Vec da_cls(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) {
    const double h = enc.h_cls[static_cast<std::size_t>(c)];
    da_cls[static_cast<std::size_t>(c)] = dh_cls[static_cast<std::size_t>(c)] * (1.0 - h * h);
  }
  add_outer(grad.data() + t_cw.offset, da_cls, mean_h);
  add_vec(grad.data() + t_cb.offset, da_cls);
  Vec dmean(static_cast<std::size_t>(d), 0.0);
  add_matvec_t(params.view("cls_weight"), static_cast<std::size_t>(d),
               static_cast<std::size_t>(d), da_cls, dmean);
  for (int t = 0; t < n; ++t) {
    for (int c = 0; c < d; ++c) {
      dh[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] +=
          dmean[static_cast<std::size_t>(c)] / static_cast<double>(n);
    }
  }

  // h_t = tanh(Ws e_t + Wn u_mean_t + b)
  std::vector<Vec> de(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(d), 0.0));
  for (int t = 0; t < n; ++t) {
    Vec da(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
      const double h = enc.h[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
      da[static_cast<std::size_t>(c)] = dh[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] * (1.0 - h * h);
    }
    add_outer(grad.data() + t_ms.offset, da, e[static_cast<std::size_t>(t)]);
    add_outer(grad.data() + t_mn.offset, da, u_mean[static_cast<std::size_t>(t)]);
    add_vec(grad.data() + t_mb.offset, da);
    add_matvec_t(params.view("mix_self"), static_cast<std::size_t>(d),
                 static_cast<std::size_t>(d), da, de[static_cast<std::size_t>(t)]);
    Vec du(static_cast<std::size_t>(d), 0.0);
    add_matvec_t(params.view("mix_neighbor"), static_cast<std::size_t>(d),
                 static_cast<std::size_t>(d), da, du);
    const int lo = t > 0 ? t - 1 : 0;
    const int hi = t + 1 < n ? t + 1 : n - 1;
    const double inv = 1.0 / static_cast<double>(hi - lo + 1);
    for (int s = lo; s <= hi; ++s) {
      for (int c = 0; c < d; ++c) {
        de[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)] += du[static_cast<std::size_t>(c)] * inv;
      }
    }
  }
  for (int t = 0; t < n; ++t) {
    double* row = grad.data() + t_emb.offset +
                  static_cast<std::size_t>(ids[static_cast<std::size_t>(t)]) * d;
    for (int c = 0; c < d; ++c) row[c] += de[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct SentenceRef {
  int doc = 0;
  int sentence = 0;
};

std::vector<std::string> build_vocab(const std::vector<TokenizedDocument>& docs) {
  std::set<std::string> words;
  for (const TokenizedDocument& doc : docs) {
    for (const Token& t : doc.tokens) {
      std::string lowered = t.text;
      for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.insert(std::move(lowered));
    }
  }
  std::vector<std::string> vocab;
  vocab.reserve(words.size() + 1);
  vocab.emplace_back("<unk>");
  vocab.insert(vocab.end(), words.begin(), words.end());
  return vocab;
}

}  // namespace

TrainResult train(const CorpusPartition& corpus, const ModelConfig& config,
                  const LabelInventory& inv, const EmbeddingFile* side,
                  int threads) {
  if (corpus.docs.empty()) {
    throw std::invalid_argument("train: empty corpus");
  }
  if (config.encoder == EncoderKind::File && !side) {
    throw std::invalid_argument("train: file encoder requires embeddings");
  }

  // Reject config/inventory mismatches before any work happens.
  for (const AnnotatedDoc& ad : corpus.docs) {
    for (const Event& e : ad.anns.events) {
      for (const Argument& a : e.arguments) {
        if (a.kind == Argument::Kind::SpanOnly &&
            inv.entity_label(a.span_only_type) < 0) {
          throw std::invalid_argument(
              "train: corpus uses " + std::string(to_string(a.span_only_type)) +
              " but the inventory excludes it (document " + ad.doc.id + ")");
        }
        if (a.kind == Argument::Kind::Labeled &&
            inv.subtype_index(a.labeled_type, a.subtype) < 0) {
          throw std::invalid_argument(
              "train: subtype '" + std::string(to_string(a.subtype)) +
              "' outside the inventory (document " + ad.doc.id + ")");
        }
      }
    }
    if (config.encoder == EncoderKind::File && !side->count(ad.doc.id)) {
      throw std::invalid_argument("train: no embeddings record for document " +
                                  ad.doc.id);
    }
  }

  std::vector<TokenizedDocument> tokenized;
  tokenized.reserve(corpus.docs.size());
  for (const AnnotatedDoc& ad : corpus.docs) {
    tokenized.push_back(tokenize(ad.doc.section_text, ad.doc.id));
  }

  std::vector<SentenceRef> refs;
  for (std::size_t i = 0; i < tokenized.size(); ++i) {
    for (std::size_t s = 0; s < tokenized[i].sentences.size(); ++s) {
      refs.push_back(SentenceRef{static_cast<int>(i), static_cast<int>(s)});
    }
  }
  if (refs.empty()) throw std::invalid_argument("train: corpus has no sentences");

  std::vector<std::string> vocab;
  if (config.encoder == EncoderKind::Toy) vocab = build_vocab(tokenized);

  TrainResult result{ModelParams::init(config, inv, std::move(vocab)), {}};
  ModelParams& params = result.params;
  const std::size_t P = params.data().size();

  const int B = std::max(1, config.batch_size);
  std::vector<std::vector<double>> slot_grads(static_cast<std::size_t>(B));
  std::vector<double> slot_loss(static_cast<std::size_t>(B), 0.0);

  std::vector<std::size_t> order(refs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(config.seed, 0x5AFF1EULL, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(B)) {
      const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(B), order.size() - start);
      parallel_for(m, threads, [&](std::size_t k) {
        const SentenceRef& ref = refs[order[start + k]];
        const TokenizedDocument& doc = tokenized[static_cast<std::size_t>(ref.doc)];
        TrainingBatch batch = build_training_batch(
            doc, ref.sentence, corpus.docs[static_cast<std::size_t>(ref.doc)].anns,
            inv, config,
            Rng::mix(config.seed, static_cast<std::uint64_t>(epoch) + 1,
                     order[start + k] + 1));
        slot_grads[k].assign(P, 0.0);
        slot_loss[k] = loss_and_gradient(doc, batch, params, side, slot_grads[k]);
      });
      // Deterministic reduce in slot order, then one SGD step on the mean.
      const double scale = config.learning_rate / static_cast<double>(m);
      std::vector<double>& data = params.data();
      for (std::size_t k = 0; k < m; ++k) {
        epoch_loss += slot_loss[k];
        const std::vector<double>& g = slot_grads[k];
        for (std::size_t i = 0; i < P; ++i) data[i] -= scale * g[i];
      }
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(refs.size()));
    if (log_level() >= 1 && (epoch % 10 == 0 || epoch + 1 == config.epochs)) {
      log_line("epoch " + std::to_string(epoch) + " mean loss " +
               std::to_string(result.epoch_mean_loss.back()));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

double gradient_check(const ModelParams& params, const TokenizedDocument& doc,
                      const TrainingBatch& batch, const EmbeddingFile* side,
                      double epsilon, int min_coords, std::uint64_t seed) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be > 0");
  const std::size_t P = params.data().size();
  std::vector<double> analytic(P, 0.0);
  const double base = loss_and_gradient(doc, batch, params, side, analytic);
  if (!std::isfinite(base)) throw std::runtime_error("non-finite loss");

  // Same loss through the slow path guards the fused implementation.
  const double slow = loss(forward_for_batch(doc, batch, params, side), batch);
  if (std::abs(base - slow) > 1e-9 * std::max(1.0, std::abs(base))) {
    throw std::runtime_error("fused loss disagrees with forward_for_batch");
  }

  std::vector<std::size_t> coords(P);
  for (std::size_t i = 0; i < P; ++i) coords[i] = i;
  Rng rng(seed);
  rng.shuffle(coords);
  const std::size_t n_coords = std::min<std::size_t>(P, static_cast<std::size_t>(min_coords));

  ModelParams work = params;
  double max_rel = 0;
  for (std::size_t k = 0; k < n_coords; ++k) {
    const std::size_t i = coords[k];
    const double saved = work.data()[i];
    work.data()[i] = saved + epsilon;
    const double up = loss(forward_for_batch(doc, batch, work, side), batch);
    work.data()[i] = saved - epsilon;
    const double down = loss(forward_for_batch(doc, batch, work, side), batch);
    work.data()[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::runtime_error("non-finite loss");
    }
    const double fd = (up - down) / (2 * epsilon);
    const double a = analytic[i];
    const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace sdoh
