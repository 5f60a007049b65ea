#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "sdoh/model.hpp"

namespace sdoh {

namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[9] = "SDOHCKP1";
constexpr char kEmbeddingMagic[9] = "SDOHEMB1";

void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error(std::string("unexpected end of ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in, const char* what) {
  std::uint64_t lo = read_u32(in, what);
  std::uint64_t hi = read_u32(in, what);
  return lo | (hi << 32);
}

float read_f32(std::istream& in, const char* what) {
  std::uint32_t bits = read_u32(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

json config_to_json(const ModelConfig& c) {
  return json{{"hidden_dim", c.hidden_dim},
              {"width_dim", c.width_dim},
              {"max_span_width", c.max_span_width},
              {"neg_entity_samples", c.neg_entity_samples},
              {"neg_relation_samples", c.neg_relation_samples},
              {"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"relation_candidate_policy",
               std::string(to_string(c.relation_candidate_policy))},
              {"encoder", std::string(to_string(c.encoder))}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.width_dim = j.at("width_dim").get<int>();
  c.max_span_width = j.at("max_span_width").get<int>();
  c.neg_entity_samples = j.at("neg_entity_samples").get<int>();
  c.neg_relation_samples = j.at("neg_relation_samples").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  auto policy = parse_relation_policy(
      j.at("relation_candidate_policy").get<std::string>());
  auto encoder = parse_encoder_kind(j.at("encoder").get<std::string>());
  if (!policy || !encoder) {
    throw std::runtime_error("checkpoint field relation_candidate_policy/encoder: unknown value");
  }
  c.relation_candidate_policy = *policy;
  c.encoder = *encoder;
  return c;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  json header;
  header["format_version"] = 1;
  header["config"] = config_to_json(params.config());
  header["inventory"] = {
      {"include_method", params.inventory().include_method()},
      {"hash", params.inventory().hash()}};
  header["vocab"] = params.vocab();
  json tensors = json::array();
  for (const TensorInfo& t : params.tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  header["tensors"] = tensors;
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kCheckpointMagic, 8);
  write_u64(out, head.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (double v : params.data()) write_f32(out, static_cast<float>(v));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path,
                            const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw std::runtime_error(path + ": not a checkpoint file");
  }
  const std::uint64_t head_len = read_u64(in, "checkpoint header");
  std::string head(head_len, '\0');
  if (!in.read(head.data(), static_cast<std::streamsize>(head_len))) {
    throw std::runtime_error("unexpected end of checkpoint header");
  }
  json header = json::parse(head);
  if (header.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint format_version");
  }
  ModelConfig config = config_from_json(header.at("config"));
  if (expected) {
    auto check = [&](const char* field, long long want, long long got) {
      if (want != got) {
        throw std::runtime_error(std::string("checkpoint field ") + field +
                                 ": expected " + std::to_string(want) +
                                 ", found " + std::to_string(got));
      }
    };
    check("hidden_dim", expected->hidden_dim, config.hidden_dim);
    check("width_dim", expected->width_dim, config.width_dim);
    check("max_span_width", expected->max_span_width, config.max_span_width);
    if (expected->encoder != config.encoder) {
      throw std::runtime_error("checkpoint field encoder: kind mismatch");
    }
  }

  const bool include_method =
      header.at("inventory").at("include_method").get<bool>();
  LabelInventory inv(include_method);
  if (header.at("inventory").at("hash").get<std::uint64_t>() != inv.hash()) {
    throw std::runtime_error("checkpoint field inventory: hash mismatch");
  }
  std::vector<std::string> vocab =
      header.at("vocab").get<std::vector<std::string>>();

  ModelParams params(config, inv, std::move(vocab));
  const json& tensors = header.at("tensors");
  if (tensors.size() != params.tensors().size()) {
    throw std::runtime_error("checkpoint field tensors: count mismatch");
  }
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    const TensorInfo& t = params.tensors()[i];
    const json& tj = tensors.at(i);
    if (tj.at("name").get<std::string>() != t.name ||
        tj.at("rows").get<int>() != t.rows || tj.at("cols").get<int>() != t.cols) {
      throw std::runtime_error("checkpoint tensor " + t.name +
                               ": shape mismatch");
    }
  }
  for (double& v : params.data()) {
    v = static_cast<double>(read_f32(in, "tensor data"));
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error("trailing data after tensors");
  }
  return params;
}

// ---------------------------------------------------------------------------
// Embeddings sidecar
// ---------------------------------------------------------------------------

void save_embeddings(const std::string& path, const EmbeddingFile& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kEmbeddingMagic, 8);
  write_u64(out, embeddings.size());
  for (const auto& [id, record] : embeddings) {
    write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    write_u32(out, static_cast<std::uint32_t>(record.dim));
    write_u32(out, static_cast<std::uint32_t>(record.sentence_cls.size()));
    write_u32(out, static_cast<std::uint32_t>(record.tokens.size()));
    for (const Vec& v : record.sentence_cls) {
      for (double x : v) write_f32(out, static_cast<float>(x));
    }
    for (const Vec& v : record.tokens) {
      for (double x : v) write_f32(out, static_cast<float>(x));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

EmbeddingFile load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kEmbeddingMagic, 8) != 0) {
    throw std::runtime_error(path + ": not an embeddings file");
  }
  EmbeddingFile result;
  const std::uint64_t count = read_u64(in, "embeddings file");
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::uint32_t id_len = read_u32(in, "embeddings record");
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len)) {
      throw std::runtime_error("unexpected end of embeddings record");
    }
    DocumentEmbeddings rec;
    rec.dim = static_cast<int>(read_u32(in, "embeddings record"));
    const std::uint32_t n_sentences = read_u32(in, "embeddings record");
    const std::uint32_t n_tokens = read_u32(in, "embeddings record");
    rec.sentence_cls.resize(n_sentences);
    for (auto& v : rec.sentence_cls) {
      v.resize(static_cast<std::size_t>(rec.dim));
      for (double& x : v) x = read_f32(in, "embeddings data");
    }
    rec.tokens.resize(n_tokens);
    for (auto& v : rec.tokens) {
      v.resize(static_cast<std::size_t>(rec.dim));
      for (double& x : v) x = read_f32(in, "embeddings data");
    }
    result[id] = std::move(rec);
  }
  return result;
}

}  // namespace sdoh
