#include "eventbert/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eventbert/errors.h"
#include "eventbert/manifest.h"

namespace eventbert {
namespace fs = std::filesystem;
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian");

constexpr const char* kFormat = "eventbert-checkpoint";
constexpr int kVersion = 1;

std::string encode_matrix(const Mat& m) {
  std::string bytes(static_cast<size_t>(m.size()) * sizeof(double), '\0');
  std::memcpy(bytes.data(), m.data(), bytes.size());
  return bytes;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint file missing: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mat decode_matrix(const std::string& bytes, size_t rows, size_t cols, const std::string& what) {
  if (bytes.size() != rows * cols * sizeof(double))
    throw DataError("checkpoint " + what + ": expected " + std::to_string(rows * cols) +
                    " values");
  Mat m(rows, cols);
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

Json save_matrix(const fs::path& root, const std::string& rel, const Mat& m) {
  const std::string bytes = encode_matrix(m);
  write_bytes(root / rel, bytes);
  return Json{{"file", rel}, {"sha256", sha256_hex(bytes)}};
}

Mat load_matrix(const fs::path& root, const Json& entry, size_t rows, size_t cols) {
  const std::string rel = entry.at("file").get<std::string>();
  const std::string bytes = read_bytes(root / rel);
  if (sha256_hex(bytes) != entry.at("sha256").get<std::string>())
    throw DataError("checkpoint file corrupted: " + rel);
  return decode_matrix(bytes, rows, cols, rel);
}

}  // namespace

AdamState AdamState::zeros(const ParameterStore& store) {
  AdamState s;
  for (const auto& p : store.all()) {
    s.m.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    s.v.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
  }
  return s;
}

Json to_json(const ModelConfig& c) {
  return Json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model}, {"n_layers", c.n_layers},
              {"n_heads", c.n_heads},       {"ffn_dim", c.ffn_dim}, {"max_len", c.max_len},
              {"dropout", c.dropout}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<size_t>();
  c.d_model = j.at("d_model").get<size_t>();
  c.n_layers = j.at("n_layers").get<size_t>();
  c.n_heads = j.at("n_heads").get<size_t>();
  c.ffn_dim = j.at("ffn_dim").get<size_t>();
  c.max_len = j.at("max_len").get<size_t>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

void save_checkpoint(const std::string& dir, const Model& model, const Vocab& vocab,
                     const Json& train, const AdamState* adam) {
  const fs::path target(dir);
  const fs::path tmp = target.string() + ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp / "params");
  if (adam) fs::create_directories(tmp / "optimizer");

  vocab.save((tmp / "vocab.txt").string());
  Json params = Json::array();
  const auto& store = model.params();
  for (size_t i = 0; i < store.size(); ++i) {
    const Parameter& p = store[i];
    Json entry = save_matrix(tmp, "params/" + p.name + ".bin", p.value);
    entry["name"] = p.name;
    entry["group"] = std::string(group_name(p.group));
    entry["decay"] = p.decay;
    entry["rows"] = p.value.rows();
    entry["cols"] = p.value.cols();
    params.push_back(std::move(entry));
  }
  Json optimizer = nullptr;
  if (adam) {
    if (adam->m.size() != store.size() || adam->v.size() != store.size())
      throw ContractError("optimizer state does not match the model");
    Json moments = Json::array();
    for (size_t i = 0; i < store.size(); ++i) {
      const std::string& name = store[i].name;
      moments.push_back(Json{{"name", name},
                             {"m", save_matrix(tmp, "optimizer/" + name + ".m.bin", adam->m[i])},
                             {"v", save_matrix(tmp, "optimizer/" + name + ".v.bin", adam->v[i])}});
    }
    optimizer = Json{{"step", adam->step}, {"moments", std::move(moments)}};
  }
  Json manifest{{"format", kFormat},
                {"version", kVersion},
                {"model", to_json(model.config())},
                {"vocab_sha256", sha256_file((tmp / "vocab.txt").string())},
                {"train", train},
                {"params", std::move(params)},
                {"optimizer", std::move(optimizer)}};
  {
    std::ofstream out(tmp / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("cannot write checkpoint manifest in " + tmp.string());
  }
  fs::remove_all(target);
  fs::rename(tmp, target);
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
  const fs::path root(dir);
  Json manifest;
  try {
    manifest = Json::parse(read_bytes(root / "manifest.json"));
  } catch (const Json::exception& e) {
    throw DataError("checkpoint manifest unreadable: " + std::string(e.what()));
  }
  try {
    if (manifest.at("format") != kFormat || manifest.at("version") != kVersion)
      throw DataError("not a supported checkpoint: " + dir);
    if (sha256_file((root / "vocab.txt").string()) != manifest.at("vocab_sha256"))
      throw DataError("checkpoint vocabulary corrupted: " + dir);
    const ModelConfig config = model_config_from_json(manifest.at("model"));
    Model model(config, 0);
    const Json& params = manifest.at("params");
    for (const auto& e : params)
      if (e.at("name").get<std::string>().starts_with("task.")) {
        model.add_task_head(0);
        break;
      }
    auto& store = model.params();
    if (params.size() != store.size())
      throw DataError("checkpoint has " + std::to_string(params.size()) +
                      " parameters, model expects " + std::to_string(store.size()));
    for (size_t i = 0; i < store.size(); ++i) {
      Parameter& p = store[i];
      const Json& e = params[i];
      if (e.at("name") != p.name) throw DataError("checkpoint parameter order differs at " + p.name);
      const size_t rows = e.at("rows"), cols = e.at("cols");
      if (rows != static_cast<size_t>(p.value.rows()) || cols != static_cast<size_t>(p.value.cols()))
        throw DataError("checkpoint shape mismatch for " + p.name);
      p.value = load_matrix(root, e, rows, cols);
    }
    std::optional<AdamState> adam;
    const Json& opt = manifest.at("optimizer");
    if (!opt.is_null()) {
      AdamState s;
      s.step = opt.at("step");
      const Json& moments = opt.at("moments");
      if (moments.size() != store.size()) throw DataError("optimizer state size mismatch");
      for (size_t i = 0; i < store.size(); ++i) {
        const size_t rows = store[i].value.rows(), cols = store[i].value.cols();
        s.m.push_back(load_matrix(root, moments[i].at("m"), rows, cols));
        s.v.push_back(load_matrix(root, moments[i].at("v"), rows, cols));
      }
      adam = std::move(s);
    }
    Vocab vocab = Vocab::load((root / "vocab.txt").string());
    if (vocab.size() != config.vocab_size) throw DataError("checkpoint vocabulary size mismatch");
    return LoadedCheckpoint{std::move(model), std::move(vocab), manifest.at("train"),
                            std::move(adam)};
  } catch (const Json::exception& e) {
    throw DataError("malformed checkpoint manifest: " + std::string(e.what()));
  }
}

std::string checkpoint_hash(const std::string& dir) { return sha256_tree(dir); }

}  // namespace eventbert
