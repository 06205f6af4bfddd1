#include "eventbert/model.h"

#include <cmath>

#include "eventbert/errors.h"

namespace eventbert {

void ModelConfig::validate() const {
  if (vocab_size < 5) throw ConfigError("vocab_size must cover reserved tokens and words");
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
    throw ConfigError("d_model must be a positive multiple of n_heads");
  if (n_layers == 0 || ffn_dim == 0) throw ConfigError("n_layers and ffn_dim must be positive");
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

size_t Model::add_matrix(const std::string& name, size_t rows, size_t cols, ParamGroup group,
                         Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 0.02);
  return params_.add(name, std::move(m), group, true);
}

size_t Model::add_vector(const std::string& name, size_t cols, double fill, ParamGroup group) {
  return params_.add(name, Mat::Constant(1, cols, fill), group, false);
}

void Model::add_head(const char* prefix, ParamGroup group, Rng& rng, bool zero_output) {
  const std::string p = prefix;
  const size_t d = config_.d_model;
  add_matrix(p + ".hidden.weight", d, d, group, rng);
  add_vector(p + ".hidden.bias", d, 0.0, group);
  size_t out = add_matrix(p + ".out.weight", d, 1, group, rng);
  if (zero_output) params_[out].value.setZero();
  add_vector(p + ".out.bias", 1, 0.0, group);
}

Model::Model(const ModelConfig& config, uint64_t seed, HeadInit heads) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const size_t d = config_.d_model;
  const auto enc = ParamGroup::kEncoder;
  add_matrix("embed.token", config_.vocab_size, d, enc, rng);
  add_matrix("embed.position", config_.max_len, d, enc, rng);
  add_vector("embed.ln.gamma", d, 1.0, enc);
  add_vector("embed.ln.beta", d, 0.0, enc);
  for (size_t l = 0; l < config_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* proj : {"q", "k", "v", "o"}) {
      add_matrix(p + "attn." + proj + ".weight", d, d, enc, rng);
      add_vector(p + "attn." + proj + ".bias", d, 0.0, enc);
    }
    add_vector(p + "attn.ln.gamma", d, 1.0, enc);
    add_vector(p + "attn.ln.beta", d, 0.0, enc);
    add_matrix(p + "ffn.in.weight", d, config_.ffn_dim, enc, rng);
    add_vector(p + "ffn.in.bias", config_.ffn_dim, 0.0, enc);
    add_matrix(p + "ffn.out.weight", config_.ffn_dim, d, enc, rng);
    add_vector(p + "ffn.out.bias", d, 0.0, enc);
    add_vector(p + "ffn.ln.gamma", d, 1.0, enc);
    add_vector(p + "ffn.ln.beta", d, 0.0, enc);
  }
  const bool zero = heads == HeadInit::kZeroOutput;
  add_head("cs", ParamGroup::kCorrelation, rng, zero);
  add_head("cet", ParamGroup::kContradiction, rng, zero);
  add_matrix("mlm.transform.weight", d, d, ParamGroup::kMlm, rng);
  add_vector("mlm.transform.bias", d, 0.0, ParamGroup::kMlm);
  add_vector("mlm.ln.gamma", d, 1.0, ParamGroup::kMlm);
  add_vector("mlm.ln.beta", d, 0.0, ParamGroup::kMlm);
  add_vector("mlm.bias", config_.vocab_size, 0.0, ParamGroup::kMlm);
}

void Model::add_task_head(uint64_t seed) {
  Rng rng(seed);
  if (has_task_head()) {
    const size_t d = config_.d_model;
    auto reinit = [&](const char* name, size_t rows, size_t cols, bool random) {
      Mat& m = params_[params_.index(name)].value;
      m.resize(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = random ? rng.normal(0.0, 0.02) : 0.0;
    };
    reinit("task.hidden.weight", d, d, true);
    reinit("task.hidden.bias", 1, d, false);
    reinit("task.out.weight", d, 1, true);
    reinit("task.out.bias", 1, 1, false);
    return;
  }
  add_head("task", ParamGroup::kTask, rng, false);
}

Model::Encoded Model::encode(Tape& tape, const std::vector<std::vector<int>>& sequences,
                             Rng* dropout_rng) const {
  Encoded enc;
  std::vector<int> ids;
  std::vector<int> positions;
  for (const auto& seq : sequences) {
    if (seq.empty()) throw InputError("empty input sequence");
    if (seq.size() > config_.max_len)
      throw InputError("sequence of length " + std::to_string(seq.size()) + " exceeds max_len " +
                       std::to_string(config_.max_len));
    enc.segments.push_back({ids.size(), seq.size()});
    for (size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] < 0 || static_cast<size_t>(seq[i]) >= config_.vocab_size)
        throw InputError("token id " + std::to_string(seq[i]) + " outside vocabulary");
      ids.push_back(seq[i]);
      positions.push_back(static_cast<int>(i));
    }
  }
  const double p = dropout_rng ? config_.dropout : 0.0;
  auto P = [&](const std::string& name) { return tape.param(params_, params_.index(name)); };
  auto drop = [&](Tape::Var x) { return p > 0 ? tape.dropout(x, p, *dropout_rng) : x; };
  auto linear = [&](Tape::Var x, const std::string& prefix) {
    return tape.add_row(tape.matmul(x, P(prefix + ".weight")), P(prefix + ".bias"));
  };

  Tape::Var x = tape.add(tape.embedding(params_, params_.index("embed.token"), ids),
                         tape.embedding(params_, params_.index("embed.position"), positions));
  x = drop(tape.layer_norm(x, P("embed.ln.gamma"), P("embed.ln.beta")));
  for (size_t l = 0; l < config_.n_layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    Tape::Var q = linear(x, pre + "attn.q");
    Tape::Var k = linear(x, pre + "attn.k");
    Tape::Var v = linear(x, pre + "attn.v");
    Tape::Var a = tape.attention(q, k, v, enc.segments, config_.n_heads);
    a = drop(linear(a, pre + "attn.o"));
    x = tape.layer_norm(tape.add(x, a), P(pre + "attn.ln.gamma"), P(pre + "attn.ln.beta"));
    Tape::Var f = tape.gelu(linear(x, pre + "ffn.in"));
    f = drop(linear(f, pre + "ffn.out"));
    x = tape.layer_norm(tape.add(x, f), P(pre + "ffn.ln.gamma"), P(pre + "ffn.ln.beta"));
  }
  enc.hidden = x;
  return enc;
}

Tape::Var Model::pool(Tape& tape, const Encoded& enc) const {
  std::vector<size_t> rows;
  rows.reserve(enc.segments.size());
  for (const auto& s : enc.segments) rows.push_back(s.offset);
  return tape.gather_rows(enc.hidden, std::move(rows));
}

Tape::Var Model::mlp_head(Tape& tape, Tape::Var x, const char* prefix) const {
  const std::string p = prefix;
  auto P = [&](const std::string& name) { return tape.param(params_, params_.index(name)); };
  Tape::Var h = tape.gelu(
      tape.add_row(tape.matmul(x, P(p + ".hidden.weight")), P(p + ".hidden.bias")));
  return tape.add_row(tape.matmul(h, P(p + ".out.weight")), P(p + ".out.bias"));
}

Tape::Var Model::correlation_head(Tape& tape, Tape::Var pooled) const {
  return mlp_head(tape, pooled, "cs");
}

Tape::Var Model::contradiction_head(Tape& tape, Tape::Var hidden) const {
  return mlp_head(tape, hidden, "cet");
}

Tape::Var Model::task_head(Tape& tape, Tape::Var pooled) const {
  return mlp_head(tape, pooled, "task");
}

Tape::Var Model::mlm_head(Tape& tape, Tape::Var hidden) const {
  auto P = [&](const std::string& name) { return tape.param(params_, params_.index(name)); };
  Tape::Var t = tape.gelu(
      tape.add_row(tape.matmul(hidden, P("mlm.transform.weight")), P("mlm.transform.bias")));
  t = tape.layer_norm(t, P("mlm.ln.gamma"), P("mlm.ln.beta"));
  return tape.add_row(tape.matmul_nt(t, P("embed.token")), P("mlm.bias"));
}

void Model::copy_values_from(const Model& other) {
  for (size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = other.params_[other.params_.index(params_[i].name)];
    if (src.value.rows() != params_[i].value.rows() || src.value.cols() != params_[i].value.cols())
      throw ConfigError("shape mismatch for parameter " + params_[i].name);
    params_[i].value = src.value;
  }
}

EncoderOutput encode(const Model& model, const std::vector<int>& token_ids) {
  Tape tape(false);
  auto enc = model.encode(tape, {token_ids});
  EncoderOutput out;
  out.hidden = tape.value(enc.hidden);
  out.pooled = out.hidden.row(0).transpose();
  return out;
}

double correlation_score(const Model& model, const Vec& pooled) {
  Tape tape(false);
  Mat row = pooled.transpose();
  return tape.scalar(model.correlation_head(tape, tape.constant(std::move(row))));
}

double contradiction_prob(const Model& model, const Vec& hidden) {
  Tape tape(false);
  Mat row = hidden.transpose();
  return sigmoid(tape.scalar(model.contradiction_head(tape, tape.constant(std::move(row)))));
}

Mat mlm_distribution(const Model& model, const Mat& hidden) {
  Tape tape(false);
  Mat logits = tape.value(model.mlm_head(tape, tape.constant(hidden)));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

}  // namespace eventbert
