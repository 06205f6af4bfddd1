// Post-LN transformer encoder with CLS pooling and four heads:
// correlation scoring, contradiction tagging, masked-LM and an optional
// fine-tuning scorer. All heads share one ParameterStore with the encoder.

#ifndef EVENTBERT_MODEL_H_
#define EVENTBERT_MODEL_H_

#include <cstdint>
#include <vector>

#include "eventbert/autograd.h"
#include "eventbert/rng.h"

namespace eventbert {

struct ModelConfig {
  size_t vocab_size = 0;
  size_t d_model = 64;
  size_t n_layers = 2;
  size_t n_heads = 4;
  size_t ffn_dim = 256;
  size_t max_len = 128;
  double dropout = 0.1;

  // Throws ConfigError.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class HeadInit {
  kRandom,      // N(0, 0.02) everywhere
  kZeroOutput,  // scoring/tagging output layers start at zero
};

struct EncoderOutput {
  Mat hidden;  // one row per input token, CLS first
  Vec pooled;  // == hidden.row(0)
};

class Model {
 public:
  Model(const ModelConfig& config, uint64_t seed, HeadInit heads = HeadInit::kRandom);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Fresh randomly initialized fine-tuning scorer; replaces any previous one.
  void add_task_head(uint64_t seed);
  bool has_task_head() const { return params_.contains("task.out.weight"); }

  struct Encoded {
    Tape::Var hidden;
    std::vector<Segment> segments;
  };

  // Packs the sequences row-wise and runs the encoder. Sequences must already
  // carry CLS/SEP. Dropout is applied only when `dropout_rng` is non-null.
  // Throws InputError on over-long input or unknown ids.
  Encoded encode(Tape& tape, const std::vector<std::vector<int>>& sequences,
                 Rng* dropout_rng = nullptr) const;

  // Hidden state of each sequence's first token.
  Tape::Var pool(Tape& tape, const Encoded& enc) const;

  Tape::Var correlation_head(Tape& tape, Tape::Var pooled) const;    // n x 1 scores
  Tape::Var contradiction_head(Tape& tape, Tape::Var hidden) const;  // n x 1 logits
  Tape::Var task_head(Tape& tape, Tape::Var pooled) const;           // n x 1 scores
  Tape::Var mlm_head(Tape& tape, Tape::Var hidden) const;            // n x vocab logits

  // Loads another model's parameter values; shapes and names must match.
  void copy_values_from(const Model& other);

 private:
  Tape::Var mlp_head(Tape& tape, Tape::Var x, const char* prefix) const;
  void add_head(const char* prefix, ParamGroup group, Rng& rng, bool zero_output);
  size_t add_matrix(const std::string& name, size_t rows, size_t cols, ParamGroup group,
                    Rng& rng);
  size_t add_vector(const std::string& name, size_t cols, double fill, ParamGroup group);

  ModelConfig config_;
  ParameterStore params_;
};

// Inference convenience: encodes a single wrapped sequence, dropout off.
EncoderOutput encode(const Model& model, const std::vector<int>& token_ids);
double correlation_score(const Model& model, const Vec& pooled);
double contradiction_prob(const Model& model, const Vec& hidden);
// Softmax distribution over the vocabulary for every row of `hidden`.
Mat mlm_distribution(const Model& model, const Mat& hidden);

double sigmoid(double x);

}  // namespace eventbert

#endif  // EVENTBERT_MODEL_H_
