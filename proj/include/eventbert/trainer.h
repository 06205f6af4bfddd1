// AdamW optimization, batch assembly and the two-stage training loop
// (masked-LM warmup, then contrastive training) with resumable checkpoints.

#ifndef EVENTBERT_TRAINER_H_
#define EVENTBERT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "eventbert/checkpoint.h"
#include "eventbert/events.h"
#include "eventbert/model.h"
#include "eventbert/negatives.h"
#include "eventbert/objectives.h"
#include "eventbert/vocab.h"

namespace eventbert {

enum class Stage { kMlmWarmup, kContrastive };

std::string_view stage_name(Stage s);  // "mlm-warmup" or "contrastive"
// Accepts the names above and MLM_WARMUP / CONTRASTIVE. Throws ConfigError.
Stage parse_stage(std::string_view name);

struct TrainConfig {
  uint64_t seed = 7;
  double lr = 1e-4;
  size_t warmup_steps = 5000;
  size_t max_steps = 200000;
  size_t batch_size = 200;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
  size_t m = 5;
  Stage stage = Stage::kContrastive;
  Ablation ablation;
  size_t save_every = 0;  // 0: final checkpoint only
  size_t max_consecutive_skips = 10;

  // Throws ConfigError.
  void validate() const;

  static TrainConfig paper();
  static TrainConfig desk();
};

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);
// "key: checkpoint=<a> requested=<b>" for every differing field that affects
// the optimization trajectory (save_every is ignored).
std::vector<std::string> config_diff(const TrainConfig& checkpoint, const TrainConfig& requested);

// Linear warmup to lr over warmup_steps, then linear decay to 0 at
// max_steps. `step` counts from 1.
double lr_at(const TrainConfig& c, size_t step);

// Rescales to max_norm when the global norm exceeds it; returns the norm
// before clipping.
double clip_gradients(Gradients& grads, double max_norm);

// One bias-corrected AdamW update of the trainable parameters with
// decoupled decay lr * weight_decay on parameters flagged for decay.
// Increments state.step and uses lr_at(config, state.step).
void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config, const std::vector<char>& trainable);

// Groups that receive updates in each stage.
std::vector<char> trainable_mask(const ParameterStore& params, Stage stage);

// Seeded permutation of [0, n) for an epoch.
std::vector<size_t> epoch_order(size_t n, uint64_t seed, size_t epoch);
// Consecutive slices of epoch_order; the last one may be short.
std::vector<std::vector<size_t>> batch_indices(size_t n, size_t batch_size, uint64_t seed,
                                               size_t epoch);

// Wraps and encodes the positive and its first `m` event and relation
// negatives, truncating each sequence symmetrically around its corrupted
// span. Throws DataError when fewer than m negatives are present.
ContrastiveBatchItem make_batch_item(const TrainingExample& ex, const NegativeSet& negatives,
                                     const Vocab& vocab, size_t max_len, size_t m);

// Full epoch of contrastive batches. Throws DataError naming any example
// without a negative set.
std::vector<std::vector<ContrastiveBatchItem>> make_batches(
    const std::vector<TrainingExample>& examples, const std::vector<NegativeSet>& negatives,
    const Vocab& vocab, const TrainConfig& config, size_t max_len, size_t epoch);

// One wrapped sequence per distinct paragraph (first window seen).
std::vector<std::vector<int>> mlm_sequences(const std::vector<TrainingExample>& examples,
                                            const Vocab& vocab, size_t max_len);

struct StepMetrics {
  size_t step = 0;
  Stage stage = Stage::kContrastive;
  LossValues losses;
  double mlm = 0;
  double lr = 0;
  bool skipped = false;
};

Json to_json(const StepMetrics& m);

// Keeps large temporaries on the heap instead of fresh mmap pages; training
// allocates and frees multi-megabyte activations every step.
void tune_allocator();

class Trainer {
 public:
  // `negatives` may be empty for the warmup stage.
  Trainer(Model& model, const Vocab& vocab, TrainConfig config,
          const std::vector<TrainingExample>& examples,
          const std::vector<NegativeSet>& negatives);

  // Continues from a checkpoint written by this trainer. Throws ConfigError
  // with a diff report when the stored configuration differs.
  void resume(const LoadedCheckpoint& checkpoint);

  StepMetrics step();
  // Steps until max_steps, calling on_step after each. Writes
  // `<dir>/step-NNNNNN` every save_every steps and `<dir>/final` at the end
  // when `checkpoint_dir` is non-empty.
  void run(const std::string& checkpoint_dir,
           const std::function<void(const StepMetrics&)>& on_step = {});

  void save(const std::string& dir) const;
  Json state_json() const;
  size_t steps_done() const { return step_; }
  const TrainConfig& config() const { return config_; }

 private:
  const std::vector<size_t>& current_batch();
  double forward_backward(const std::vector<size_t>& batch, Rng& rng, Gradients& grads,
                          StepMetrics& metrics);

  Model& model_;
  const Vocab& vocab_;
  TrainConfig config_;
  const std::vector<TrainingExample>& examples_;
  std::vector<const NegativeSet*> negatives_;  // aligned with examples_
  std::vector<std::vector<int>> mlm_seqs_;
  AdamState adam_;
  std::vector<char> trainable_;
  size_t step_ = 0;
  size_t epoch_ = 0;
  size_t cursor_ = 0;
  size_t consecutive_skips_ = 0;
  std::vector<std::vector<size_t>> epoch_batches_;
  size_t epoch_batches_for_ = static_cast<size_t>(-1);
};

}  // namespace eventbert

#endif  // EVENTBERT_TRAINER_H_
