// Zero-shot correlation scoring, the greedy masked-LM baseline, held-out
// ranking accuracy and supervised multi-choice fine-tuning.

#ifndef EVENTBERT_EVAL_H_
#define EVENTBERT_EVAL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eventbert/events.h"
#include "eventbert/io.h"
#include "eventbert/model.h"
#include "eventbert/negatives.h"
#include "eventbert/vocab.h"

namespace eventbert {

struct MultiChoiceInstance {
  std::string id;
  std::vector<std::string> fw;
  std::vector<std::string> bw;
  std::vector<std::vector<std::string>> candidates;
  std::optional<size_t> gold;

  // Throws DataError: fewer than two candidates or gold out of range.
  void validate() const;
};

Json to_json(const MultiChoiceInstance& inst);
MultiChoiceInstance instance_from_json(const Json& j);
std::vector<MultiChoiceInstance> read_instances(const std::string& path);
void write_instances(const std::string& path, const std::vector<MultiChoiceInstance>& items);

// [CLS] fw a bw [SEP] with fw and bw trimmed symmetrically (from the far
// ends) until it fits. `replacement`, when given, stands in for the
// candidate's tokens. Returns the candidate's position via `span`. Throws
// DataError when the candidate alone exceeds max_len - 2.
std::vector<int> splice(const Vocab& vocab, const MultiChoiceInstance& inst, size_t candidate,
                        size_t max_len, Span* span = nullptr,
                        const std::vector<int>* replacement = nullptr);

// Correlation-head scores of wrapped sequences, dropout off, packed in
// chunks. `task` selects the fine-tuning head instead.
std::vector<double> sequence_scores(const Model& model, const std::vector<std::vector<int>>& seqs,
                                    bool task = false);

struct Answer {
  size_t chosen = 0;
  std::vector<double> scores;
  bool tie = false;  // another candidate shares the top score
};

// Argmax with ties going to the lowest index.
Answer pick_answer(std::vector<double> scores);

// With length_norm the score is divided by the candidate's token count.
Answer zero_shot_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst,
                        bool length_norm = false);

struct GreedyTrace {
  double probability = 1;     // product over committed steps
  double log_probability = 0;
  size_t passes = 0;
  std::vector<size_t> masked_counts;  // still-masked positions at each pass
};

// Masks the candidate and unmasks one position per pass, always committing
// the most probable (position, token) pair; ties go to the lowest token id,
// then the lowest position. Throws DataError for an empty candidate.
GreedyTrace mlm_greedy_score(const Model& model, const Vocab& vocab,
                             const MultiChoiceInstance& inst, size_t candidate);

// Candidate with the highest greedy probability.
Answer mlm_greedy_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst);

// Answer from the fine-tuned task head.
Answer task_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst);

enum class RankingTask { kCer, kDrr };

// Fraction of examples whose positive scores strictly above all m corrupted
// variants of the chosen kind.
double heldout_ranking_accuracy(const Model& model, const Vocab& vocab,
                                const std::vector<TrainingExample>& examples,
                                const std::vector<NegativeSet>& negatives, RankingTask task,
                                size_t m = 5);

struct HeldoutSplit {
  std::vector<size_t> train;
  std::vector<size_t> heldout;
};

// Seeded random split; heldout gets round(fraction * n) indices (at least
// one when n > 1). Both lists are ascending.
HeldoutSplit heldout_split(size_t n, double fraction = 0.02, uint64_t seed = 7);

struct FinetuneConfig {
  uint64_t seed = 7;
  double lr = 1e-5;
  size_t warmup_steps = 1000;
  size_t max_steps = 10000;
  size_t batch_size = 32;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
  size_t eval_every = 100;

  static FinetuneConfig paper();
  static FinetuneConfig desk();
};

struct FinetuneResult {
  double best_dev_accuracy = 0;
  size_t best_step = 0;
  std::vector<std::pair<size_t, double>> dev_curve;
};

// Adds a fresh task head and trains it together with the encoder on
// cross-entropy over candidate scores; restores the parameters with the best
// dev accuracy. Throws ConfigError when `dev` is empty and DataError for
// instances without gold labels.
FinetuneResult finetune_multichoice(Model& model, const Vocab& vocab,
                                    const std::vector<MultiChoiceInstance>& train,
                                    const std::vector<MultiChoiceInstance>& dev,
                                    const FinetuneConfig& config);

enum class Scorer { kZeroShot, kGreedyMlm, kTask };

// Accuracy over gold-labelled instances.
double accuracy(const Model& model, const Vocab& vocab,
                const std::vector<MultiChoiceInstance>& instances, Scorer scorer,
                bool length_norm = false);

}  // namespace eventbert

#endif  // EVENTBERT_EVAL_H_
