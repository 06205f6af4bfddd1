// Contrastive objectives (event ranking, contradiction tagging, relation
// ranking), their sum, and the masked-LM warmup loss.

#ifndef EVENTBERT_OBJECTIVES_H_
#define EVENTBERT_OBJECTIVES_H_

#include <span>
#include <string>
#include <vector>

#include "eventbert/autograd.h"
#include "eventbert/events.h"
#include "eventbert/model.h"
#include "eventbert/rng.h"
#include "eventbert/vocab.h"

namespace eventbert {

struct LossGrad {
  double loss;
  std::vector<double> grad;
};

// -log softmax(scores)[0]; scores[0] belongs to the original paragraph.
// Throws NumericalError on non-finite scores.
LossGrad cer_loss(std::span<const double> scores);
LossGrad drr_loss(std::span<const double> scores);

// Eq.-style tagging loss from probabilities: tokens of the original event
// are labelled consistent, tokens of replacement events contradictory.
// Throws ContractError when both lists are empty.
double cet_loss(std::span<const double> original_probs, std::span<const double> replaced_probs);

struct Ablation {
  bool cer = false;
  bool cet = false;
  bool drr = false;
};

// Parses "cer", "cet", "drr" or a comma list; "" means nothing ablated.
Ablation parse_ablation(const std::string& spec);

struct LossValues {
  double cer = 0;
  double cet = 0;
  double drr = 0;
  double total = 0;
};

double total_loss(const LossValues& components, const Ablation& ablation);

// One positive with its M event- and M relation-corrupted variants, all
// already wrapped with CLS/SEP. Spans index into the wrapped sequences.
struct ContrastiveBatchItem {
  std::string example_id;
  std::vector<int> positive;
  Span event;
  std::vector<std::vector<int>> event_negatives;
  std::vector<Span> replaced_events;
  std::vector<std::vector<int>> relation_negatives;
};

struct ContrastiveLoss {
  Tape::Var total;
  LossValues values;
  size_t supervised_tokens = 0;
};

// Encodes every sequence of the batch in one packed pass and builds the
// summed objective. CER and DRR are means over items; CET sums over the
// supervised tokens of an item and averages over items.
ContrastiveLoss contrastive_loss(Tape& tape, const Model& model,
                                 const std::vector<ContrastiveBatchItem>& batch,
                                 const Ablation& ablation, Rng* dropout_rng);

struct MlmItem {
  std::vector<int> input;    // corrupted, wrapped
  std::vector<size_t> positions;
  std::vector<int> targets;  // original ids at positions
};

// Selects floor(0.15 n) positions plus one more with probability equal to
// the fractional remainder, then applies 80/10/10 mask/random/keep.
MlmItem mask_tokens(const std::vector<int>& wrapped, size_t vocab_size, Rng& rng);

// Mean cross-entropy over every selected position of the batch. Items
// without selected positions are skipped; returns an invalid Var (id -1)
// when nothing is selected at all.
Tape::Var mlm_loss(Tape& tape, const Model& model, const std::vector<MlmItem>& batch,
                   Rng* dropout_rng, double* value = nullptr);

}  // namespace eventbert

#endif  // EVENTBERT_OBJECTIVES_H_
