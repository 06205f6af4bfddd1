#include "eventbert/objectives.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eventbert/errors.h"

namespace eventbert {

LossGrad cer_loss(std::span<const double> scores) {
  if (scores.empty()) throw ContractError("ranking loss needs at least one score");
  double mx = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericalError("non-finite ranking score");
    mx = std::max(mx, s);
  }
  double z = 0;
  for (double s : scores) z += std::exp(s - mx);
  LossGrad out;
  out.loss = mx + std::log(z) - scores[0];
  for (double s : scores) out.grad.push_back(std::exp(s - mx) / z);
  out.grad[0] -= 1.0;
  return out;
}

LossGrad drr_loss(std::span<const double> scores) { return cer_loss(scores); }

double cet_loss(std::span<const double> original_probs, std::span<const double> replaced_probs) {
  if (original_probs.empty() && replaced_probs.empty())
    throw ContractError("contradiction tagging has no supervised tokens");
  double loss = 0;
  for (double p : original_probs) loss -= std::log1p(-p);
  for (double p : replaced_probs) loss -= std::log(p);
  return loss;
}

Ablation parse_ablation(const std::string& spec) {
  Ablation a;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    if (part == "cer") a.cer = true;
    else if (part == "cet") a.cet = true;
    else if (part == "drr") a.drr = true;
    else throw ConfigError("unknown objective '" + part + "' in --ablate");
  }
  return a;
}

double total_loss(const LossValues& c, const Ablation& ablation) {
  return (ablation.cer ? 0.0 : c.cer) + (ablation.cet ? 0.0 : c.cet) +
         (ablation.drr ? 0.0 : c.drr);
}

ContrastiveLoss contrastive_loss(Tape& tape, const Model& model,
                                 const std::vector<ContrastiveBatchItem>& batch,
                                 const Ablation& ablation, Rng* dropout_rng) {
  if (batch.empty()) throw ContractError("empty contrastive batch");
  const bool need_events = !ablation.cer || !ablation.cet;
  const bool need_relations = !ablation.drr;

  std::vector<std::vector<int>> seqs;
  struct Layout {
    size_t positive;
    std::vector<size_t> events;
    std::vector<size_t> relations;
  };
  std::vector<Layout> layout;
  for (const auto& item : batch) {
    if (item.event_negatives.size() != item.replaced_events.size())
      throw ContractError(item.example_id + ": replaced-event spans missing");
    Layout l;
    l.positive = seqs.size();
    seqs.push_back(item.positive);
    if (need_events)
      for (const auto& s : item.event_negatives) {
        l.events.push_back(seqs.size());
        seqs.push_back(s);
      }
    if (need_relations)
      for (const auto& s : item.relation_negatives) {
        l.relations.push_back(seqs.size());
        seqs.push_back(s);
      }
    layout.push_back(std::move(l));
  }

  const auto enc = model.encode(tape, seqs, dropout_rng);
  ContrastiveLoss out;
  std::vector<Tape::Var> terms;
  const double n_items = static_cast<double>(batch.size());

  const bool need_scores = !ablation.cer || !ablation.drr;
  Tape::Var scores;
  if (need_scores) scores = model.correlation_head(tape, model.pool(tape, enc));

  auto ranking = [&](bool relations) {
    std::vector<size_t> rows;
    size_t group = 0;
    for (const auto& l : layout) {
      const auto& negs = relations ? l.relations : l.events;
      rows.push_back(l.positive);
      rows.insert(rows.end(), negs.begin(), negs.end());
      group = negs.size() + 1;
    }
    return tape.group_nll(tape.gather_rows(scores, std::move(rows)), group);
  };

  if (!ablation.cer) {
    Tape::Var cer = ranking(false);
    out.values.cer = tape.scalar(cer);
    terms.push_back(cer);
  }
  if (!ablation.drr) {
    Tape::Var drr = ranking(true);
    out.values.drr = tape.scalar(drr);
    terms.push_back(drr);
  }
  if (!ablation.cet) {
    std::vector<size_t> rows;
    std::vector<double> labels;
    for (size_t b = 0; b < batch.size(); ++b) {
      const auto& item = batch[b];
      const size_t base = enc.segments[layout[b].positive].offset;
      for (size_t i = item.event.begin; i < item.event.end; ++i) {
        rows.push_back(base + i);
        labels.push_back(0.0);
      }
      for (size_t k = 0; k < layout[b].events.size(); ++k) {
        const size_t off = enc.segments[layout[b].events[k]].offset;
        for (size_t i = item.replaced_events[k].begin; i < item.replaced_events[k].end; ++i) {
          rows.push_back(off + i);
          labels.push_back(1.0);
        }
      }
    }
    if (rows.empty()) throw ContractError("contradiction tagging has no supervised tokens");
    out.supervised_tokens = rows.size();
    Tape::Var logits = model.contradiction_head(tape, tape.gather_rows(enc.hidden, std::move(rows)));
    Tape::Var cet = tape.scale(tape.bce_with_logits_sum(logits, std::move(labels)), 1.0 / n_items);
    out.values.cet = tape.scalar(cet);
    terms.push_back(cet);
  }
  if (terms.empty()) throw ConfigError("every objective is ablated");
  out.total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) out.total = tape.add(out.total, terms[i]);
  out.values.total = tape.scalar(out.total);
  return out;
}

MlmItem mask_tokens(const std::vector<int>& wrapped, size_t vocab_size, Rng& rng) {
  MlmItem item;
  item.input = wrapped;
  // Interior positions only; CLS and SEP are never selected.
  std::vector<size_t> candidates;
  for (size_t i = 1; i + 1 < wrapped.size(); ++i) candidates.push_back(i);
  const double expected = 0.15 * static_cast<double>(candidates.size());
  size_t k = static_cast<size_t>(std::floor(expected));
  if (rng.bernoulli(expected - std::floor(expected))) ++k;
  k = std::min(k, candidates.size());
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<size_t> chosen(candidates.begin(), candidates.begin() + k);
  std::sort(chosen.begin(), chosen.end());
  for (size_t pos : chosen) {
    item.positions.push_back(pos);
    item.targets.push_back(wrapped[pos]);
    const double u = rng.uniform();
    if (u < 0.8) {
      item.input[pos] = Vocab::kMask;
    } else if (u < 0.9) {
      item.input[pos] = static_cast<int>(
          Vocab::kFirstWord + rng.below(vocab_size - static_cast<size_t>(Vocab::kFirstWord)));
    }
  }
  return item;
}

Tape::Var mlm_loss(Tape& tape, const Model& model, const std::vector<MlmItem>& batch,
                   Rng* dropout_rng, double* value) {
  std::vector<std::vector<int>> seqs;
  std::vector<const MlmItem*> used;
  for (const auto& item : batch) {
    if (item.positions.empty()) continue;
    seqs.push_back(item.input);
    used.push_back(&item);
  }
  if (seqs.empty()) return Tape::Var{};
  const auto enc = model.encode(tape, seqs, dropout_rng);
  std::vector<size_t> rows;
  std::vector<int> targets;
  for (size_t s = 0; s < used.size(); ++s)
    for (size_t i = 0; i < used[s]->positions.size(); ++i) {
      rows.push_back(enc.segments[s].offset + used[s]->positions[i]);
      targets.push_back(used[s]->targets[i]);
    }
  Tape::Var logits = model.mlm_head(tape, tape.gather_rows(enc.hidden, std::move(rows)));
  Tape::Var loss = tape.cross_entropy_mean(logits, std::move(targets));
  if (value) *value = tape.scalar(loss);
  return loss;
}

}  // namespace eventbert
