#include "eventbert/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "eventbert/checkpoint.h"
#include "eventbert/errors.h"
#include "eventbert/trainer.h"

namespace eventbert {

void MultiChoiceInstance::validate() const {
  if (candidates.size() < 2) throw DataError("instance " + id + ": fewer than two candidates");
  if (gold && *gold >= candidates.size()) throw DataError("instance " + id + ": gold out of range");
}

Json to_json(const MultiChoiceInstance& inst) {
  Json j;
  if (!inst.id.empty()) j["id"] = inst.id;
  j["fw"] = inst.fw;
  j["bw"] = inst.bw;
  j["candidates"] = inst.candidates;
  if (inst.gold) j["gold"] = *inst.gold;
  return j;
}

MultiChoiceInstance instance_from_json(const Json& j) {
  MultiChoiceInstance inst;
  try {
    if (j.contains("id")) inst.id = j.at("id").get<std::string>();
    inst.fw = j.at("fw").get<std::vector<std::string>>();
    inst.bw = j.at("bw").get<std::vector<std::string>>();
    inst.candidates = j.at("candidates").get<std::vector<std::vector<std::string>>>();
    if (j.contains("gold") && !j.at("gold").is_null()) inst.gold = j.at("gold").get<size_t>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed instance: ") + e.what());
  }
  inst.validate();
  return inst;
}

std::vector<MultiChoiceInstance> read_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<MultiChoiceInstance> out;
  for_each_jsonl(in, path, [&](size_t, const Json& j) { out.push_back(instance_from_json(j)); });
  return out;
}

void write_instances(const std::string& path, const std::vector<MultiChoiceInstance>& items) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& i : items) write_jsonl_line(out, to_json(i));
}

std::vector<int> splice(const Vocab& vocab, const MultiChoiceInstance& inst, size_t candidate,
                        size_t max_len, Span* span, const std::vector<int>* replacement) {
  const auto& cand = inst.candidates.at(candidate);
  const std::vector<int> a = replacement ? *replacement : vocab.encode(cand);
  const size_t budget = max_len - 2;
  if (a.size() > budget)
    throw DataError("instance " + inst.id + ": candidate longer than the sequence budget");
  const size_t total = inst.fw.size() + a.size() + inst.bw.size();
  size_t cut_fw = 0, cut_bw = 0;
  if (total > budget) {
    const size_t excess = total - budget;
    cut_fw = std::min(inst.fw.size(), (excess + 1) / 2);
    cut_bw = std::min(inst.bw.size(), excess - cut_fw);
    cut_fw = std::min(inst.fw.size(), excess - cut_bw);
  }
  std::vector<int> ids{Vocab::kCls};
  for (size_t i = cut_fw; i < inst.fw.size(); ++i) ids.push_back(vocab.id(inst.fw[i]));
  const size_t begin = ids.size();
  ids.insert(ids.end(), a.begin(), a.end());
  if (span) *span = {begin, ids.size()};
  for (size_t i = 0; i + cut_bw < inst.bw.size(); ++i) ids.push_back(vocab.id(inst.bw[i]));
  ids.push_back(Vocab::kSep);
  return ids;
}

std::vector<double> sequence_scores(const Model& model, const std::vector<std::vector<int>>& seqs,
                                    bool task) {
  constexpr size_t kChunk = 64;
  std::vector<double> out;
  out.reserve(seqs.size());
  for (size_t i = 0; i < seqs.size(); i += kChunk) {
    const std::vector<std::vector<int>> chunk(
        seqs.begin() + static_cast<std::ptrdiff_t>(i),
        seqs.begin() + static_cast<std::ptrdiff_t>(std::min(seqs.size(), i + kChunk)));
    Tape tape(false);
    const auto enc = model.encode(tape, chunk);
    const auto pooled = model.pool(tape, enc);
    const Mat& s = tape.value(task ? model.task_head(tape, pooled)
                                   : model.correlation_head(tape, pooled));
    for (Eigen::Index r = 0; r < s.rows(); ++r) out.push_back(s(r, 0));
  }
  return out;
}

Answer pick_answer(std::vector<double> scores) {
  Answer a;
  a.scores = std::move(scores);
  for (size_t i = 1; i < a.scores.size(); ++i)
    if (a.scores[i] > a.scores[a.chosen]) a.chosen = i;
  for (size_t i = 0; i < a.scores.size(); ++i)
    if (i != a.chosen && a.scores[i] == a.scores[a.chosen]) a.tie = true;
  return a;
}

namespace {

std::vector<std::vector<int>> spliced_candidates(const Model& model, const Vocab& vocab,
                                                 const MultiChoiceInstance& inst) {
  inst.validate();
  std::vector<std::vector<int>> seqs;
  for (size_t c = 0; c < inst.candidates.size(); ++c)
    seqs.push_back(splice(vocab, inst, c, model.config().max_len));
  return seqs;
}

}  // namespace

Answer zero_shot_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst,
                        bool length_norm) {
  std::vector<double> scores = sequence_scores(model, spliced_candidates(model, vocab, inst));
  if (length_norm)
    for (size_t c = 0; c < scores.size(); ++c)
      scores[c] /= static_cast<double>(std::max<size_t>(1, inst.candidates[c].size()));
  return pick_answer(std::move(scores));
}

Answer task_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst) {
  if (!model.has_task_head()) throw ContractError("model has no task head");
  return pick_answer(sequence_scores(model, spliced_candidates(model, vocab, inst), true));
}

GreedyTrace mlm_greedy_score(const Model& model, const Vocab& vocab,
                             const MultiChoiceInstance& inst, size_t candidate) {
  const auto& cand = inst.candidates.at(candidate);
  if (cand.empty()) throw DataError("instance " + inst.id + ": empty candidate");
  const std::vector<int> actual = vocab.encode(cand);
  const std::vector<int> masks(actual.size(), Vocab::kMask);
  Span span;
  std::vector<int> ids = splice(vocab, inst, candidate, model.config().max_len, &span, &masks);

  std::vector<size_t> masked;
  for (size_t p = span.begin; p < span.end; ++p) masked.push_back(p);
  GreedyTrace trace;
  while (!masked.empty()) {
    trace.masked_counts.push_back(masked.size());
    ++trace.passes;
    const EncoderOutput out = encode(model, ids);
    Mat rows(static_cast<Eigen::Index>(masked.size()), out.hidden.cols());
    for (size_t k = 0; k < masked.size(); ++k)
      rows.row(static_cast<Eigen::Index>(k)) = out.hidden.row(static_cast<Eigen::Index>(masked[k]));
    const Mat dist = mlm_distribution(model, rows);
    size_t best_k = 0;
    Eigen::Index best_token = 0;
    double best_p = -1;
    for (size_t k = 0; k < masked.size(); ++k) {
      Eigen::Index tok;
      const double p = dist.row(static_cast<Eigen::Index>(k)).maxCoeff(&tok);
      if (p > best_p || (p == best_p && tok < best_token)) {
        best_p = p;
        best_token = tok;
        best_k = k;
      }
    }
    const size_t pos = masked[best_k];
    const double p_true = dist(static_cast<Eigen::Index>(best_k), actual[pos - span.begin]);
    trace.probability *= p_true;
    trace.log_probability += std::log(p_true);
    ids[pos] = static_cast<int>(best_token);
    masked.erase(masked.begin() + static_cast<std::ptrdiff_t>(best_k));
  }
  return trace;
}

Answer mlm_greedy_answer(const Model& model, const Vocab& vocab, const MultiChoiceInstance& inst) {
  inst.validate();
  std::vector<double> scores;
  for (size_t c = 0; c < inst.candidates.size(); ++c)
    scores.push_back(mlm_greedy_score(model, vocab, inst, c).log_probability);
  return pick_answer(std::move(scores));
}

double heldout_ranking_accuracy(const Model& model, const Vocab& vocab,
                                const std::vector<TrainingExample>& examples,
                                const std::vector<NegativeSet>& negatives, RankingTask task,
                                size_t m) {
  if (examples.empty()) return 0;
  TrainConfig config;
  config.m = m;
  config.batch_size = 16;
  size_t hits = 0;
  for (const auto& batch : make_batches(examples, negatives, vocab, config, model.config().max_len, 0)) {
    std::vector<std::vector<int>> seqs;
    for (const auto& item : batch) {
      seqs.push_back(item.positive);
      const auto& negs = task == RankingTask::kCer ? item.event_negatives : item.relation_negatives;
      seqs.insert(seqs.end(), negs.begin(), negs.end());
    }
    const auto scores = sequence_scores(model, seqs);
    for (size_t b = 0; b < batch.size(); ++b) {
      const size_t base = b * (m + 1);
      bool hit = true;
      for (size_t k = 1; k <= m; ++k)
        if (!(scores[base] > scores[base + k])) hit = false;
      hits += hit;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

HeldoutSplit heldout_split(size_t n, double fraction, uint64_t seed) {
  if (fraction < 0 || fraction >= 1) throw ConfigError("held-out fraction must be in [0, 1)");
  size_t k = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k == 0 && n > 1 && fraction > 0) k = 1;
  const auto order = epoch_order(n, derive_seed(seed, "heldout"), 0);
  HeldoutSplit split;
  split.heldout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::sort(split.heldout.begin(), split.heldout.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

FinetuneConfig FinetuneConfig::paper() { return FinetuneConfig{}; }

FinetuneConfig FinetuneConfig::desk() {
  FinetuneConfig c;
  c.lr = 5e-4;
  c.warmup_steps = 20;
  c.max_steps = 200;
  c.batch_size = 8;
  c.eval_every = 20;
  return c;
}

double accuracy(const Model& model, const Vocab& vocab,
                const std::vector<MultiChoiceInstance>& instances, Scorer scorer,
                bool length_norm) {
  if (instances.empty()) return 0;
  size_t correct = 0;
  for (const auto& inst : instances) {
    if (!inst.gold) throw DataError("instance " + inst.id + " has no gold label");
    Answer a;
    switch (scorer) {
      case Scorer::kZeroShot: a = zero_shot_answer(model, vocab, inst, length_norm); break;
      case Scorer::kGreedyMlm: a = mlm_greedy_answer(model, vocab, inst); break;
      case Scorer::kTask: a = task_answer(model, vocab, inst); break;
    }
    correct += a.chosen == *inst.gold;
  }
  return static_cast<double>(correct) / static_cast<double>(instances.size());
}

FinetuneResult finetune_multichoice(Model& model, const Vocab& vocab,
                                    const std::vector<MultiChoiceInstance>& train,
                                    const std::vector<MultiChoiceInstance>& dev,
                                    const FinetuneConfig& config) {
  if (dev.empty()) throw ConfigError("fine-tuning requires a dev split");
  if (train.empty()) throw DataError("fine-tuning set is empty");
  for (const auto* set : {&train, &dev})
    for (const auto& inst : *set) {
      inst.validate();
      if (!inst.gold) throw DataError("instance " + inst.id + " has no gold label");
    }

  model.add_task_head(derive_seed(config.seed, "task-head"));
  TrainConfig opt;
  opt.seed = config.seed;
  opt.lr = config.lr;
  opt.warmup_steps = config.warmup_steps;
  opt.max_steps = config.max_steps;
  opt.batch_size = config.batch_size;
  opt.weight_decay = config.weight_decay;
  opt.grad_clip = config.grad_clip;
  opt.validate();

  auto& params = model.params();
  std::vector<char> trainable;
  for (const auto& p : params.all())
    trainable.push_back(p.group == ParamGroup::kEncoder || p.group == ParamGroup::kTask);
  AdamState adam = AdamState::zeros(params);

  FinetuneResult result;
  std::vector<Mat> best;
  auto evaluate = [&](size_t step) {
    const double acc = accuracy(model, vocab, dev, Scorer::kTask);
    result.dev_curve.emplace_back(step, acc);
    if (best.empty() || acc > result.best_dev_accuracy) {
      result.best_dev_accuracy = acc;
      result.best_step = step;
      best.clear();
      for (const auto& p : params.all()) best.push_back(p.value);
    }
  };

  size_t epoch = 0, cursor = 0;
  auto batches = batch_indices(train.size(), config.batch_size, config.seed, epoch);
  for (size_t step = 1; step <= config.max_steps; ++step) {
    if (cursor == batches.size()) {
      cursor = 0;
      batches = batch_indices(train.size(), config.batch_size, config.seed, ++epoch);
    }
    std::vector<std::vector<int>> seqs;
    std::vector<size_t> sizes;
    for (size_t i : batches[cursor]) {
      const auto& inst = train[i];
      const size_t gold = *inst.gold;
      seqs.push_back(splice(vocab, inst, gold, model.config().max_len));
      for (size_t c = 0; c < inst.candidates.size(); ++c)
        if (c != gold) seqs.push_back(splice(vocab, inst, c, model.config().max_len));
      sizes.push_back(inst.candidates.size());
    }
    ++cursor;
    Rng rng(derive_seed(config.seed, "finetune", step));
    Tape tape;
    const auto enc = model.encode(tape, seqs, &rng);
    const auto loss = tape.group_nll(model.task_head(tape, model.pool(tape, enc)), sizes);
    Gradients grads(params);
    tape.backward(loss, grads);
    grads.check_finite(params);
    clip_gradients(grads, config.grad_clip);
    adam_step(params, grads, adam, opt, trainable);
    if ((config.eval_every > 0 && step % config.eval_every == 0) || step == config.max_steps)
      evaluate(step);
  }
  for (size_t i = 0; i < params.size(); ++i) params[i].value = best[i];
  return result;
}

}  // namespace eventbert
