#include "eventbert/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <malloc.h>
#include <unordered_map>
#include <unordered_set>

#include "eventbert/errors.h"

namespace eventbert {

std::string_view stage_name(Stage s) {
  return s == Stage::kMlmWarmup ? "mlm-warmup" : "contrastive";
}

Stage parse_stage(std::string_view name) {
  if (name == "mlm-warmup" || name == "MLM_WARMUP") return Stage::kMlmWarmup;
  if (name == "contrastive" || name == "CONTRASTIVE") return Stage::kContrastive;
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (lr <= 0 || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (max_steps == 0) throw ConfigError("max_steps must be at least 1");
  if (warmup_steps > max_steps) throw ConfigError("warmup_steps must not exceed max_steps");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
  if (grad_clip <= 0) throw ConfigError("grad_clip must be positive");
  if (m < 1) throw ConfigError("M must be at least 1");
  if (ablation.cer && ablation.cet && ablation.drr)
    throw ConfigError("cannot ablate every objective");
  if (max_consecutive_skips < 1) throw ConfigError("max_consecutive_skips must be at least 1");
}

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.lr = 1e-3;
  c.warmup_steps = 100;
  c.max_steps = 2000;
  c.batch_size = 16;
  return c;
}

namespace {

std::string ablation_string(const Ablation& a) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(a.cer, "cer");
  add(a.cet, "cet");
  add(a.drr, "drr");
  return s;
}

}  // namespace

Json to_json(const TrainConfig& c) {
  return Json{{"seed", c.seed},
              {"lr", c.lr},
              {"warmup_steps", c.warmup_steps},
              {"max_steps", c.max_steps},
              {"batch_size", c.batch_size},
              {"weight_decay", c.weight_decay},
              {"grad_clip", c.grad_clip},
              {"M", c.m},
              {"stage", std::string(stage_name(c.stage))},
              {"ablate", ablation_string(c.ablation)},
              {"save_every", c.save_every},
              {"max_consecutive_skips", c.max_consecutive_skips}};
}

TrainConfig train_config_from_json(const Json& j) {
  try {
    TrainConfig c;
    c.seed = j.at("seed").get<uint64_t>();
    c.lr = j.at("lr").get<double>();
    c.warmup_steps = j.at("warmup_steps").get<size_t>();
    c.max_steps = j.at("max_steps").get<size_t>();
    c.batch_size = j.at("batch_size").get<size_t>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.grad_clip = j.at("grad_clip").get<double>();
    c.m = j.at("M").get<size_t>();
    c.stage = parse_stage(j.at("stage").get<std::string>());
    c.ablation = parse_ablation(j.at("ablate").get<std::string>());
    c.save_every = j.at("save_every").get<size_t>();
    c.max_consecutive_skips = j.at("max_consecutive_skips").get<size_t>();
    return c;
  } catch (const Json::exception& e) {
    throw DataError("malformed training configuration: " + std::string(e.what()));
  }
}

std::vector<std::string> config_diff(const TrainConfig& checkpoint, const TrainConfig& requested) {
  const Json a = to_json(checkpoint), b = to_json(requested);
  std::vector<std::string> out;
  for (const auto& [key, value] : a.items()) {
    if (key == "save_every") continue;
    if (value != b.at(key))
      out.push_back(key + ": checkpoint=" + value.dump() + " requested=" + b.at(key).dump());
  }
  return out;
}

double lr_at(const TrainConfig& c, size_t step) {
  if (step == 0) return 0;
  if (c.warmup_steps > 0 && step <= c.warmup_steps)
    return c.lr * static_cast<double>(step) / static_cast<double>(c.warmup_steps);
  if (step >= c.max_steps) return 0;
  return c.lr * static_cast<double>(c.max_steps - step) /
         static_cast<double>(c.max_steps - c.warmup_steps);
}

double clip_gradients(Gradients& grads, double max_norm) {
  const double norm = grads.global_norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config, const std::vector<char>& trainable) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (state.m.size() != params.size()) state = AdamState::zeros(params);
  ++state.step;
  const double lr = lr_at(config, state.step);
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    if (!trainable[i]) continue;
    Parameter& p = params[i];
    const Mat& g = grads[i];
    state.m[i] = kBeta1 * state.m[i] + (1 - kBeta1) * g;
    state.v[i] = kBeta2 * state.v[i] + (1 - kBeta2) * g.cwiseProduct(g);
    if (p.decay && config.weight_decay > 0) p.value *= 1.0 - lr * config.weight_decay;
    p.value.array() -=
        lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + kEps);
  }
}

std::vector<char> trainable_mask(const ParameterStore& params, Stage stage) {
  std::vector<char> mask;
  for (const auto& p : params.all()) {
    bool on = p.group == ParamGroup::kEncoder;
    if (stage == Stage::kMlmWarmup) on = on || p.group == ParamGroup::kMlm;
    if (stage == Stage::kContrastive)
      on = on || p.group == ParamGroup::kCorrelation || p.group == ParamGroup::kContradiction;
    mask.push_back(on);
  }
  return mask;
}

std::vector<size_t> epoch_order(size_t n, uint64_t seed, size_t epoch) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "epoch-order", epoch));
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<std::vector<size_t>> batch_indices(size_t n, size_t batch_size, uint64_t seed,
                                               size_t epoch) {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  const auto order = epoch_order(n, seed, epoch);
  std::vector<std::vector<size_t>> out;
  for (size_t i = 0; i < n; i += batch_size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  return out;
}

namespace {

// Wrapped ids of tokens cut to max_len - 2 around `keep`; returns the span
// shifted into the wrapped sequence.
std::vector<int> wrap_window(const Vocab& vocab, const std::vector<std::string>& tokens,
                             Span keep, size_t max_len, Span* shifted, Span* extra = nullptr) {
  const size_t budget = max_len - 2;
  if (keep.size() > budget) throw DataError("span longer than the sequence budget");
  const Span w = fit_window(tokens.size(), keep, budget);
  std::vector<std::string> cut(tokens.begin() + static_cast<std::ptrdiff_t>(w.begin),
                               tokens.begin() + static_cast<std::ptrdiff_t>(w.end));
  if (shifted) *shifted = {keep.begin - w.begin + 1, keep.end - w.begin + 1};
  if (extra) {
    if (extra->begin >= w.begin && extra->end <= w.end)
      *extra = {extra->begin - w.begin + 1, extra->end - w.begin + 1};
    else
      *extra = {0, 0};
  }
  return vocab.wrap(cut);
}

}  // namespace

ContrastiveBatchItem make_batch_item(const TrainingExample& ex, const NegativeSet& negatives,
                                     const Vocab& vocab, size_t max_len, size_t m) {
  if (negatives.event_negs.size() < m || negatives.rel_negs.size() < m)
    throw DataError("example " + ex.id + " has fewer than " + std::to_string(m) + " negatives");
  ContrastiveBatchItem item;
  item.example_id = ex.id;
  item.positive = wrap_window(vocab, ex.tokens, ex.event.span, max_len, &item.event);
  for (size_t k = 0; k < m; ++k) {
    const EventNegative& e = negatives.event_negs[k];
    Span shifted;
    item.event_negatives.push_back(wrap_window(vocab, e.tokens, e.span, max_len, &shifted));
    item.replaced_events.push_back(shifted);
  }
  for (size_t k = 0; k < m; ++k) {
    const RelationNegative& r = negatives.rel_negs[k];
    const Span both{std::min(r.relation.begin, r.event.begin), std::max(r.relation.end, r.event.end)};
    const Span keep = both.size() <= max_len - 2 ? both : r.relation;
    item.relation_negatives.push_back(wrap_window(vocab, r.tokens, keep, max_len, nullptr));
  }
  return item;
}

namespace {

std::vector<const NegativeSet*> align_negatives(const std::vector<TrainingExample>& examples,
                                                const std::vector<NegativeSet>& negatives) {
  std::unordered_map<std::string, const NegativeSet*> by_id;
  for (const auto& n : negatives) by_id.emplace(n.example_id, &n);
  std::vector<const NegativeSet*> out;
  for (const auto& ex : examples) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) throw DataError("example " + ex.id + " has no negative set");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<std::vector<ContrastiveBatchItem>> make_batches(
    const std::vector<TrainingExample>& examples, const std::vector<NegativeSet>& negatives,
    const Vocab& vocab, const TrainConfig& config, size_t max_len, size_t epoch) {
  const auto aligned = align_negatives(examples, negatives);
  std::vector<std::vector<ContrastiveBatchItem>> out;
  for (const auto& idx : batch_indices(examples.size(), config.batch_size, config.seed, epoch)) {
    std::vector<ContrastiveBatchItem> batch;
    for (size_t i : idx)
      batch.push_back(make_batch_item(examples[i], *aligned[i], vocab, max_len, config.m));
    out.push_back(std::move(batch));
  }
  return out;
}

std::vector<std::vector<int>> mlm_sequences(const std::vector<TrainingExample>& examples,
                                            const Vocab& vocab, size_t max_len) {
  std::unordered_set<std::string> seen;
  std::vector<std::vector<int>> out;
  for (const auto& ex : examples) {
    if (!seen.insert(ex.paragraph_id).second) continue;
    out.push_back(wrap_window(vocab, ex.tokens, ex.event.span, max_len, nullptr));
  }
  return out;
}

Json to_json(const StepMetrics& m) {
  Json j{{"step", m.step}, {"stage", std::string(stage_name(m.stage))}};
  if (m.stage == Stage::kContrastive) {
    j["cer"] = m.losses.cer;
    j["cet"] = m.losses.cet;
    j["drr"] = m.losses.drr;
  } else {
    j["mlm"] = m.mlm;
  }
  j["total"] = m.losses.total;
  j["lr"] = m.lr;
  if (m.skipped) j["skipped"] = true;
  return j;
}

void tune_allocator() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 256 << 20);
}

Trainer::Trainer(Model& model, const Vocab& vocab, TrainConfig config,
                 const std::vector<TrainingExample>& examples,
                 const std::vector<NegativeSet>& negatives)
    : model_(model), vocab_(vocab), config_(config), examples_(examples) {
  config_.validate();
  if (examples_.empty()) throw DataError("training set is empty");
  if (config_.stage == Stage::kContrastive) {
    negatives_ = align_negatives(examples_, negatives);
  } else {
    mlm_seqs_ = mlm_sequences(examples_, vocab_, model_.config().max_len);
  }
  adam_ = AdamState::zeros(model_.params());
  trainable_ = trainable_mask(model_.params(), config_.stage);
}

void Trainer::resume(const LoadedCheckpoint& ckpt) {
  const Json& train = ckpt.train;
  if (!train.contains("config") || !train.contains("state"))
    throw ConfigError("checkpoint carries no trainer state");
  const TrainConfig stored = train_config_from_json(train.at("config"));
  const auto diff = config_diff(stored, config_);
  if (!diff.empty()) {
    std::string report = "checkpoint/config mismatch:";
    for (const auto& d : diff) report += "\n  " + d;
    throw ConfigError(report);
  }
  if (!(ckpt.model.config() == model_.config()))
    throw ConfigError("checkpoint/config mismatch: model shape differs");
  if (ckpt.vocab.words() != vocab_.words())
    throw ConfigError("checkpoint/config mismatch: vocabulary differs");
  if (!ckpt.adam) throw ConfigError("checkpoint has no optimizer state");
  model_.copy_values_from(ckpt.model);
  adam_ = *ckpt.adam;
  const Json& s = train.at("state");
  step_ = s.at("step");
  epoch_ = s.at("epoch");
  cursor_ = s.at("cursor");
  consecutive_skips_ = s.at("consecutive_skips");
  epoch_batches_for_ = static_cast<size_t>(-1);
}

Json Trainer::state_json() const {
  return Json{{"config", to_json(config_)},
              {"state",
               {{"step", step_},
                {"epoch", epoch_},
                {"cursor", cursor_},
                {"consecutive_skips", consecutive_skips_}}}};
}

void Trainer::save(const std::string& dir) const {
  save_checkpoint(dir, model_, vocab_, state_json(), &adam_);
}

const std::vector<size_t>& Trainer::current_batch() {
  const size_t n = config_.stage == Stage::kContrastive ? examples_.size() : mlm_seqs_.size();
  if (epoch_batches_for_ != epoch_) {
    epoch_batches_ = batch_indices(n, config_.batch_size, config_.seed, epoch_);
    epoch_batches_for_ = epoch_;
  }
  return epoch_batches_[cursor_];
}

double Trainer::forward_backward(const std::vector<size_t>& batch, Rng& rng, Gradients& grads,
                                 StepMetrics& metrics) {
  Tape tape;
  const size_t max_len = model_.config().max_len;
  if (config_.stage == Stage::kContrastive) {
    std::vector<ContrastiveBatchItem> items;
    for (size_t i : batch)
      items.push_back(make_batch_item(examples_[i], *negatives_[i], vocab_, max_len, config_.m));
    auto loss = contrastive_loss(tape, model_, items, config_.ablation, &rng);
    metrics.losses = loss.values;
    tape.backward(loss.total, grads);
  } else {
    std::vector<MlmItem> items;
    for (size_t i : batch) items.push_back(mask_tokens(mlm_seqs_[i], vocab_.size(), rng));
    double value = 0;
    auto loss = mlm_loss(tape, model_, items, &rng, &value);
    metrics.mlm = value;
    metrics.losses.total = value;
    if (loss.id >= 0) tape.backward(loss, grads);
  }
  grads.check_finite(model_.params());
  return metrics.losses.total;
}

StepMetrics Trainer::step() {
  if (step_ >= config_.max_steps) throw ContractError("training already finished");
  const auto& batch = current_batch();
  const size_t step = step_ + 1;
  StepMetrics metrics;
  metrics.step = step;
  metrics.stage = config_.stage;
  Rng rng(derive_seed(config_.seed, stage_name(config_.stage), step));
  Gradients grads(model_.params());
  try {
    const double total = forward_backward(batch, rng, grads, metrics);
    if (!std::isfinite(total)) throw NumericalError("non-finite loss");
    clip_gradients(grads, config_.grad_clip);
    adam_step(model_.params(), grads, adam_, config_, trainable_);
    consecutive_skips_ = 0;
  } catch (const NumericalError& e) {
    metrics.skipped = true;
    std::cerr << "step " << step << " skipped: " << e.what() << '\n';
    if (++consecutive_skips_ >= config_.max_consecutive_skips)
      throw NumericalError("aborting after " + std::to_string(consecutive_skips_) +
                           " consecutive non-finite steps");
    // Keep the schedule aligned with the step counter.
    ++adam_.step;
  }
  metrics.lr = lr_at(config_, adam_.step);
  step_ = step;
  if (++cursor_ >= epoch_batches_.size()) {
    cursor_ = 0;
    ++epoch_;
  }
  return metrics;
}

void Trainer::run(const std::string& checkpoint_dir,
                  const std::function<void(const StepMetrics&)>& on_step) {
  namespace fs = std::filesystem;
  while (step_ < config_.max_steps) {
    const StepMetrics m = step();
    if (on_step) on_step(m);
    if (!checkpoint_dir.empty() && config_.save_every > 0 && step_ % config_.save_every == 0 &&
        step_ < config_.max_steps) {
      char name[32];
      std::snprintf(name, sizeof name, "step-%06zu", step_);
      save((fs::path(checkpoint_dir) / name).string());
    }
  }
  if (!checkpoint_dir.empty()) save((fs::path(checkpoint_dir) / "final").string());
}

}  // namespace eventbert
