// eventbert: command-line front end for the corpus pipeline, training and
// evaluation. Stages communicate only through files.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eventbert/checkpoint.h"
#include "eventbert/config.h"
#include "eventbert/errors.h"
#include "eventbert/eval.h"
#include "eventbert/io.h"
#include "eventbert/manifest.h"
#include "eventbert/pipeline.h"
#include "eventbert/synthetic.h"
#include "eventbert/trainer.h"

namespace fs = std::filesystem;
using namespace eventbert;

namespace {

constexpr int kDataErrorExit = 1;
constexpr int kConfigErrorExit = 2;

struct Context {
  CLI::App* sub = nullptr;
  std::string config_text;
  RunManifest manifest;

  void input(const std::string& path) {
    manifest.input_hashes[path] = fs::is_directory(path) ? sha256_tree(path) : sha256_file(path);
  }
  void output(const std::string& path) {
    manifest.output_hashes[path] = fs::is_directory(path) ? sha256_tree(path) : sha256_file(path);
    manifest.finished_at = utc_timestamp();
    manifest.config_hash = sha256_hex(config_text);
    write_run_manifest(path, manifest);
  }
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw DataError("input not found: " + path);
}

ConnectiveLexicon load_lexicon(const std::string& path) {
  if (path.empty()) return ConnectiveLexicon::builtin();
  require_file(path);
  return ConnectiveLexicon::load_file(path);
}

std::vector<Paragraph> read_corpus(const std::string& path, size_t sentences_per_para) {
  require_file(path);
  std::ifstream in(path);
  ConlluOptions options;
  options.sentences_per_para = sentences_per_para;
  return parse_conllu(in, options);
}

std::array<double, 3> parse_probs(const std::string& text) {
  std::array<double, 3> out{};
  std::istringstream in(text);
  std::string item;
  size_t i = 0;
  while (std::getline(in, item, ',')) {
    if (i == 3) throw ConfigError("--scheme-probs takes three values");
    try {
      out[i++] = std::stod(item);
    } catch (const std::exception&) {
      throw ConfigError("--scheme-probs: not a number: " + item);
    }
  }
  if (i != 3) throw ConfigError("--scheme-probs takes three values");
  double sum = 0;
  for (double p : out) {
    if (p < 0) throw ConfigError("--scheme-probs must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("--scheme-probs must sum to 1");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw DataError("cannot write " + path);
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  SyntheticConfig corpus;
  std::string out;
  size_t instances = 0;
  std::string instances_out;
  uint64_t instance_seed = 0;
};

void run_synth(const SynthArgs& a, Context& ctx) {
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    write_conllu(out, synthetic_corpus(a.corpus));
    if (!out) throw DataError("cannot write " + a.out);
    ctx.output(a.out);
  }
  if (a.instances > 0) {
    if (a.instances_out.empty()) throw ConfigError("--instances needs --instances-out");
    write_instances(a.instances_out, synthetic_instances(a.instances, a.instance_seed));
    ctx.output(a.instances_out);
  }
}

// ---- mine / build / sample -------------------------------------------------

struct MineArgs {
  std::string in, lexicon, out;
  size_t sentences_per_para = 5;
  CleanlinessConfig rules;
  size_t depth = 1;
};

void run_mine(const MineArgs& a, Context& ctx) {
  const auto corpus = read_corpus(a.in, a.sentences_per_para);
  ctx.input(a.in);
  if (!a.lexicon.empty()) ctx.input(a.lexicon);
  const auto lex = load_lexicon(a.lexicon);
  DiscourseOptions options;
  options.adjacency_depth = a.depth;
  const auto result = mine(corpus, lex, a.rules, options);
  write_filtered(a.out, result.kept);
  std::cerr << "kept " << result.stats.kept << " of " << result.stats.paragraphs
            << " paragraphs; "
            << corpus_report(result.stats.words_kept, result.stats.words_total,
                             result.stats.kept)
            << '\n';
  ctx.output(a.out);
}

struct BuildArgs {
  std::string in, out;
  ExtractOptions options;
};

void run_build(const BuildArgs& a, Context& ctx) {
  require_file(a.in);
  const auto filtered = read_filtered(a.in);
  ctx.input(a.in);
  const auto result = build_training_set(filtered, a.options);
  write_examples(a.out, result.examples);
  const auto& s = result.stats;
  std::cerr << s.examples << " examples from " << s.pairs << " pairs (" << s.dropped_too_short
            << " too short, " << s.dropped_too_long << " too long, " << s.dropped_no_fit
            << " outside the window)\n";
  ctx.output(a.out);
}

struct SampleArgs {
  std::string in, lexicon, out;
  SamplerConfig config;
  std::string probs = "0.2,0.6,0.2";
};

void run_sample(SampleArgs a, Context& ctx) {
  require_file(a.in);
  const auto dataset = read_examples(a.in);
  ctx.input(a.in);
  if (!a.lexicon.empty()) ctx.input(a.lexicon);
  a.config.scheme_probs = parse_probs(a.probs);
  if (a.config.m < 1) throw ConfigError("--M must be at least 1");
  if (a.config.n < 1) throw ConfigError("--N must be at least 1");
  const auto lex = load_lexicon(a.lexicon);
  write_negative_sets(a.out, sample(dataset, lex, a.config));
  ctx.output(a.out);
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string train, negatives, lexicon, out, metrics, init, resume;
  std::string profile = "desk";
  std::string stage = "contrastive";
  std::string ablate;
  uint64_t seed = 7;
  double lr = 0;
  size_t warmup = 0, steps = 0, batch_size = 0, m = 5, save_every = 0, stop_after = 0;
  double weight_decay = 0.01, grad_clip = 1.0;
  double heldout = 0.02;
  uint64_t split_seed = 7;
  ModelConfig model;
  size_t min_freq = 2;
};

TrainConfig train_config(const TrainArgs& a, const CLI::App& sub) {
  TrainConfig c;
  if (a.profile == "desk") c = TrainConfig::desk();
  else if (a.profile == "paper") c = TrainConfig::paper();
  else throw ConfigError("unknown profile '" + a.profile + "'");
  c.seed = a.seed;
  c.stage = parse_stage(a.stage);
  c.ablation = parse_ablation(a.ablate);
  c.m = a.m;
  c.save_every = a.save_every;
  c.weight_decay = a.weight_decay;
  c.grad_clip = a.grad_clip;
  if (sub.count("--lr")) c.lr = a.lr;
  if (sub.count("--warmup")) c.warmup_steps = a.warmup;
  if (sub.count("--steps")) c.max_steps = a.steps;
  if (sub.count("--batch-size")) c.batch_size = a.batch_size;
  c.validate();
  return c;
}

ModelConfig model_config(const TrainArgs& a, const CLI::App& sub) {
  ModelConfig m;
  if (a.profile == "paper") {
    m.d_model = 1024;
    m.n_layers = 24;
    m.n_heads = 16;
    m.ffn_dim = 4096;
    m.max_len = 512;
  }
  if (sub.count("--d-model")) m.d_model = a.model.d_model;
  if (sub.count("--layers")) m.n_layers = a.model.n_layers;
  if (sub.count("--heads")) m.n_heads = a.model.n_heads;
  if (sub.count("--ffn")) m.ffn_dim = a.model.ffn_dim;
  if (sub.count("--max-len")) m.max_len = a.model.max_len;
  if (sub.count("--dropout")) m.dropout = a.model.dropout;
  return m;
}

void run_train(const TrainArgs& a, Context& ctx) {
  const TrainConfig config = train_config(a, *ctx.sub);
  if (!a.init.empty() && !a.resume.empty()) throw ConfigError("--init and --resume are exclusive");
  require_file(a.train);
  auto all = read_examples(a.train);
  ctx.input(a.train);
  std::vector<NegativeSet> negatives;
  if (config.stage == Stage::kContrastive) {
    if (a.negatives.empty()) throw ConfigError("contrastive training needs --negatives");
    require_file(a.negatives);
    negatives = read_negative_sets(a.negatives);
    ctx.input(a.negatives);
  }
  const auto split = heldout_split(all.size(), a.heldout, a.split_seed);
  const auto examples = select(all, split.train);

  std::optional<LoadedCheckpoint> loaded;
  const std::string from = !a.resume.empty() ? a.resume : a.init;
  if (!from.empty()) {
    loaded = load_checkpoint(from);
    ctx.input(from);
  }
  Vocab vocab = loaded ? loaded->vocab : build_vocab(examples, load_lexicon(a.lexicon), a.min_freq);
  ModelConfig mc = loaded ? loaded->model.config() : model_config(a, *ctx.sub);
  mc.vocab_size = vocab.size();
  Model model(mc, derive_seed(config.seed, "model"), HeadInit::kRandom);
  if (loaded && !a.init.empty()) model.copy_values_from(loaded->model);

  Trainer trainer(model, vocab, config, examples, negatives);
  if (!a.resume.empty()) trainer.resume(*loaded);

  fs::create_directories(a.out);
  const std::string metrics_path =
      a.metrics.empty() ? (fs::path(a.out) / "metrics.jsonl").string() : a.metrics;
  std::ofstream metrics(metrics_path, a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!metrics) throw DataError("cannot write " + metrics_path);
  auto log = [&](const StepMetrics& m) {
    write_jsonl_line(metrics, to_json(m));
    if (m.step % 100 == 0 || m.step == config.max_steps)
      std::cerr << to_json(m).dump() << '\n';
  };
  if (a.stop_after > 0) {
    while (trainer.steps_done() < std::min(a.stop_after, config.max_steps)) log(trainer.step());
    char name[32];
    std::snprintf(name, sizeof name, "step-%06zu", trainer.steps_done());
    const std::string dir = (fs::path(a.out) / name).string();
    trainer.save(dir);
    metrics.flush();
    ctx.output(dir);
    return;
  }
  trainer.run(a.out, log);
  metrics.flush();
  ctx.output((fs::path(a.out) / "final").string());
  ctx.output(metrics_path);
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, train, negatives, out;
  std::string split = "heldout";
  double heldout = 0.02;
  uint64_t split_seed = 7;
  size_t m = 5;
};

void run_eval(const EvalArgs& a, Context& ctx) {
  require_file(a.train);
  require_file(a.negatives);
  const auto ckpt = load_checkpoint(a.checkpoint);
  ctx.input(a.checkpoint);
  const auto all = read_examples(a.train);
  ctx.input(a.train);
  const auto negatives = read_negative_sets(a.negatives);
  ctx.input(a.negatives);
  const auto split = heldout_split(all.size(), a.heldout, a.split_seed);
  std::vector<TrainingExample> chosen;
  if (a.split == "heldout") chosen = select(all, split.heldout);
  else if (a.split == "train") chosen = select(all, split.train);
  else if (a.split == "all") chosen = all;
  else throw ConfigError("--split must be heldout, train or all");
  Json result{{"split", a.split},
              {"examples", chosen.size()},
              {"cer_hits1", heldout_ranking_accuracy(ckpt.model, ckpt.vocab, chosen, negatives,
                                                     RankingTask::kCer, a.m)},
              {"drr_hits1", heldout_ranking_accuracy(ckpt.model, ckpt.vocab, chosen, negatives,
                                                     RankingTask::kDrr, a.m)}};
  std::cout << result.dump() << '\n';
  if (!a.out.empty()) {
    write_text(a.out, result.dump() + "\n");
    ctx.output(a.out);
  }
}

// ---- zero-shot / finetune ------------------------------------------------------

struct ZeroShotArgs {
  std::string checkpoint, instances, out;
  bool length_norm = false;
  bool mlm_baseline = false;
};

void run_zero_shot(const ZeroShotArgs& a, Context& ctx) {
  require_file(a.instances);
  const auto ckpt = load_checkpoint(a.checkpoint);
  ctx.input(a.checkpoint);
  const auto instances = read_instances(a.instances);
  ctx.input(a.instances);
  std::ofstream out(a.out);
  if (!out) throw DataError("cannot write " + a.out);
  size_t labelled = 0, zs_correct = 0, mlm_correct = 0;
  for (const auto& inst : instances) {
    const Answer zs = zero_shot_answer(ckpt.model, ckpt.vocab, inst, a.length_norm);
    Json line{{"id", inst.id}, {"chosen", zs.chosen}, {"scores", zs.scores}, {"tie", zs.tie}};
    std::optional<Answer> mlm;
    if (a.mlm_baseline) {
      mlm = mlm_greedy_answer(ckpt.model, ckpt.vocab, inst);
      line["mlm_chosen"] = mlm->chosen;
      line["mlm_log_probs"] = mlm->scores;
    }
    if (inst.gold) {
      line["gold"] = *inst.gold;
      ++labelled;
      zs_correct += zs.chosen == *inst.gold;
      if (mlm) mlm_correct += mlm->chosen == *inst.gold;
    }
    write_jsonl_line(out, line);
  }
  Json summary{{"summary", true}, {"instances", instances.size()}, {"labelled", labelled}};
  if (labelled) {
    summary["zero_shot_accuracy"] = static_cast<double>(zs_correct) / labelled;
    if (a.mlm_baseline) summary["mlm_greedy_accuracy"] = static_cast<double>(mlm_correct) / labelled;
  }
  write_jsonl_line(out, summary);
  out.close();
  std::cout << summary.dump() << '\n';
  ctx.output(a.out);
}

struct FinetuneArgs {
  std::string checkpoint, train, dev, test, out;
  std::string profile = "desk";
  double fraction = 1.0;
  uint64_t seed = 7;
  double lr = 0;
  size_t warmup = 0, steps = 0, batch_size = 0, eval_every = 0;
};

void run_finetune(const FinetuneArgs& a, Context& ctx) {
  FinetuneConfig c;
  if (a.profile == "desk") c = FinetuneConfig::desk();
  else if (a.profile == "paper") c = FinetuneConfig::paper();
  else throw ConfigError("unknown profile '" + a.profile + "'");
  c.seed = a.seed;
  const CLI::App& sub = *ctx.sub;
  if (sub.count("--lr")) c.lr = a.lr;
  if (sub.count("--warmup")) c.warmup_steps = a.warmup;
  if (sub.count("--steps")) c.max_steps = a.steps;
  if (sub.count("--batch-size")) c.batch_size = a.batch_size;
  if (sub.count("--eval-every")) c.eval_every = a.eval_every;
  if (a.dev.empty()) throw ConfigError("fine-tuning requires --dev");
  if (a.fraction <= 0 || a.fraction > 1) throw ConfigError("--fraction must be in (0, 1]");
  require_file(a.train);
  require_file(a.dev);
  auto ckpt = load_checkpoint(a.checkpoint);
  ctx.input(a.checkpoint);
  auto train = read_instances(a.train);
  ctx.input(a.train);
  const auto dev = read_instances(a.dev);
  ctx.input(a.dev);
  const auto order = epoch_order(train.size(), derive_seed(a.seed, "fraction"), 0);
  const size_t keep = std::max<size_t>(1, static_cast<size_t>(a.fraction * train.size() + 0.5));
  std::vector<MultiChoiceInstance> subset;
  for (size_t i = 0; i < keep; ++i) subset.push_back(train[order[i]]);

  const auto result = finetune_multichoice(ckpt.model, ckpt.vocab, subset, dev, c);
  Json summary{{"train_instances", subset.size()},
               {"best_dev_accuracy", result.best_dev_accuracy},
               {"best_step", result.best_step}};
  if (!a.test.empty()) {
    require_file(a.test);
    ctx.input(a.test);
    summary["test_accuracy"] = accuracy(ckpt.model, ckpt.vocab, read_instances(a.test), Scorer::kTask);
  }
  Json train_info{{"finetune", summary}};
  save_checkpoint(a.out, ckpt.model, ckpt.vocab, train_info);
  std::cout << summary.dump() << '\n';
  ctx.output(a.out);
}

// ---- stats --------------------------------------------------------------------

struct StatsArgs {
  std::string in, lexicon, out;
  size_t sentences_per_para = 5;
};

void run_stats(const StatsArgs& a, Context& ctx) {
  const auto corpus = read_corpus(a.in, a.sentences_per_para);
  ctx.input(a.in);
  const auto lex = load_lexicon(a.lexicon);
  const auto mined = mine(corpus, lex);
  const auto built = build_training_set(mined.kept);
  size_t sentences = 0, tokens = 0;
  for (const auto& p : corpus) {
    sentences += p.sentences.size();
    tokens += p.token_count();
  }
  Json rejected = Json::object();
  for (const auto& [reason, n] : mined.stats.basic) rejected[std::string(to_string(reason))] = n;
  rejected["no_relation"] = mined.stats.no_relation;
  Json report{{"paragraphs", corpus.size()},
              {"sentences", sentences},
              {"tokens", tokens},
              {"words", mined.stats.words_total},
              {"kept_paragraphs", mined.stats.kept},
              {"kept_words", mined.stats.words_kept},
              {"rejected", rejected},
              {"relation_trigger_pairs", built.stats.pairs},
              {"examples", built.stats.examples},
              {"report", corpus_report(mined.stats.words_kept, mined.stats.words_total,
                                       mined.stats.kept)}};
  std::cout << report.dump(2) << '\n';
  if (!a.out.empty()) {
    write_text(a.out, report.dump(2) + "\n");
    ctx.output(a.out);
  }
}

// ---- config file ----------------------------------------------------------------

// Expands `--config FILE` into `--key=value` arguments placed right after the
// subcommand name, so explicit flags (parsed later, last one wins) override.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto values = read_flat_config(path);
  size_t sub_pos = args.size();
  const CLI::App* sub = nullptr;
  for (size_t i = 0; i < args.size() && !sub; ++i)
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
      if (s->get_name() == args[i]) {
        sub = s;
        sub_pos = i;
        break;
      }
  if (!sub) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : values) {
    const std::string flag = "--" + key;
    if (key == "config") throw ConfigError("config files cannot include other config files");
    if (sub->get_option_no_throw(flag)) {
      injected.push_back(flag + "=" + value);
      continue;
    }
    bool known = false;
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
      known = known || s->get_option_no_throw(flag) != nullptr;
    if (!known) throw ConfigError("unknown config key '" + key + "' in " + path);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
              injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Event-correlation pre-training pipeline"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  Context ctx;
  std::function<void()> action;

  auto add_sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "Flat key = value file; flags override it");
    return s;
  };

  SynthArgs synth;
  {
    auto* s = add_sub("synth", "Write the synthetic storyline corpus and cloze instances");
    s->add_option("--seed", synth.corpus.seed);
    s->add_option("--documents", synth.corpus.documents);
    s->add_option("--paragraphs-per-doc", synth.corpus.paragraphs_per_document);
    s->add_option("--noise", synth.corpus.noise_rate)->check(CLI::Range(0.0, 1.0));
    s->add_option("--out", synth.out, "CoNLL-U output");
    s->add_option("--instances", synth.instances, "Number of cloze instances");
    s->add_option("--instances-out", synth.instances_out);
    s->add_option("--instance-seed", synth.instance_seed);
    s->callback([&] { action = [&] { run_synth(synth, ctx); }; });
  }
  MineArgs mine_args;
  {
    auto* s = add_sub("mine", "Clean paragraphs and keep those with verb-adjacent connectives");
    s->add_option("--in", mine_args.in, "CoNLL-U corpus")->required();
    s->add_option("--lexicon", mine_args.lexicon, "Connective TSV (default: built-in)");
    s->add_option("--out", mine_args.out, "Filtered JSONL")->required();
    s->add_option("--sentences-per-paragraph", mine_args.sentences_per_para);
    s->add_option("--min-alpha-ratio", mine_args.rules.min_alpha_ratio);
    s->add_option("--min-tokens", mine_args.rules.min_tokens);
    s->add_option("--max-tokens", mine_args.rules.max_tokens);
    s->add_option("--adjacency-depth", mine_args.depth);
    s->callback([&] { action = [&] { run_mine(mine_args, ctx); }; });
  }
  BuildArgs build_args;
  {
    auto* s = add_sub("build", "Extract events and write training examples");
    s->add_option("--in", build_args.in, "Filtered JSONL")->required();
    s->add_option("--out", build_args.out, "Training JSONL")->required();
    s->add_option("--min-event-tokens", build_args.options.min_event_tokens);
    s->add_option("--max-event-tokens", build_args.options.max_event_tokens);
    s->add_option("--max-seq-len", build_args.options.max_seq_len);
    s->callback([&] { action = [&] { run_build(build_args, ctx); }; });
  }
  SampleArgs sample_args;
  {
    auto* s = add_sub("sample", "Draw event and relation negatives");
    s->add_option("--in", sample_args.in, "Training JSONL")->required();
    s->add_option("--lexicon", sample_args.lexicon);
    s->add_option("--out", sample_args.out, "Negatives JSONL")->required();
    s->add_option("--seed", sample_args.config.seed);
    s->add_option("--M", sample_args.config.m, "Negatives per kind");
    s->add_option("--N", sample_args.config.n, "Retrieval list cap");
    s->add_option("--scheme-probs", sample_args.probs, "LB,PB,ID probabilities");
    s->add_option("--resample-epoch", sample_args.config.epoch);
    s->callback([&] { action = [&] { run_sample(sample_args, ctx); }; });
  }
  TrainArgs train_args;
  {
    auto* s = add_sub("train", "Masked-LM warmup or contrastive training");
    s->add_option("--train", train_args.train, "Training JSONL")->required();
    s->add_option("--negatives", train_args.negatives);
    s->add_option("--lexicon", train_args.lexicon);
    s->add_option("--out", train_args.out, "Checkpoint directory")->required();
    s->add_option("--metrics", train_args.metrics);
    s->add_option("--init", train_args.init, "Start from a checkpoint's weights");
    s->add_option("--resume", train_args.resume, "Continue a run from its checkpoint");
    s->add_option("--profile", train_args.profile)->check(CLI::IsMember({"desk", "paper"}));
    s->add_option("--stage", train_args.stage);
    s->add_option("--ablate", train_args.ablate, "cer, cet, drr or a comma list");
    s->add_option("--seed", train_args.seed);
    s->add_option("--lr", train_args.lr);
    s->add_option("--warmup", train_args.warmup);
    s->add_option("--steps", train_args.steps);
    s->add_option("--batch-size", train_args.batch_size);
    s->add_option("--weight-decay", train_args.weight_decay);
    s->add_option("--grad-clip", train_args.grad_clip);
    s->add_option("--M", train_args.m);
    s->add_option("--save-every", train_args.save_every);
    s->add_option("--stop-after", train_args.stop_after, "Checkpoint and stop after this step");
    s->add_option("--heldout-fraction", train_args.heldout);
    s->add_option("--split-seed", train_args.split_seed);
    s->add_option("--min-freq", train_args.min_freq);
    s->add_option("--d-model", train_args.model.d_model);
    s->add_option("--layers", train_args.model.n_layers);
    s->add_option("--heads", train_args.model.n_heads);
    s->add_option("--ffn", train_args.model.ffn_dim);
    s->add_option("--max-len", train_args.model.max_len);
    s->add_option("--dropout", train_args.model.dropout);
    s->callback([&] { action = [&] { run_train(train_args, ctx); }; });
  }
  EvalArgs eval_args;
  {
    auto* s = add_sub("eval", "Held-out CER/DRR Hits@1");
    s->add_option("--checkpoint", eval_args.checkpoint)->required();
    s->add_option("--train", eval_args.train, "Training JSONL")->required();
    s->add_option("--negatives", eval_args.negatives)->required();
    s->add_option("--out", eval_args.out);
    s->add_option("--split", eval_args.split);
    s->add_option("--heldout-fraction", eval_args.heldout);
    s->add_option("--split-seed", eval_args.split_seed);
    s->add_option("--M", eval_args.m);
    s->callback([&] { action = [&] { run_eval(eval_args, ctx); }; });
  }
  ZeroShotArgs zs_args;
  {
    auto* s = add_sub("zero-shot", "Answer cloze instances with the correlation scorer");
    s->add_option("--checkpoint", zs_args.checkpoint)->required();
    s->add_option("--instances", zs_args.instances)->required();
    s->add_option("--out", zs_args.out, "Results JSONL")->required();
    s->add_flag("--length-norm", zs_args.length_norm, "Divide scores by candidate length");
    s->add_flag("--mlm-baseline", zs_args.mlm_baseline, "Also run greedy masked-LM scoring");
    s->callback([&] { action = [&] { run_zero_shot(zs_args, ctx); }; });
  }
  FinetuneArgs ft_args;
  {
    auto* s = add_sub("finetune", "Supervised multi-choice fine-tuning");
    s->add_option("--checkpoint", ft_args.checkpoint)->required();
    s->add_option("--train", ft_args.train, "Labelled instances")->required();
    s->add_option("--dev", ft_args.dev, "Dev instances for model selection");
    s->add_option("--test", ft_args.test);
    s->add_option("--out", ft_args.out, "Output checkpoint directory")->required();
    s->add_option("--profile", ft_args.profile)->check(CLI::IsMember({"desk", "paper"}));
    s->add_option("--fraction", ft_args.fraction, "Share of the training instances to use");
    s->add_option("--seed", ft_args.seed);
    s->add_option("--lr", ft_args.lr);
    s->add_option("--warmup", ft_args.warmup);
    s->add_option("--steps", ft_args.steps);
    s->add_option("--batch-size", ft_args.batch_size);
    s->add_option("--eval-every", ft_args.eval_every);
    s->callback([&] { action = [&] { run_finetune(ft_args, ctx); }; });
  }
  StatsArgs stats_args;
  {
    auto* s = add_sub("stats", "Corpus statistics report");
    s->add_option("--in", stats_args.in, "CoNLL-U corpus")->required();
    s->add_option("--lexicon", stats_args.lexicon);
    s->add_option("--out", stats_args.out);
    s->add_option("--sentences-per-paragraph", stats_args.sentences_per_para);
    s->callback([&] { action = [&] { run_stats(stats_args, ctx); }; });
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    ctx.manifest.started_at = utc_timestamp();
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kConfigErrorExit;
    }
    for (CLI::App* s : app.get_subcommands()) ctx.sub = s;
    ctx.manifest.command = ctx.sub->get_name();
    ctx.config_text = ctx.sub->config_to_str(true, false);
    for (const char* key : {"--seed"})
      if (auto* opt = ctx.sub->get_option_no_throw(key)) ctx.manifest.seed = opt->as<uint64_t>();
    action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataErrorExit;
  }
  return 0;
}
