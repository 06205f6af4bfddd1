#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eventbert/manifest.h"
#include "eventbert/io.h"
#include "test_util.h"

using namespace eventbert;
using testing::data_path;
namespace fs = std::filesystem;

namespace {

const std::string kCli = EVENTBERT_CLI_PATH;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / "eventbert-cli") {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args) const {
    const std::string out = *this / "stdout.txt";
    const std::string err = *this / "stderr.txt";
    const std::string cmd = kCli + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

std::string golden(const std::string& name) { return data_path("golden/" + name); }

// Deliberately tiny model flags for smoke runs.
const std::string kTinyModel = " --d-model 16 --layers 1 --heads 2 --ffn 32 --max-len 64";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with code 2") {
    Workdir w;
    CHECK(w.run("").code == 2);
    CHECK(w.run("mine --in x --out y --bogus").code == 2);
    CHECK(w.run("frobnicate").code == 2);
    CHECK(w.run("mine --help").code == 0);
    const auto r = w.run("sample --in " + golden("training.jsonl") + " --out " + (w / "n.jsonl") +
                         " --scheme-probs 0.5,0.5");
    CHECK(r.code == 2);
    CHECK(r.err.find("scheme-probs") != std::string::npos);
  }

  TEST_CASE("data errors exit with code 1") {
    Workdir w;
    auto r = w.run("mine --in " + (w / "missing.conllu") + " --out " + (w / "f.jsonl"));
    CHECK(r.code == 1);
    CHECK(r.err.find("missing.conllu") != std::string::npos);
    std::ifstream in(golden("training.jsonl"));
    std::ofstream bad(w / "bad.jsonl");
    std::string line;
    std::getline(in, line);
    bad << line << "\n" << line << "\n{\"id\": \"x\"}\n";
    bad.close();
    r = w.run("sample --in " + (w / "bad.jsonl") + " --out " + (w / "n.jsonl"));
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.jsonl:3") != std::string::npos);
  }

  TEST_CASE("pipeline stages reproduce the fixture goldens") {
    Workdir w;
    REQUIRE(w.run("mine --in " + data_path("fixture.conllu") + " --lexicon " +
                  data_path("../../data/pdtb_connectives.tsv") + " --out " + (w / "f.jsonl"))
                .code == 0);
    CHECK(sha256_file(w / "f.jsonl") == sha256_file(golden("filtered.jsonl")));
    REQUIRE(w.run("build --in " + (w / "f.jsonl") + " --out " + (w / "t.jsonl")).code == 0);
    CHECK(sha256_file(w / "t.jsonl") == sha256_file(golden("training.jsonl")));
    REQUIRE(w.run("sample --seed 7 --in " + (w / "t.jsonl") + " --out " + (w / "n.jsonl")).code == 0);
    CHECK(sha256_file(w / "n.jsonl") == sha256_file(golden("negatives.jsonl")));

    const auto manifest = Json::parse(std::ifstream(w / "n.jsonl.manifest.json"));
    CHECK(manifest["command"] == "sample");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["inputs"][w / "t.jsonl"] == sha256_file(w / "t.jsonl"));
    CHECK(manifest["outputs"][w / "n.jsonl"] == sha256_file(w / "n.jsonl"));
    CHECK(manifest["config_hash"].get<std::string>().size() == 64);

    // Same inputs and flags: same config hash and output hash.
    REQUIRE(w.run("sample --seed 7 --in " + (w / "t.jsonl") + " --out " + (w / "n.jsonl")).code == 0);
    const auto again = Json::parse(std::ifstream(w / "n.jsonl.manifest.json"));
    CHECK(again["config_hash"] == manifest["config_hash"]);
    CHECK(again["outputs"] == manifest["outputs"]);
    REQUIRE(w.run("sample --seed 8 --in " + (w / "t.jsonl") + " --out " + (w / "n3.jsonl")).code == 0);
    CHECK(sha256_file(w / "n3.jsonl") != sha256_file(w / "n.jsonl"));
  }

  TEST_CASE("config files supply defaults and flags override them") {
    Workdir w;
    std::ofstream(w / "seed7.toml") << "# sampler\nseed = 7\n";
    std::ofstream(w / "seed8.toml") << "seed = 8\n";
    const std::string in = " --in " + golden("training.jsonl");
    REQUIRE(w.run("sample --config " + (w / "seed7.toml") + in + " --out " + (w / "a.jsonl")).code == 0);
    CHECK(sha256_file(w / "a.jsonl") == sha256_file(golden("negatives.jsonl")));
    REQUIRE(w.run("sample --config " + (w / "seed8.toml") + " --seed 7" + in + " --out " + (w / "b.jsonl")).code == 0);
    CHECK(sha256_file(w / "b.jsonl") == sha256_file(golden("negatives.jsonl")));
    REQUIRE(w.run("sample --seed 7 --config " + (w / "seed8.toml") + in + " --out " + (w / "c.jsonl")).code == 0);
    CHECK(sha256_file(w / "c.jsonl") == sha256_file(golden("negatives.jsonl")));

    std::ofstream(w / "unknown.toml") << "sed = 7\n";
    CHECK(w.run("sample --config " + (w / "unknown.toml") + in + " --out " + (w / "d.jsonl")).code == 2);
    std::ofstream(w / "section.toml") << "[sample]\nseed = 7\n";
    CHECK(w.run("sample --config " + (w / "section.toml") + in + " --out " + (w / "d.jsonl")).code == 2);
    CHECK(w.run("sample --config " + (w / "nowhere.toml") + in + " --out " + (w / "d.jsonl")).code == 2);
  }

  TEST_CASE("stats reports corpus counts") {
    Workdir w;
    const auto r = w.run("stats --in " + data_path("three_docs.conllu") + " --out " + (w / "s.json"));
    REQUIRE(r.code == 0);
    const auto j = Json::parse(r.out);
    CHECK(j["paragraphs"] == 7);
    CHECK(j["sentences"] == 20);
    CHECK(j == Json::parse(slurp(w / "s.json")));
  }

  TEST_CASE("train, evaluate, score and fine-tune end to end") {
    Workdir w;
    const std::string data = " --train " + golden("training.jsonl") + " --negatives " + golden("negatives.jsonl");
    auto r = w.run("train" + data + " --out " + (w / "ck") + kTinyModel +
                   " --steps 4 --warmup 1 --batch-size 4 --save-every 2");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(w / "ck/final/manifest.json"));
    CHECK(fs::exists(w / "ck/step-000002/manifest.json"));
    CHECK(fs::exists(w / "ck/final/run_manifest.json"));
    CHECK(fs::exists(w / "ck/metrics.jsonl.manifest.json"));
    std::istringstream metrics(slurp(w / "ck/metrics.jsonl"));
    size_t lines = 0;
    for (std::string line; std::getline(metrics, line);) {
      const auto j = Json::parse(line);
      CHECK(j["step"] == ++lines);
      CHECK(j.contains("cer"));
    }
    CHECK(lines == 4);

    // A mismatched resume is a configuration error.
    r = w.run("train" + data + " --out " + (w / "ck2") + kTinyModel +
              " --steps 4 --warmup 1 --batch-size 4 --lr 0.5 --resume " + (w / "ck/step-000002"));
    CHECK(r.code == 2);
    CHECK(r.err.find("mismatch") != std::string::npos);
    CHECK(w.run("train --train " + golden("training.jsonl") + " --out " + (w / "ck3") + kTinyModel).code == 2);

    r = w.run("eval --checkpoint " + (w / "ck/final") + " --train " + golden("training.jsonl") +
              " --negatives " + golden("negatives.jsonl") + " --split all --out " + (w / "eval.json"));
    REQUIRE(r.code == 0);
    const auto ev = Json::parse(r.out);
    CHECK(ev["examples"] == 195);
    CHECK(ev["cer_hits1"].get<double>() >= 0.0);

    REQUIRE(w.run("synth --instances 12 --instance-seed 3 --instances-out " + (w / "inst.jsonl")).code == 0);
    r = w.run("zero-shot --mlm-baseline --checkpoint " + (w / "ck/final") + " --instances " +
              (w / "inst.jsonl") + " --out " + (w / "zs.jsonl"));
    REQUIRE(r.code == 0);
    std::istringstream zs(slurp(w / "zs.jsonl"));
    std::vector<Json> rows;
    for (std::string line; std::getline(zs, line);) rows.push_back(Json::parse(line));
    REQUIRE(rows.size() == 13);
    CHECK(rows[0].contains("mlm_chosen"));
    CHECK(rows[0]["scores"].size() == 2);
    CHECK(rows.back()["summary"] == true);
    CHECK(rows.back().contains("zero_shot_accuracy"));
    CHECK(rows.back().contains("mlm_greedy_accuracy"));

    CHECK(w.run("finetune --checkpoint " + (w / "ck/final") + " --train " + (w / "inst.jsonl") +
                " --out " + (w / "ft"))
              .code == 2);
    r = w.run("finetune --checkpoint " + (w / "ck/final") + " --train " + (w / "inst.jsonl") + " --dev " +
              (w / "inst.jsonl") + " --steps 4 --warmup 1 --eval-every 2 --out " + (w / "ft"));
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).contains("best_dev_accuracy"));
    CHECK(fs::exists(w / "ft/manifest.json"));
  }
}
