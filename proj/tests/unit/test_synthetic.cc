#include <doctest.h>

#include <set>
#include <sstream>

#include "eventbert/discourse.h"
#include "eventbert/errors.h"
#include "eventbert/pipeline.h"
#include "eventbert/synthetic.h"
#include "test_util.h"

using namespace eventbert;

namespace {

std::vector<int> heads_of(const std::vector<Token>& toks) {
  std::vector<int> out;
  for (const auto& t : toks) out.push_back(t.head);
  return out;
}

std::vector<std::string> rels_of(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.deprel);
  return out;
}

}  // namespace

TEST_SUITE("synthetic") {
  TEST_CASE("verb phrase trees") {
    auto t = build_verb_phrase("took/VERB a/DET long/ADJ nap/NOUN");
    CHECK(heads_of(t) == std::vector<int>{-1, 3, 3, 0});
    CHECK(rels_of(t) == std::vector<std::string>{"root", "det", "amod", "obj"});
    t = build_verb_phrase("walked/VERB very/ADV slowly/ADV");
    CHECK(heads_of(t) == std::vector<int>{-1, 2, 0});
    t = build_verb_phrase("felt/VERB rested/ADJ");
    CHECK(rels_of(t) == std::vector<std::string>{"root", "xcomp"});
    t = build_verb_phrase("rolled/VERB in/ADP the/DET mud/NOUN");
    CHECK(heads_of(t) == std::vector<int>{-1, 3, 3, 0});
    CHECK(t[3].deprel == "obl");
    CHECK_THROWS_AS(build_verb_phrase("took a nap"), ContractError);
    CHECK_THROWS_AS(build_verb_phrase("the/DET nap/NOUN"), ContractError);
    for (const auto& sc : builtin_scenarios())
      for (const auto* phrase : {&sc.consistent, &sc.contradictory, &sc.outcome})
        CHECK_NOTHROW(build_verb_phrase(*phrase));
  }

  TEST_CASE("corpus shape and determinism") {
    const SyntheticConfig config{5, 3, 4, 0.15};
    const auto a = synthetic_corpus(config);
    REQUIRE(a.size() == 12);
    CHECK(a[0].id == "synth-5-0.0");
    CHECK(a[7].doc_id == "synth-5-1");
    CHECK(a[7].doc_position == 3);
    std::ostringstream x, y;
    write_conllu(x, a);
    write_conllu(y, synthetic_corpus(config));
    CHECK(x.str() == y.str());
    // Every sentence is a well-formed tree and survives the CoNLL-U writer.
    const auto back = parse_conllu_string(x.str());
    REQUIRE(back.size() == a.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(back[i].text == a[i].text);
  }

  TEST_CASE("clean paragraphs all carry a relation") {
    const auto paragraphs = synthetic_corpus({9, 10, 10, 0.0});
    const auto mined = mine(paragraphs, ConnectiveLexicon::builtin());
    CHECK(mined.kept.size() == paragraphs.size());
    const auto noisy = synthetic_corpus({9, 10, 10, 1.0});
    CHECK(mine(noisy, ConnectiveLexicon::builtin()).kept.empty());
  }

  TEST_CASE("noise rate controls the unusable share") {
    const auto paragraphs = synthetic_corpus({13, 40, 25, 0.15});
    const auto mined = mine(paragraphs, ConnectiveLexicon::builtin());
    const double dropped = 1.0 - static_cast<double>(mined.kept.size()) / static_cast<double>(paragraphs.size());
    CHECK(dropped == doctest::Approx(0.15).epsilon(0.2));
    CHECK(mined.stats.paragraphs == 1000);
    size_t rejected = 0;
    for (const auto& [reason, n] : mined.stats.basic) rejected += n;
    CHECK(mined.stats.kept + mined.stats.no_relation + rejected == 1000);
  }

  TEST_CASE("cloze instances") {
    const auto items = synthetic_instances(400, 3);
    REQUIRE(items.size() == 400);
    size_t gold_one = 0;
    std::set<std::string> connectives;
    for (const auto& inst : items) {
      CHECK_NOTHROW(inst.validate());
      REQUIRE(inst.gold);
      CHECK(inst.candidates.size() == 2);
      CHECK(inst.candidates[0] != inst.candidates[1]);
      gold_one += *inst.gold;
      connectives.insert(inst.fw.back() == "," ? inst.fw.front() : inst.fw.back());
    }
    CHECK(connectives == std::set<std::string>{"After", "so", "but"});
    CHECK(gold_one == doctest::Approx(200).epsilon(0.15));
    const auto again = synthetic_instances(400, 3);
    for (size_t i = 0; i < items.size(); ++i) CHECK(to_json(again[i]) == to_json(items[i]));
    CHECK(to_json(synthetic_instances(1, 4)[0]) != to_json(items[0]));
  }
}
