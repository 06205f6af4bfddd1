#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "eventbert/errors.h"
#include "eventbert/io.h"
#include "eventbert/negatives.h"
#include "eventbert/pipeline.h"
#include "eventbert/synthetic.h"
#include "test_util.h"

using namespace eventbert;
using testing::example;

namespace {

// Connective first, event second: "so <event> ."
TrainingExample so_event(const std::string& id, const std::string& doc, int pos,
                         const std::string& event_spec) {
  const std::string spec = "so/ADV " + event_spec + " ./PUNCT";
  size_t n = 0;
  std::istringstream in(event_spec);
  std::string w;
  while (in >> w) ++n;
  return example(id, doc, pos, spec, Span{1, 1 + n}, 2, Span{0, 1}, "so", "CONTINGENCY");
}

std::vector<TrainingExample> paper_pool() {
  return {so_event("q", "d", 0, "he/PRON looks/VERB very/ADV worried/ADJ"),
          so_event("a", "d", 1, "he/PRON dies/VERB"),
          so_event("b", "d", 2, "it/PRON tastes/VERB pretty/ADV good/ADJ")};
}

std::vector<TrainingExample> synthetic_dataset(uint64_t seed, size_t documents = 8) {
  SyntheticConfig config;
  config.seed = seed;
  config.documents = documents;
  const auto& lex = ConnectiveLexicon::builtin();
  return build_training_set(mine(synthetic_corpus(config), lex).kept).examples;
}

// Independent ranking over the whole pool.
std::vector<size_t> brute_retrieve(const EventPool& pool, size_t id, Scheme scheme, size_t n) {
  const auto& q = pool.event(id);
  std::vector<std::pair<double, size_t>> scored;
  for (const auto& c : pool.events()) {
    if (c.id == id || c.key == q.key) continue;
    if (scheme == Scheme::kLexicon) {
      std::vector<std::string> inter;
      std::set_intersection(q.content.begin(), q.content.end(), c.content.begin(),
                            c.content.end(), std::back_inserter(inter));
      const double j = static_cast<double>(inter.size()) /
                       static_cast<double>(q.content.size() + c.content.size() - inter.size());
      if (!inter.empty()) scored.emplace_back(-j, c.id);
    } else if (scheme == Scheme::kPos) {
      const double s = cosine(q.pos_counts, c.pos_counts);
      if (s > 0) scored.emplace_back(-s, c.id);
    } else {
      const int d = std::abs(c.doc_position - q.doc_position);
      if (c.doc_id == q.doc_id && d <= 5) scored.emplace_back(d, c.id);
    }
  }
  std::sort(scored.begin(), scored.end());
  std::vector<size_t> out;
  for (size_t i = 0; i < std::min(n, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace

TEST_SUITE("negatives") {
  TEST_CASE("pool indexes every event") {
    const auto pool = EventPool::build(paper_pool());
    REQUIRE(pool.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(pool.event(i).id == i);
    CHECK(pool.id_of("b") == 2);
    CHECK_THROWS_AS(pool.id_of("zzz"), PoolError);
    CHECK_THROWS_AS(pool.event(3), PoolError);
    CHECK(pool.lexicon_index().at("he") == std::vector<size_t>{0, 1});
    CHECK(pool.event(0).content == std::vector<std::string>{"he", "looks", "worried"});
    CHECK(pos_signature(pool.event(0).pos_counts) == "ADJ:1,ADV:1,PRON:1,VERB:1");
    CHECK(pool.locality_index().at("d").size() == 3);
    size_t indexed = 0;
    for (const auto& [_, ids] : pool.pos_index()) indexed += ids.size();
    CHECK(indexed == 3);
    CHECK_THROWS_AS(EventPool::build({}), PoolError);
  }

  TEST_CASE("similarity measures") {
    CHECK(jaccard({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / 3));
    CHECK(jaccard({}, {}) == 0.0);
    CHECK(cosine({{"PRON", 1}, {"VERB", 1}}, {{"PRON", 1}, {"VERB", 1}, {"ADV", 1}, {"ADJ", 1}}) ==
          doctest::Approx(0.7071067811865476));
    CHECK(cosine({{"NOUN", 2}}, {{"VERB", 1}}) == 0.0);
  }

  TEST_CASE("lexicon retrieval prefers word overlap, PoS retrieval prefers tag overlap") {
    const auto pool = EventPool::build(paper_pool());
    CHECK(retrieve_candidates(pool, 0, Scheme::kLexicon, 3) == std::vector<size_t>{1});
    CHECK(retrieve_candidates(pool, 0, Scheme::kPos, 3) == std::vector<size_t>{2, 1});
    CHECK(retrieve_candidates(pool, 0, Scheme::kInDomain, 3) == std::vector<size_t>{1, 2});
    CHECK(retrieve_candidates(pool, 0, Scheme::kPos, 1) == std::vector<size_t>{2});
  }

  TEST_CASE("in-domain window is five paragraphs in the same document") {
    std::vector<TrainingExample> ds = {so_event("q", "d", 10, "he/PRON ran/VERB"),
                                       so_event("a", "d", 12, "she/PRON sat/VERB"),
                                       so_event("b", "d", 6, "we/PRON ate/VERB"),
                                       so_event("c", "d", 17, "they/PRON left/VERB"),
                                       so_event("e", "other", 10, "it/PRON fell/VERB")};
    const auto pool = EventPool::build(ds);
    CHECK(retrieve_candidates(pool, 0, Scheme::kInDomain, 3) == std::vector<size_t>{1, 2});
  }

  TEST_CASE("the event itself and surface twins are excluded") {
    std::vector<TrainingExample> ds = {so_event("q", "d", 0, "he/PRON slept/VERB"),
                                       so_event("twin", "d", 1, "He/PRON slept/VERB"),
                                       so_event("a", "d", 2, "he/PRON woke/VERB")};
    const auto pool = EventPool::build(ds);
    for (Scheme s : {Scheme::kLexicon, Scheme::kPos, Scheme::kInDomain})
      CHECK(retrieve_candidates(pool, 0, s, 3) == std::vector<size_t>{2});
  }

  TEST_CASE("retrieval matches a full scan of the pool") {
    const auto ds = synthetic_dataset(21);
    const auto pool = EventPool::build(ds);
    REQUIRE(pool.size() > 50);
    for (size_t id = 0; id < pool.size(); ++id)
      for (Scheme s : {Scheme::kLexicon, Scheme::kPos, Scheme::kInDomain})
        for (size_t n : {1, 3, 7}) {
          const auto got = retrieve_candidates(pool, id, s, n);
          CHECK(got == brute_retrieve(pool, id, s, n));
          CHECK(std::find(got.begin(), got.end(), id) == got.end());
        }
  }

  TEST_CASE("event negatives splice the replacement between fw and bw") {
    const auto ds = paper_pool();
    const auto pool = EventPool::build(ds);
    Rng rng(7);
    SamplerConfig config;
    const auto negs = sample_event_negatives(pool, ds[0], config, rng);
    REQUIRE(negs.size() == 5);
    for (const auto& n : negs) {
      const auto& ev = pool.event(n.event_id);
      CHECK(n.event_id != 0);
      CHECK(n.tokens.size() == 1 + ev.tokens.size() + 1);
      CHECK(n.tokens.front() == "so");
      CHECK(n.tokens.back() == ".");
      CHECK(n.span == Span{1, 1 + ev.tokens.size()});
      CHECK(std::equal(ev.tokens.begin(), ev.tokens.end(), n.tokens.begin() + 1));
    }
  }

  TEST_CASE("empty lists fall back to a uniform draw") {
    std::vector<TrainingExample> ds = {
        so_event("q", "d", 0, "dogs/NOUN barked/VERB"),
        so_event("a", "e", 0, "quickly/ADV !/PUNCT")};
    const auto pool = EventPool::build(ds);
    Rng rng(1);
    const auto negs = sample_event_negatives(pool, ds[0], SamplerConfig{}, rng);
    for (const auto& n : negs) {
      CHECK(n.scheme == Scheme::kUniform);
      CHECK(n.event_id == 1);
    }
  }

  TEST_CASE("a pool of one cannot supply negatives") {
    std::vector<TrainingExample> one = {so_event("q", "d", 0, "he/PRON ran/VERB")};
    const auto pool = EventPool::build(one);
    Rng rng(1);
    CHECK_THROWS_AS(sample_event_negatives(pool, one[0], SamplerConfig{}, rng), SamplingError);
    std::vector<TrainingExample> twins = {so_event("q", "d", 0, "he/PRON ran/VERB"),
                                          so_event("t", "d", 1, "he/PRON ran/VERB")};
    const auto twin_pool = EventPool::build(twins);
    CHECK_THROWS_AS(sample_event_negatives(twin_pool, twins[0], SamplerConfig{}, rng),
                    SamplingError);
  }

  TEST_CASE("scheme frequencies follow the configured mixture") {
    const auto ds = paper_pool();
    const auto pool = EventPool::build(ds);
    for (Scheme s : {Scheme::kLexicon, Scheme::kPos, Scheme::kInDomain})
      REQUIRE_FALSE(retrieve_candidates(pool, 0, s, 3).empty());
    SamplerConfig config;
    config.m = 1;
    Rng rng(7);
    std::map<Scheme, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) counts[sample_event_negatives(pool, ds[0], config, rng)[0].scheme]++;
    CHECK(std::abs(counts[Scheme::kLexicon] / double(draws) - 0.2) < 0.02);
    CHECK(std::abs(counts[Scheme::kPos] / double(draws) - 0.6) < 0.02);
    CHECK(std::abs(counts[Scheme::kInDomain] / double(draws) - 0.2) < 0.02);
  }

  TEST_CASE("relation negatives never share the category") {
    const auto& lex = ConnectiveLexicon::builtin();
    const auto ds = paper_pool();
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      const auto negs = sample_relation_negatives(lex, ds[0], 5, rng);
      REQUIRE(negs.size() == 5);
      std::set<std::string> distinct;
      for (const auto& n : negs) {
        CHECK(n.category != "CONTINGENCY");
        CHECK(lex.find(n.surface)->category == n.category);
        distinct.insert(n.surface);
      }
      CHECK(distinct.size() == 5);
    }
  }

  TEST_CASE("multiword replacement shifts the event") {
    std::istringstream tsv("but\tCOMPARISON\nas soon as\tTEMPORAL\n");
    const auto lex = ConnectiveLexicon::load(tsv);
    const auto ex = example("x", "d", 0, "he/PRON tried/VERB but/CCONJ he/PRON failed/VERB ./PUNCT",
                            Span{3, 5}, 4, Span{2, 3}, "but", "COMPARISON");
    Rng rng(3);
    const auto negs = sample_relation_negatives(lex, ex, 2, rng);
    REQUIRE(negs.size() == 2);
    for (const auto& n : negs) {
      CHECK(n.surface == "as soon as");
      CHECK(n.tokens.size() == ex.tokens.size() + 2);
      CHECK(n.relation == Span{2, 5});
      CHECK(n.event == Span{5, 7});
      CHECK(n.tokens[5] == "he");
      CHECK(n.tokens[6] == "failed");
    }
    std::istringstream only("but\tCOMPARISON\nyet\tCOMPARISON\n");
    CHECK_THROWS_AS(sample_relation_negatives(ConnectiveLexicon::load(only), ex, 2, rng),
                    SamplingError);
  }

  TEST_CASE("negative sets are seeded, complete and provenance-true") {
    const auto ds = synthetic_dataset(5);
    const auto& lex = ConnectiveLexicon::builtin();
    SamplerConfig config;
    const auto pool = EventPool::build(ds);
    const auto sets = build_negative_sets(ds, pool, lex, config);
    REQUIRE(sets.size() == ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
      CHECK(sets[i].example_id == ds[i].id);
      CHECK(sets[i].event_negs.size() == config.m);
      CHECK(sets[i].rel_negs.size() == config.m);
      const size_t id = pool.id_of(ds[i].id);
      for (const auto& n : sets[i].event_negs) {
        CHECK(pool.event(n.event_id).key != pool.event(id).key);
        if (n.scheme == Scheme::kUniform) {
          for (Scheme s : {Scheme::kLexicon, Scheme::kPos, Scheme::kInDomain})
            CHECK(retrieve_candidates(pool, id, s, config.n).empty());
        } else {
          const auto list = retrieve_candidates(pool, id, n.scheme, config.n);
          CHECK(std::find(list.begin(), list.end(), n.event_id) != list.end());
        }
      }
      for (const auto& r : sets[i].rel_negs) CHECK(r.category != ds[i].relation.category);
    }
    auto dump = [](const std::vector<NegativeSet>& ns) {
      std::ostringstream out;
      for (const auto& n : ns) write_jsonl_line(out, to_json(n));
      return out.str();
    };
    const auto again = EventPool::build(ds);
    CHECK(dump(build_negative_sets(ds, again, lex, config)) == dump(sets));
    config.seed = 8;
    CHECK(dump(build_negative_sets(ds, again, lex, config)) != dump(sets));
    config.seed = 7;
    config.epoch = 1;
    CHECK(dump(build_negative_sets(ds, again, lex, config)) != dump(sets));
  }

  TEST_CASE("scheme names round trip") {
    for (Scheme s : {Scheme::kLexicon, Scheme::kPos, Scheme::kInDomain, Scheme::kUniform})
      CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_THROWS_AS(parse_scheme("XX"), DataError);
  }
}
