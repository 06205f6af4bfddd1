#include <doctest.h>

#include <sstream>

#include "../support/discourse_oracle.h"
#include "eventbert/discourse.h"
#include "eventbert/errors.h"
#include "test_util.h"

using namespace eventbert;

namespace {

ConnectiveLexicon lexicon(const std::string& tsv) {
  std::istringstream in(tsv);
  return ConnectiveLexicon::load(in);
}

// "He was tired , so he slept ."
Paragraph tired() {
  return testing::paragraph({"He/PRON/3/nsubj was/AUX/3/cop tired/ADJ/0/root ,/PUNCT/7/punct "
                             "so/ADV/7/advmod he/PRON/7/nsubj slept/VERB/3/parataxis ./PUNCT/3/punct"});
}

}  // namespace

TEST_SUITE("discourse") {
  TEST_CASE("lexicon rows are normalized") {
    const auto lex = lexicon("# comment\nso\tCONTINGENCY\nbut\tCOMPARISON\nBut \tCOMPARISON\n");
    CHECK(lex.size() == 2);
    REQUIRE(lex.find("so") != nullptr);
    CHECK(lex.find("so")->category == "CONTINGENCY");
    CHECK(lex.find("BUT")->surface == "but");
    CHECK(normalize_surface("  As   SOON\tas ") == "as soon as");
  }

  TEST_CASE("lexicon load errors") {
    CHECK_THROWS_AS(lexicon("so\tCONTINGENCY\nSo\tTEMPORAL\n"), LexiconError);
    CHECK_THROWS_AS(lexicon(""), LexiconError);
    CHECK_THROWS_AS(lexicon("# only a comment\n"), LexiconError);
    CHECK_THROWS_AS(lexicon("so CONTINGENCY\n"), LexiconError);
    CHECK_THROWS_AS(lexicon("one two three four five\tEXPANSION\n"), LexiconError);
  }

  TEST_CASE("built-in lexicon covers the usual connectives") {
    const auto& lex = ConnectiveLexicon::builtin();
    CHECK(lex.size() >= 90);
    CHECK(lex.find("however") != nullptr);
    CHECK(lex.find("while") != nullptr);
    CHECK(lex.find("as soon as") != nullptr);
    CHECK(lex.find("beside") == nullptr);
    for (const auto& [surface, e] : lex.entries()) {
      CHECK(surface == normalize_surface(surface));
      CHECK_FALSE(e.category.empty());
      CHECK(e.words.size() <= ConnectiveLexicon::kMaxWords);
    }
    const auto cats = lex.categories();
    CHECK(cats == std::vector<std::string>{"COMPARISON", "CONTINGENCY", "EXPANSION", "TEMPORAL"});
  }

  TEST_CASE("single connective located") {
    const auto ms = locate_connectives(tired(), ConnectiveLexicon::builtin());
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].surface == "so");
    CHECK(ms[0].begin == 4);
    CHECK(ms[0].end == 5);
    CHECK(ms[0].category == "CONTINGENCY");
  }

  TEST_CASE("multiword entries beat their prefixes") {
    const auto lex = lexicon("as\tTEMPORAL\nas soon as\tTEMPORAL\n");
    const auto p = testing::paragraph(
        {"As/SCONJ/4/mark soon/ADV/1/fixed as/SCONJ/1/fixed she/PRON/5/nsubj left/VERB/0/root "
         ",/PUNCT/5/punct"});
    const auto ms = locate_connectives(p, lex);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].surface == "as soon as");
    CHECK(ms[0].begin == 0);
    CHECK(ms[0].end == 3);
  }

  TEST_CASE("no lexicon word, no mention") {
    const auto p = testing::paragraph({"The/DET/2/det dog/NOUN/3/nsubj barked/VERB/0/root"});
    CHECK(locate_connectives(p, ConnectiveLexicon::builtin()).empty());
  }

  TEST_CASE("matches never cross a sentence boundary") {
    const auto lex = lexicon("as soon as\tTEMPORAL\n");
    const auto p = testing::paragraph({"He/PRON/2/nsubj left/VERB/0/root as/ADV/2/advmod",
                                       "soon/ADV/2/advmod as/SCONJ/0/root"});
    CHECK(locate_connectives(p, lex).empty());
  }

  TEST_CASE("verb head is the trigger") {
    const auto p = tired();
    const auto ms = locate_connectives(p, ConnectiveLexicon::builtin());
    CHECK(verb_adjacent_triggers(ms[0], p) == std::vector<size_t>{6});
  }

  TEST_CASE("connective attached to a noun has no trigger") {
    const auto p = testing::paragraph(
        {"The/DET/2/det cake/NOUN/0/root so/ADV/4/advmod sweet/ADJ/2/amod ./PUNCT/2/punct"});
    const auto ms = locate_connectives(p, ConnectiveLexicon::builtin());
    REQUIRE(ms.size() == 1);
    CHECK(verb_adjacent_triggers(ms[0], p).empty());
    CHECK_FALSE(filter_paragraph(p, ConnectiveLexicon::builtin()).has_value());
  }

  TEST_CASE("verb head and verb dependent are both returned in order") {
    // "after" heads "left" and hangs off "slept".
    const auto p = testing::paragraph(
        {"She/PRON/2/nsubj slept/VERB/0/root after/SCONJ/2/advcl he/PRON/5/nsubj left/VERB/3/dep"});
    const auto ms = locate_connectives(p, ConnectiveLexicon::builtin());
    REQUIRE(ms.size() == 1);
    CHECK(verb_adjacent_triggers(ms[0], p) == std::vector<size_t>{1, 4});
  }

  TEST_CASE("depth two reaches grandparents") {
    const auto p = testing::paragraph(
        {"He/PRON/2/nsubj ran/VERB/0/root home/NOUN/2/obl so/ADV/3/dep"});
    const auto ms = locate_connectives(p, ConnectiveLexicon::builtin());
    REQUIRE(ms.size() == 1);
    CHECK(verb_adjacent_triggers(ms[0], p, 1).empty());
    CHECK(verb_adjacent_triggers(ms[0], p, 2) == std::vector<size_t>{1});
  }

  TEST_CASE("filter keeps the so-slept pair") {
    const auto kept = filter_paragraph(tired(), ConnectiveLexicon::builtin());
    REQUIRE(kept.has_value());
    REQUIRE(kept->meta.size() == 1);
    CHECK(kept->meta[0].relation.surface == "so");
    CHECK(kept->meta[0].trigger == 6);
    CHECK(kept->paragraph == tired());
  }

  TEST_CASE("a paragraph joined only by beside is rejected") {
    const auto p = testing::paragraph(
        {"I/PRON/2/nsubj sat/VERB/0/root beside/ADP/4/case the/DET/4/det window/NOUN/2/obl",
         "The/DET/2/det phone/NOUN/3/nsubj rang/VERB/0/root ./PUNCT/3/punct"});
    CHECK_FALSE(filter_paragraph(p, ConnectiveLexicon::builtin()).has_value());
  }

  TEST_CASE("two connectives with one verb each") {
    const auto p = testing::paragraph(
        {"He/PRON/3/nsubj was/AUX/3/cop tired/ADJ/0/root ./PUNCT/3/punct",
         "So/ADV/3/advmod he/PRON/3/nsubj slept/VERB/0/root ./PUNCT/3/punct",
         "However/ADV/3/advmod he/PRON/3/nsubj woke/VERB/0/root early/ADV/3/advmod ./PUNCT/3/punct"});
    const auto kept = filter_paragraph(p, ConnectiveLexicon::builtin());
    REQUIRE(kept.has_value());
    REQUIRE(kept->meta.size() == 2);
    CHECK(kept->meta[0].relation.surface == "so");
    CHECK(kept->meta[0].trigger == 6);
    CHECK(kept->meta[1].relation.surface == "however");
    CHECK(kept->meta[1].trigger == 10);
  }

  TEST_CASE("indexed filter agrees with the brute-force scan") {
    const auto& lex = ConnectiveLexicon::builtin();
    oracle::ParagraphGenerator gen(lex, 20261015);
    size_t kept = 0;
    for (size_t i = 0; i < 300; ++i) {
      const auto p = gen.next(i);
      for (size_t depth : {1, 2}) {
        const auto expect = oracle::brute_meta(p, lex, depth);
        const auto got = filter_paragraph(p, lex, {depth});
        CHECK(got.has_value() == !expect.empty());
        if (got) {
          CHECK(got->meta == expect);
          kept += depth == 1;
        }
        CHECK(locate_connectives(p, lex) == oracle::brute_locate(p, lex));
      }
    }
    CHECK(kept > 30);
    CHECK(kept < 290);
  }

  TEST_CASE("every meta pair re-checks against the adjacency predicate") {
    const auto& lex = ConnectiveLexicon::builtin();
    oracle::ParagraphGenerator gen(lex, 3);
    for (size_t i = 0; i < 200; ++i) {
      const auto p = gen.next(i);
      const auto got = filter_paragraph(p, lex);
      if (!got) continue;
      const auto refs = flatten(p);
      for (const auto& m : got->meta) {
        CHECK(m.relation.end > m.relation.begin);
        const auto tr = refs[m.trigger];
        CHECK(tr.sentence == m.relation.sentence);
        CHECK(is_verb_tag(p.sentences[tr.sentence].tokens[tr.position].upos));
        bool adjacent = false;
        for (size_t f = m.relation.begin; f < m.relation.end; ++f)
          adjacent = adjacent || oracle::linked(p.sentences[tr.sentence], refs[f].position, tr.position);
        CHECK(adjacent);
        std::string matched;
        for (size_t f = m.relation.begin; f < m.relation.end; ++f)
          matched += (f > m.relation.begin ? " " : "") +
                     oracle::lower_ascii(p.sentences[refs[f].sentence].tokens[refs[f].position].surface);
        CHECK(matched == m.relation.surface);
      }
    }
  }

  TEST_CASE("a larger lexicon never rejects a kept paragraph") {
    const auto small = lexicon("so\tCONTINGENCY\nbut\tCOMPARISON\nafter\tTEMPORAL\n");
    const auto& full = ConnectiveLexicon::builtin();
    oracle::ParagraphGenerator gen(full, 99);
    size_t kept_small = 0;
    for (size_t i = 0; i < 300; ++i) {
      const auto p = gen.next(i);
      if (filter_paragraph(p, small)) {
        ++kept_small;
        CHECK(filter_paragraph(p, full).has_value());
      }
    }
    CHECK(kept_small > 0);
  }

  TEST_CASE("filtering is deterministic") {
    const auto& lex = ConnectiveLexicon::builtin();
    oracle::ParagraphGenerator a(lex, 5), b(lex, 5);
    for (size_t i = 0; i < 50; ++i) {
      const auto pa = a.next(i);
      const auto pb = b.next(i);
      REQUIRE(pa == pb);
      const auto fa = filter_paragraph(pa, lex);
      const auto fb = filter_paragraph(pb, lex);
      CHECK(fa.has_value() == fb.has_value());
      if (fa && fb) CHECK(fa->meta == fb->meta);
    }
  }
}
