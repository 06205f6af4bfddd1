#include "eventbert/synthetic.h"

#include <sstream>

#include "eventbert/errors.h"
#include "eventbert/rng.h"

namespace eventbert {

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> kScenarios = {
      {"drowsy", "took/VERB a/DET long/ADJ nap/NOUN", "partied/VERB all/DET night/NOUN",
       "felt/VERB rested/ADJ"},
      {"hungry", "ate/VERB a/DET big/ADJ sandwich/NOUN", "skipped/VERB dinner/NOUN",
       "felt/VERB full/ADJ"},
      {"thirsty", "drank/VERB cold/ADJ water/NOUN", "ate/VERB salty/ADJ chips/NOUN",
       "felt/VERB refreshed/ADJ"},
      {"cold", "wore/VERB a/DET warm/ADJ coat/NOUN", "opened/VERB every/DET window/NOUN",
       "felt/VERB warm/ADJ"},
      {"sick", "visited/VERB the/DET doctor/NOUN", "ran/VERB a/DET marathon/NOUN",
       "recovered/VERB quickly/ADV"},
      {"bored", "watched/VERB a/DET funny/ADJ movie/NOUN", "sorted/VERB old/ADJ receipts/NOUN",
       "laughed/VERB loudly/ADV"},
      {"dirty", "took/VERB a/DET hot/ADJ shower/NOUN", "rolled/VERB in/ADP the/DET mud/NOUN",
       "felt/VERB clean/ADJ"},
      {"late", "ran/VERB to/ADP the/DET station/NOUN", "walked/VERB very/ADV slowly/ADV",
       "caught/VERB the/DET train/NOUN"},
      {"lonely", "called/VERB an/DET old/ADJ friend/NOUN", "ignored/VERB every/DET call/NOUN",
       "felt/VERB loved/ADJ"},
      {"sad", "hugged/VERB the/DET puppy/NOUN", "watched/VERB a/DET tragic/ADJ film/NOUN",
       "smiled/VERB brightly/ADV"},
      {"nervous", "practiced/VERB the/DET speech/NOUN", "lost/VERB the/DET notes/NOUN",
       "spoke/VERB clearly/ADV"},
      {"poor", "found/VERB a/DET new/ADJ job/NOUN", "bought/VERB a/DET fancy/ADJ car/NOUN",
       "paid/VERB the/DET rent/NOUN"},
  };
  return kScenarios;
}

std::vector<Token> build_verb_phrase(const std::string& tagged) {
  std::vector<Token> toks;
  std::istringstream in(tagged);
  std::string item;
  while (in >> item) {
    const size_t slash = item.rfind('/');
    if (slash == std::string::npos) throw ContractError("untagged word in phrase: " + item);
    Token t;
    t.surface = item.substr(0, slash);
    t.upos = item.substr(slash + 1);
    toks.push_back(std::move(t));
  }
  if (toks.empty() || toks[0].upos != "VERB") throw ContractError("phrase must start with a verb");
  auto next_with = [&](size_t i, std::initializer_list<const char*> tags) -> int {
    for (size_t j = i + 1; j < toks.size(); ++j)
      for (const char* tag : tags)
        if (toks[j].upos == tag) return static_cast<int>(j);
    return -1;
  };
  // Heads here are phrase-relative 0-based indices; -1 marks the phrase root.
  std::vector<int> heads(toks.size(), 0);
  heads[0] = -1;
  toks[0].deprel = "root";
  bool has_obj = false;
  for (size_t i = 1; i < toks.size(); ++i) {
    Token& t = toks[i];
    const int noun = next_with(i, {"NOUN"});
    if (t.upos == "DET" || (t.upos == "ADJ" && noun >= 0)) {
      heads[i] = noun >= 0 ? noun : 0;
      t.deprel = t.upos == "DET" ? "det" : "amod";
    } else if (t.upos == "ADJ") {
      t.deprel = "xcomp";
    } else if (t.upos == "ADP") {
      heads[i] = noun >= 0 ? noun : 0;
      t.deprel = "case";
    } else if (t.upos == "ADV") {
      const bool modifies_next = i + 1 < toks.size() &&
                                 (toks[i + 1].upos == "ADV" || toks[i + 1].upos == "ADJ");
      heads[i] = modifies_next ? static_cast<int>(i + 1) : 0;
      t.deprel = "advmod";
    } else if (t.upos == "NOUN") {
      bool has_case = false;
      for (size_t j = 1; j < i; ++j)
        if (heads[j] == static_cast<int>(i) && toks[j].upos == "ADP") has_case = true;
      t.deprel = has_case || has_obj ? "obl" : "obj";
      has_obj = has_obj || t.deprel == "obj";
    } else {
      t.deprel = "dep";
    }
  }
  for (size_t i = 0; i < toks.size(); ++i) toks[i].head = heads[i];
  return toks;
}

namespace {

const std::vector<std::pair<std::string, std::string>>& names() {
  static const std::vector<std::pair<std::string, std::string>> kNames = {
      {"Andrew", "he"}, {"Tom", "he"},   {"Jack", "he"},  {"Peter", "he"},
      {"Sam", "he"},    {"Mike", "he"},  {"Ben", "he"},   {"Leo", "he"},
      {"Anna", "she"},  {"Mary", "she"}, {"Lucy", "she"}, {"Emma", "she"},
      {"Kate", "she"},  {"Sara", "she"}, {"Nora", "she"}, {"Ruth", "she"},
  };
  return kNames;
}

const std::vector<std::string>& intensifiers() {
  static const std::vector<std::string> kWords = {"very", "really", "quite", "extremely"};
  return kWords;
}

// Accumulates one sentence; heads are 0-based token positions, -1 = root.
class SentenceBuilder {
 public:
  size_t add(std::string surface, std::string upos, int head, std::string deprel) {
    Token t;
    t.surface = std::move(surface);
    t.upos = std::move(upos);
    t.deprel = std::move(deprel);
    tokens_.push_back(std::move(t));
    heads_.push_back(head);
    return tokens_.size() - 1;
  }
  // Appends a verb phrase; returns the position of its verb. The verb is
  // attached to `head` with `deprel`.
  size_t add_phrase(const std::string& tagged, int head, const std::string& deprel) {
    const size_t base = tokens_.size();
    for (Token t : build_verb_phrase(tagged)) {
      const int h = t.head < 0 ? head : static_cast<int>(base) + t.head;
      if (t.head < 0) t.deprel = deprel;
      tokens_.push_back(std::move(t));
      heads_.push_back(h);
    }
    return base;
  }
  void set_head(size_t i, int head) { heads_[i] = head; }
  size_t size() const { return tokens_.size(); }
  Sentence build() {
    Sentence s;
    for (size_t i = 0; i < tokens_.size(); ++i) {
      Token t = tokens_[i];
      t.index = static_cast<int>(i) + 1;
      t.head = heads_[i] + 1;
      if (heads_[i] < 0) t.deprel = "root";
      t.space_after = !(i + 1 < tokens_.size() && tokens_[i + 1].upos == "PUNCT");
      s.tokens.push_back(std::move(t));
    }
    return s;
  }

 private:
  std::vector<Token> tokens_;
  std::vector<int> heads_;
};

// "<Name> was <intensifier> <state>"; returns the position of the state.
size_t add_copular(SentenceBuilder& b, const std::string& name, const std::string& adv,
                   const std::string& state) {
  const size_t base = b.size();
  const int pred = static_cast<int>(base) + 3;
  b.add(name, "PROPN", pred, "nsubj");
  b.add("was", "AUX", pred, "cop");
  b.add(adv, "ADV", pred, "advmod");
  b.add(state, "ADJ", -1, "root");
  return base + 3;
}

// ", <conn> <pron> <phrase>" attached as a conjunct of `pred`.
void add_joined_clause(SentenceBuilder& b, size_t pred, const std::string& conn,
                       const std::string& conn_upos, const std::string& conn_rel,
                       const std::string& pron, const std::string& phrase) {
  const size_t comma = b.add(",", "PUNCT", 0, "punct");
  const size_t c = b.add(conn, conn_upos, 0, conn_rel);
  const size_t p = b.add(pron, "PRON", 0, "nsubj");
  const size_t v = b.add_phrase(phrase, static_cast<int>(pred), "conj");
  for (size_t i : {comma, c, p}) b.set_head(i, static_cast<int>(v));
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// "<Adv> , <pron> <phrase> ." with the adverb attached to the verb.
Sentence adverbial_sentence(const std::string& adv, bool comma, const std::string& pron,
                            const std::string& phrase) {
  SentenceBuilder b;
  const size_t a = b.add(adv, "ADV", 0, "advmod");
  std::vector<size_t> deps{a};
  if (comma) deps.push_back(b.add(",", "PUNCT", 0, "punct"));
  deps.push_back(b.add(pron, "PRON", 0, "nsubj"));
  const size_t v = b.add_phrase(phrase, -1, "root");
  deps.push_back(b.add(".", "PUNCT", static_cast<int>(v), "punct"));
  for (size_t i : deps) b.set_head(i, static_cast<int>(v));
  return b.build();
}

Sentence copular_sentence(const std::string& name, const std::string& adv,
                          const std::string& state) {
  SentenceBuilder b;
  const size_t pred = add_copular(b, name, adv, state);
  b.add(".", "PUNCT", static_cast<int>(pred), "punct");
  return b.build();
}

Sentence clause_sentence(const std::string& pron, const std::string& phrase) {
  SentenceBuilder b;
  const size_t p = b.add(capitalize(pron), "PRON", 0, "nsubj");
  const size_t v = b.add_phrase(phrase, -1, "root");
  b.set_head(p, static_cast<int>(v));
  b.add(".", "PUNCT", static_cast<int>(v), "punct");
  return b.build();
}

}  // namespace

std::vector<Paragraph> synthetic_corpus(const SyntheticConfig& config) {
  const auto& scenarios = builtin_scenarios();
  std::vector<Paragraph> out;
  for (size_t d = 0; d < config.documents; ++d) {
    const std::string doc = "synth-" + std::to_string(config.seed) + "-" + std::to_string(d);
    for (size_t k = 0; k < config.paragraphs_per_document; ++k) {
      Rng rng(derive_seed(config.seed, doc, k));
      const Scenario& sc = scenarios[rng.below(scenarios.size())];
      const auto& [name, pron] = names()[rng.below(names().size())];
      const std::string& adv = intensifiers()[rng.below(intensifiers().size())];
      Paragraph p;
      p.doc_id = doc;
      p.doc_position = static_cast<int>(k);
      p.id = doc + "." + std::to_string(k);

      if (rng.bernoulli(config.noise_rate)) {
        switch (rng.below(4)) {
          case 0: {  // connective with no verb nearby
            p.sentences.push_back(copular_sentence(name, "so", sc.state));
            SentenceBuilder b;
            const size_t n = b.add(name, "PROPN", 1, "nsubj");
            const size_t v = b.add("stayed", "VERB", -1, "root");
            b.add("at", "ADP", 3, "case");
            b.add("home", "NOUN", static_cast<int>(v), "obl");
            b.add(".", "PUNCT", static_cast<int>(v), "punct");
            (void)n;
            p.sentences.push_back(b.build());
            break;
          }
          case 1:  // no connective at all
            p.sentences.push_back(copular_sentence(name, adv, sc.state));
            p.sentences.push_back(clause_sentence(pron, sc.consistent));
            break;
          case 2: {  // too short
            SentenceBuilder b;
            b.add(name, "PROPN", 1, "nsubj");
            b.add("slept", "VERB", -1, "root");
            b.add(".", "PUNCT", 1, "punct");
            p.sentences.push_back(b.build());
            break;
          }
          default: {  // mostly symbols
            SentenceBuilder b;
            const int root = 4;
            for (const char* sym : {"###", "%%%", "@@@", "&&&"}) b.add(sym, "SYM", root, "dep");
            b.add("ran", "VERB", -1, "root");
            for (const char* sym : {"***", "$$$", "^^^", "~~~"}) b.add(sym, "SYM", root, "dep");
            p.sentences.push_back(b.build());
          }
        }
      } else {
        const size_t kind = rng.below(10);
        SentenceBuilder b;
        if (kind < 3 || kind == 8) {
          const size_t pred = add_copular(b, name, adv, sc.state);
          add_joined_clause(b, pred, "so", "ADV", "advmod", pron, sc.consistent);
          b.add(".", "PUNCT", static_cast<int>(pred), "punct");
          p.sentences.push_back(b.build());
          if (kind == 8) p.sentences.push_back(adverbial_sentence("Then", false, pron, sc.outcome));
        } else if (kind < 6) {
          const size_t pred = add_copular(b, name, adv, sc.state);
          add_joined_clause(b, pred, "but", "CCONJ", "cc", pron, sc.contradictory);
          b.add(".", "PUNCT", static_cast<int>(pred), "punct");
          p.sentences.push_back(b.build());
        } else if (kind == 6) {
          p.sentences.push_back(copular_sentence(name, adv, sc.state));
          p.sentences.push_back(adverbial_sentence("Therefore", true, pron, sc.consistent));
        } else if (kind == 7) {
          p.sentences.push_back(copular_sentence(name, adv, sc.state));
          p.sentences.push_back(adverbial_sentence("However", true, pron, sc.contradictory));
        } else {
          const size_t mark = b.add("After", "SCONJ", 0, "mark");
          const size_t subj = b.add(pron, "PRON", 0, "nsubj");
          const size_t v1 = b.add_phrase(sc.consistent, 0, "advcl");
          b.set_head(mark, static_cast<int>(v1));
          b.set_head(subj, static_cast<int>(v1));
          const size_t comma = b.add(",", "PUNCT", 0, "punct");
          const size_t n = b.add(name, "PROPN", 0, "nsubj");
          const size_t v2 = b.add_phrase(sc.outcome, -1, "root");
          for (size_t i : {v1, comma, n}) b.set_head(i, static_cast<int>(v2));
          b.add(".", "PUNCT", static_cast<int>(v2), "punct");
          p.sentences.push_back(b.build());
        }
      }
      rebuild_text(p);
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

std::vector<std::string> words_of(const std::string& tagged) {
  std::vector<std::string> out;
  for (const Token& t : build_verb_phrase(tagged)) out.push_back(t.surface);
  return out;
}

std::vector<std::string> with_subject(const std::string& subject, const std::string& tagged) {
  std::vector<std::string> out{subject};
  for (auto& w : words_of(tagged)) out.push_back(std::move(w));
  return out;
}

}  // namespace

std::vector<MultiChoiceInstance> synthetic_instances(size_t count, uint64_t seed) {
  const auto& scenarios = builtin_scenarios();
  std::vector<MultiChoiceInstance> out;
  for (size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "instance", i));
    const size_t si = rng.below(scenarios.size());
    size_t other = rng.below(scenarios.size() - 1);
    if (other >= si) ++other;
    const Scenario& sc = scenarios[si];
    const Scenario& alt = scenarios[other];
    const auto& [name, pron] = names()[rng.below(names().size())];
    const std::string& adv = intensifiers()[rng.below(intensifiers().size())];

    MultiChoiceInstance inst;
    inst.id = "inst-" + std::to_string(i);
    std::vector<std::string> right, wrong;
    switch (rng.below(3)) {
      case 0:
        inst.fw = {name, "was", adv, sc.state, ",", "so"};
        inst.bw = {"."};
        right = with_subject(pron, sc.consistent);
        wrong = with_subject(pron, rng.bernoulli(0.5) ? sc.contradictory : alt.consistent);
        break;
      case 1:
        inst.fw = {name, "was", adv, sc.state, ",", "but"};
        inst.bw = {"."};
        right = with_subject(pron, sc.contradictory);
        wrong = with_subject(pron, sc.consistent);
        break;
      default:
        inst.fw = {"After", pron};
        for (auto& w : words_of(sc.consistent)) inst.fw.push_back(w);
        inst.fw.push_back(",");
        inst.bw = {"."};
        right = with_subject(name, sc.outcome);
        wrong = with_subject(name, alt.outcome);
        if (right == wrong) wrong = with_subject(name, sc.contradictory);
    }
    const size_t gold = rng.below(2);
    inst.candidates = gold == 0 ? std::vector{right, wrong} : std::vector{wrong, right};
    inst.gold = gold;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace eventbert
