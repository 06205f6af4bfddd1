// Brute-force connective location and verb adjacency, plus a random
// paragraph generator. Shared by unit and acceptance tests.

#ifndef EVENTBERT_TESTS_DISCOURSE_ORACLE_H_
#define EVENTBERT_TESTS_DISCOURSE_ORACLE_H_

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eventbert/conllu.h"
#include "eventbert/discourse.h"

namespace eventbert::oracle {

inline std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Scans every token against every lexicon entry; the longest entry wins and
// the scan resumes after it.
inline std::vector<RelationMention> brute_locate(const Paragraph& p,
                                                 const ConnectiveLexicon& lex) {
  std::vector<RelationMention> out;
  size_t offset = 0;
  for (size_t s = 0; s < p.sentences.size(); ++s) {
    const auto& toks = p.sentences[s].tokens;
    size_t i = 0;
    while (i < toks.size()) {
      const ConnectiveLexicon::Entry* best = nullptr;
      for (const auto& [surface, entry] : lex.entries()) {
        const size_t n = entry.words.size();
        if (i + n > toks.size()) continue;
        bool ok = true;
        for (size_t k = 0; k < n && ok; ++k) ok = lower_ascii(toks[i + k].surface) == entry.words[k];
        if (ok && (!best || n > best->words.size())) best = &entry;
      }
      if (!best) {
        ++i;
        continue;
      }
      const size_t n = best->words.size();
      out.push_back({p.id, offset + i, offset + i + n, s, best->surface, best->category});
      i += n;
    }
    offset += toks.size();
  }
  return out;
}

// Undirected edge test by reading both head columns.
inline bool linked(const Sentence& s, size_t a, size_t b) {
  return s.tokens[a].head == static_cast<int>(b) + 1 || s.tokens[b].head == static_cast<int>(a) + 1;
}

// Grows the neighborhood one ring at a time by testing every token pair.
inline std::vector<size_t> brute_triggers(const RelationMention& r, const Paragraph& p,
                                          size_t depth) {
  size_t offset = 0;
  for (size_t s = 0; s < r.sentence; ++s) offset += p.sentences[s].size();
  const Sentence& s = p.sentences[r.sentence];
  std::set<size_t> reached;
  for (size_t f = r.begin; f < r.end; ++f) reached.insert(f - offset);
  const std::set<size_t> own = reached;
  for (size_t d = 0; d < depth; ++d) {
    std::set<size_t> next = reached;
    for (size_t a : reached)
      for (size_t b = 0; b < s.size(); ++b)
        if (linked(s, a, b)) next.insert(b);
    reached = std::move(next);
  }
  std::vector<size_t> out;
  for (size_t v : reached)
    if (!own.count(v) && is_verb_tag(s.tokens[v].upos)) out.push_back(offset + v);
  return out;
}

inline std::vector<MetaPair> brute_meta(const Paragraph& p, const ConnectiveLexicon& lex,
                                        size_t depth) {
  std::vector<MetaPair> meta;
  for (const auto& r : brute_locate(p, lex))
    for (size_t v : brute_triggers(r, p, depth)) meta.push_back({r, v});
  return meta;
}

// Random trees over a vocabulary salted with lexicon words, including every
// word of every multiword entry so that partial matches occur.
class ParagraphGenerator {
 public:
  ParagraphGenerator(const ConnectiveLexicon& lex, uint64_t seed) : rng_(seed) {
    for (const auto& [surface, entry] : lex.entries()) {
      for (const auto& w : entry.words) words_.push_back(w);
      phrases_.push_back(entry.words);
    }
    for (const char* w : {"the", "dog", "ran", "ate", "was", "house", "green", "quickly",
                          "she", "it", "slept", "rain", "fell", "door", "opened", ".", ","})
      words_.push_back(w);
  }

  Paragraph next(size_t index) {
    static const char* kTags[] = {"VERB", "AUX", "NOUN", "ADV", "SCONJ", "CCONJ",
                                  "PRON", "DET", "ADJ", "PUNCT"};
    Paragraph p;
    p.doc_id = "rand";
    p.doc_position = static_cast<int>(index);
    p.id = "rand." + std::to_string(index);
    const size_t n_sent = 1 + rng_() % 4;
    for (size_t s = 0; s < n_sent; ++s) {
      std::vector<std::string> forms;
      const size_t n_tok = 1 + rng_() % 14;
      while (forms.size() < n_tok) {
        if (rng_() % 4 == 0) {
          const auto& ph = phrases_[rng_() % phrases_.size()];
          for (const auto& w : ph) forms.push_back(w);
        } else {
          forms.push_back(words_[rng_() % words_.size()]);
        }
      }
      Sentence sent;
      const size_t n = forms.size();
      // Random recursive tree: a random permutation orders attachment.
      std::vector<size_t> order(n);
      for (size_t i = 0; i < n; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng_);
      std::vector<int> head(n, 0);
      for (size_t k = 1; k < n; ++k) head[order[k]] = static_cast<int>(order[rng_() % k]) + 1;
      for (size_t i = 0; i < n; ++i) {
        Token t;
        t.index = static_cast<int>(i) + 1;
        t.surface = rng_() % 5 == 0 ? upper_first(forms[i]) : forms[i];
        t.upos = kTags[rng_() % 10];
        t.head = head[i];
        t.deprel = head[i] == 0 ? "root" : "dep";
        sent.tokens.push_back(std::move(t));
      }
      p.sentences.push_back(std::move(sent));
    }
    rebuild_text(p);
    return p;
  }

 private:
  static std::string upper_first(std::string w) {
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
  }

  std::mt19937_64 rng_;
  std::vector<std::string> words_;
  std::vector<std::vector<std::string>> phrases_;
};

}  // namespace eventbert::oracle

#endif  // EVENTBERT_TESTS_DISCOURSE_ORACLE_H_
