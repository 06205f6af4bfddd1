#include "eventbert/negatives.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "eventbert/errors.h"

namespace eventbert {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

bool has_alnum(std::string_view s) {
  for (unsigned char c : s)
    if (std::isalnum(c) || c >= 0x80) return true;
  return false;
}

uint64_t cache_key(size_t id, Scheme s, size_t n) {
  return (static_cast<uint64_t>(id) << 16) ^ (static_cast<uint64_t>(s) << 12) ^ n;
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kLexicon: return "LB";
    case Scheme::kPos: return "PB";
    case Scheme::kInDomain: return "ID";
    case Scheme::kUniform: return "UNI";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "LB") return Scheme::kLexicon;
  if (name == "PB") return Scheme::kPos;
  if (name == "ID") return Scheme::kInDomain;
  if (name == "UNI") return Scheme::kUniform;
  throw DataError("unknown negative scheme '" + std::string(name) + "'");
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",     "an",    "the",   "of",    "to",    "in",    "on",    "at",    "for",
      "with",  "by",    "from",  "as",    "into",  "onto",  "about", "than",  "over",
      "under", "up",    "down",  "out",   "off",   "and",   "or",    "but",   "so",
      "if",    "because", "while", "then", "that", "this",  "these", "those", "is",
      "was",   "were",  "are",   "am",    "be",    "been",  "being", "has",   "have",
      "had",   "do",    "does",  "did",   "will",  "would", "can",   "could", "should",
      "shall", "may",   "might", "must",  "very",  "too",   "not",   "no",    "just"};
  return words;
}

std::string pos_signature(const std::map<std::string, int>& counts) {
  std::string sig;
  for (const auto& [tag, n] : counts) {
    if (!sig.empty()) sig += ',';
    sig += tag + ":" + std::to_string(n);
  }
  return sig;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [tag, n] : a) {
    na += static_cast<double>(n) * n;
    auto it = b.find(tag);
    if (it != b.end()) dot += static_cast<double>(n) * it->second;
  }
  for (const auto& [_, n] : b) nb += static_cast<double>(n) * n;
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EventPool EventPool::build(const std::vector<TrainingExample>& dataset,
                           const std::set<std::string>& stopwords) {
  if (dataset.empty()) throw PoolError("cannot build an event pool from an empty dataset");
  EventPool pool;
  pool.events_.reserve(dataset.size());
  for (const auto& ex : dataset) {
    PoolEvent ev;
    ev.id = pool.events_.size();
    ev.example_id = ex.id;
    ev.doc_id = ex.doc_id;
    ev.doc_position = ex.doc_position;
    const Span e = ex.event.span;
    std::set<std::string> content;
    for (size_t i = e.begin; i < e.end; ++i) {
      ev.tokens.push_back(ex.tokens[i]);
      ev.upos.push_back(ex.upos[i]);
      std::string w = lower(ex.tokens[i]);
      if (!ev.key.empty()) ev.key += ' ';
      ev.key += w;
      ev.pos_counts[ex.upos[i]]++;
      if (has_alnum(w) && !stopwords.contains(w)) content.insert(w);
    }
    ev.content.assign(content.begin(), content.end());
    for (const auto& w : ev.content) pool.lexicon_index_[w].push_back(ev.id);
    pool.pos_index_[pos_signature(ev.pos_counts)].push_back(ev.id);
    pool.locality_index_[ev.doc_id].emplace_back(ev.doc_position, ev.id);
    if (!pool.by_example_.emplace(ex.id, ev.id).second)
      throw PoolError("duplicate example id " + ex.id);
    pool.events_.push_back(std::move(ev));
  }
  for (auto& [_, list] : pool.locality_index_) std::sort(list.begin(), list.end());
  return pool;
}

EventPool::EventPool(EventPool&& other) noexcept
    : events_(std::move(other.events_)),
      by_example_(std::move(other.by_example_)),
      lexicon_index_(std::move(other.lexicon_index_)),
      pos_index_(std::move(other.pos_index_)),
      locality_index_(std::move(other.locality_index_)),
      cache_(std::move(other.cache_)) {}

const PoolEvent& EventPool::event(size_t id) const {
  if (id >= events_.size()) throw PoolError("unknown event id " + std::to_string(id));
  return events_[id];
}

size_t EventPool::id_of(std::string_view example_id) const {
  auto it = by_example_.find(std::string(example_id));
  if (it == by_example_.end())
    throw PoolError("example " + std::string(example_id) + " is not in the event pool");
  return it->second;
}

bool EventPool::excluded(size_t query, size_t candidate) const {
  return candidate == query || events_[candidate].key == events_[query].key;
}

std::vector<size_t> EventPool::retrieve(size_t id, Scheme scheme, size_t n) const {
  event(id);
  const uint64_t key = cache_key(id, scheme, n);
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto result = compute(id, scheme, n);
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(key, result);
  return result;
}

std::vector<size_t> EventPool::compute(size_t id, Scheme scheme, size_t n) const {
  const PoolEvent& q = events_[id];
  std::vector<std::pair<double, size_t>> scored;  // (-score or distance, id)
  switch (scheme) {
    case Scheme::kLexicon: {
      std::set<size_t> candidates;
      for (const auto& w : q.content) {
        auto it = lexicon_index_.find(w);
        if (it != lexicon_index_.end()) candidates.insert(it->second.begin(), it->second.end());
      }
      for (size_t c : candidates) {
        if (excluded(id, c)) continue;
        scored.emplace_back(-jaccard(q.content, events_[c].content), c);
      }
      break;
    }
    case Scheme::kPos: {
      // Rank whole signature buckets first; ids inside equal-score buckets
      // are merged and sorted by the final sort below.
      std::vector<std::pair<double, const std::vector<size_t>*>> buckets;
      for (const auto& [sig, ids] : pos_index_) {
        double s = cosine(q.pos_counts, events_[ids.front()].pos_counts);
        if (s > 0) buckets.emplace_back(-s, &ids);
      }
      std::stable_sort(buckets.begin(), buckets.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      size_t taken = 0;
      for (size_t b = 0; b < buckets.size(); ++b) {
        if (taken >= n && buckets[b].first != buckets[b - 1].first) break;
        for (size_t c : *buckets[b].second) {
          if (excluded(id, c)) continue;
          scored.emplace_back(buckets[b].first, c);
          ++taken;
        }
      }
      break;
    }
    case Scheme::kInDomain: {
      for (const auto& [pos, c] : locality_index_.at(q.doc_id)) {
        const int d = std::abs(pos - q.doc_position);
        if (d > 5 || excluded(id, c)) continue;
        scored.emplace_back(static_cast<double>(d), c);
      }
      break;
    }
    case Scheme::kUniform:
      break;
  }
  std::sort(scored.begin(), scored.end());
  std::vector<size_t> out;
  for (size_t i = 0; i < scored.size() && out.size() < n; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<size_t> retrieve_candidates(const EventPool& pool, size_t event_id, Scheme scheme,
                                        size_t n) {
  return pool.retrieve(event_id, scheme, n);
}

std::vector<EventNegative> sample_event_negatives(const EventPool& pool,
                                                  const TrainingExample& ex,
                                                  const SamplerConfig& config, Rng& rng) {
  const size_t id = pool.id_of(ex.id);
  if (pool.size() < 2)
    throw SamplingError("event pool holds only the positive event of " + ex.id);
  std::vector<size_t> fallback_pool;
  auto uniform_candidates = [&]() -> const std::vector<size_t>& {
    if (fallback_pool.empty()) {
      for (size_t c = 0; c < pool.size(); ++c)
        if (c != id && pool.event(c).key != pool.event(id).key) fallback_pool.push_back(c);
      if (fallback_pool.empty())
        throw SamplingError("no event in the pool differs from the positive of " + ex.id);
    }
    return fallback_pool;
  };

  const auto& probs = config.scheme_probs;
  std::vector<EventNegative> out;
  for (size_t k = 0; k < config.m; ++k) {
    const double u = rng.uniform();
    Scheme scheme = u < probs[0]             ? Scheme::kLexicon
                    : u < probs[0] + probs[1] ? Scheme::kPos
                                              : Scheme::kInDomain;
    std::vector<size_t> list = pool.retrieve(id, scheme, config.n);
    if (list.empty()) {
      for (Scheme s : {Scheme::kPos, Scheme::kLexicon, Scheme::kInDomain}) {
        if (s == scheme) continue;
        list = pool.retrieve(id, s, config.n);
        if (!list.empty()) {
          scheme = s;
          break;
        }
      }
    }
    if (list.empty()) {
      scheme = Scheme::kUniform;
      list = uniform_candidates();
    }
    const size_t pick = list[rng.below(list.size())];
    const PoolEvent& neg = pool.event(pick);
    EventNegative en;
    en.scheme = scheme;
    en.event_id = pick;
    const Span e = ex.event.span;
    en.tokens.assign(ex.tokens.begin(), ex.tokens.begin() + e.begin);
    en.tokens.insert(en.tokens.end(), neg.tokens.begin(), neg.tokens.end());
    en.tokens.insert(en.tokens.end(), ex.tokens.begin() + e.end, ex.tokens.end());
    en.span = {e.begin, e.begin + neg.tokens.size()};
    out.push_back(std::move(en));
  }
  return out;
}

std::vector<RelationNegative> sample_relation_negatives(const ConnectiveLexicon& lex,
                                                        const TrainingExample& ex, size_t m,
                                                        Rng& rng) {
  std::vector<const ConnectiveLexicon::Entry*> candidates;
  for (const auto& [_, entry] : lex.entries())
    if (entry.category != ex.relation.category) candidates.push_back(&entry);
  if (candidates.empty())
    throw SamplingError("no connective outside category " + ex.relation.category);

  std::vector<const ConnectiveLexicon::Entry*> picks;
  if (candidates.size() >= m) {
    for (size_t i = 0; i < m; ++i) {
      const size_t j = i + rng.below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      picks.push_back(candidates[i]);
    }
  } else {
    for (size_t i = 0; i < m; ++i) picks.push_back(candidates[rng.below(candidates.size())]);
  }

  const Span r = ex.relation.span;
  const Span e = ex.event.span;
  std::vector<RelationNegative> out;
  for (const auto* entry : picks) {
    RelationNegative rn;
    rn.surface = entry->surface;
    rn.category = entry->category;
    rn.tokens.assign(ex.tokens.begin(), ex.tokens.begin() + r.begin);
    rn.tokens.insert(rn.tokens.end(), entry->words.begin(), entry->words.end());
    rn.tokens.insert(rn.tokens.end(), ex.tokens.begin() + r.end, ex.tokens.end());
    rn.relation = {r.begin, r.begin + entry->words.size()};
    rn.event = e;
    if (e.begin >= r.end) {
      rn.event.begin = e.begin - r.size() + entry->words.size();
      rn.event.end = e.end - r.size() + entry->words.size();
    }
    out.push_back(std::move(rn));
  }
  return out;
}

std::vector<NegativeSet> build_negative_sets(const std::vector<TrainingExample>& dataset,
                                             const EventPool& pool,
                                             const ConnectiveLexicon& lex,
                                             const SamplerConfig& config) {
  std::vector<NegativeSet> sets;
  sets.reserve(dataset.size());
  for (const auto& ex : dataset) {
    Rng rng(derive_seed(config.seed, ex.id, config.epoch));
    NegativeSet ns;
    ns.example_id = ex.id;
    ns.event_negs = sample_event_negatives(pool, ex, config, rng);
    ns.rel_negs = sample_relation_negatives(lex, ex, config.m, rng);
    sets.push_back(std::move(ns));
  }
  return sets;
}

}  // namespace eventbert
