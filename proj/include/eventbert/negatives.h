// Event pool with lexicon / PoS / locality retrieval and the two kinds of
// contrastive corruption: event replacement and connective replacement.

#ifndef EVENTBERT_NEGATIVES_H_
#define EVENTBERT_NEGATIVES_H_

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eventbert/discourse.h"
#include "eventbert/events.h"
#include "eventbert/rng.h"

namespace eventbert {

enum class Scheme { kLexicon, kPos, kInDomain, kUniform };

std::string_view scheme_name(Scheme s);  // "LB", "PB", "ID", "UNI"
Scheme parse_scheme(std::string_view name);

const std::set<std::string>& default_stopwords();

struct PoolEvent {
  size_t id = 0;
  std::string example_id;
  std::string doc_id;
  int doc_position = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> upos;
  std::string key;                   // lowercased surface, used for identity
  std::vector<std::string> content;  // sorted, unique, lowercased
  std::map<std::string, int> pos_counts;
};

class EventPool {
 public:
  // Throws PoolError on an empty dataset. Event ids follow dataset order.
  static EventPool build(const std::vector<TrainingExample>& dataset,
                         const std::set<std::string>& stopwords = default_stopwords());

  EventPool(EventPool&& other) noexcept;

  size_t size() const { return events_.size(); }
  const PoolEvent& event(size_t id) const;
  const std::vector<PoolEvent>& events() const { return events_; }
  // Throws PoolError for an unknown example.
  size_t id_of(std::string_view example_id) const;

  const std::unordered_map<std::string, std::vector<size_t>>& lexicon_index() const {
    return lexicon_index_;
  }
  const std::map<std::string, std::vector<size_t>>& pos_index() const { return pos_index_; }
  const std::map<std::string, std::vector<std::pair<int, size_t>>>& locality_index() const {
    return locality_index_;
  }

  // Up to n candidates for `id` under `scheme`, best first. Never returns
  // `id` itself nor an event with the same surface. Cached per (id, scheme, n).
  std::vector<size_t> retrieve(size_t id, Scheme scheme, size_t n) const;

 private:
  EventPool() = default;
  std::vector<size_t> compute(size_t id, Scheme scheme, size_t n) const;
  bool excluded(size_t query, size_t candidate) const;

  std::vector<PoolEvent> events_;
  std::unordered_map<std::string, size_t> by_example_;
  std::unordered_map<std::string, std::vector<size_t>> lexicon_index_;
  std::map<std::string, std::vector<size_t>> pos_index_;
  std::map<std::string, std::vector<std::pair<int, size_t>>> locality_index_;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<uint64_t, std::vector<size_t>> cache_;
};

std::string pos_signature(const std::map<std::string, int>& counts);
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);
double cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b);

std::vector<size_t> retrieve_candidates(const EventPool& pool, size_t event_id, Scheme scheme,
                                        size_t n);

struct SamplerConfig {
  size_t m = 5;  // negatives per kind
  size_t n = 3;  // cap on each retrieval list
  std::array<double, 3> scheme_probs{0.2, 0.6, 0.2};  // LB, PB, ID
  uint64_t seed = 7;
  uint64_t epoch = 0;
};

struct EventNegative {
  Scheme scheme;
  size_t event_id;
  std::vector<std::string> tokens;
  Span span;  // position of the replacement event in tokens
};

struct RelationNegative {
  std::string surface;
  std::string category;
  std::vector<std::string> tokens;
  Span relation;  // replacement connective position
  Span event;     // original event, re-offset
};

struct NegativeSet {
  std::string example_id;
  std::vector<EventNegative> event_negs;
  std::vector<RelationNegative> rel_negs;
};

// Scheme drawn from `probs`, candidate drawn uniformly from its list; empty
// lists fall back PB -> LB -> ID -> uniform over the pool.
std::vector<EventNegative> sample_event_negatives(const EventPool& pool,
                                                  const TrainingExample& ex,
                                                  const SamplerConfig& config, Rng& rng);

std::vector<RelationNegative> sample_relation_negatives(const ConnectiveLexicon& lex,
                                                        const TrainingExample& ex, size_t m,
                                                        Rng& rng);

// Per-example streams seeded from (seed, epoch, example id).
std::vector<NegativeSet> build_negative_sets(const std::vector<TrainingExample>& dataset,
                                             const EventPool& pool,
                                             const ConnectiveLexicon& lex,
                                             const SamplerConfig& config);

}  // namespace eventbert

#endif  // EVENTBERT_NEGATIVES_H_
