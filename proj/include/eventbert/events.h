// Verb-rooted event extraction and training-set construction.

#ifndef EVENTBERT_EVENTS_H_
#define EVENTBERT_EVENTS_H_

#include <optional>
#include <string>
#include <vector>

#include "eventbert/conllu.h"
#include "eventbert/discourse.h"

namespace eventbert {

struct ExtractOptions {
  size_t min_event_tokens = 2;
  size_t max_event_tokens = 25;
  size_t max_seq_len = 128;  // including CLS and SEP
};

// Half-open token range.
struct Span {
  size_t begin = 0;
  size_t end = 0;

  size_t size() const { return end - begin; }
  bool contains(size_t i) const { return i >= begin && i < end; }
  bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class ExtractStatus { kOk, kTooShort, kTooLong };

struct ExtractResult {
  ExtractStatus status;
  Span span;  // sentence-local 0-based positions; valid when status == kOk
};

// Root of the event subtree for a trigger: the trigger itself, or the
// predicate it serves when the trigger is an auxiliary or copula.
size_t event_root(const Sentence& sentence, size_t trigger);

// Subtree of event_root(trigger) minus the connective tokens, mapped to the
// maximal contiguous run that contains the trigger, with punctuation trimmed
// from both edges. `trigger` and
// `connective` are sentence-local 0-based. Throws ContractError when the
// trigger is not a verb.
ExtractResult extract_event(const Sentence& sentence, size_t trigger, Span connective,
                            const ExtractOptions& options = {});

// Window of at most `budget` of n tokens around `keep`, split evenly on both
// sides. `keep` must fit in the budget.
Span fit_window(size_t n, Span keep, size_t budget);

struct EventSpan {
  Span span;  // positions in TrainingExample::tokens
  size_t trigger = 0;
  friend bool operator==(const EventSpan&, const EventSpan&) = default;
};

struct RelationSpan {
  Span span;  // positions in TrainingExample::tokens
  std::string surface;
  std::string category;
  friend bool operator==(const RelationSpan&, const RelationSpan&) = default;
};

// A paragraph window x = [fw, e, bw] with the connective r outside e.
struct TrainingExample {
  std::string id;
  std::string paragraph_id;
  std::string doc_id;
  int doc_position = 0;
  size_t sentence = 0;
  size_t window_offset = 0;  // flat paragraph index of tokens[0]
  std::vector<std::string> tokens;
  std::vector<std::string> upos;
  EventSpan event;
  RelationSpan relation;

  Span fw() const { return {0, event.span.begin}; }
  Span bw() const { return {event.span.end, tokens.size()}; }
  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

struct BuildStats {
  size_t paragraphs = 0;
  size_t pairs = 0;
  size_t examples = 0;
  size_t dropped_too_short = 0;
  size_t dropped_too_long = 0;
  size_t dropped_no_fit = 0;
  size_t words = 0;  // non-punctuation tokens across input paragraphs

  size_t dropped() const { return dropped_too_short + dropped_too_long + dropped_no_fit; }
};

struct BuildResult {
  std::vector<TrainingExample> examples;
  BuildStats stats;
};

BuildResult build_training_set(const std::vector<FilteredParagraph>& filtered,
                               const ExtractOptions& options = {});

// Throws ContractError unless fw/e/bw partition tokens and r lies outside e.
void check_example(const TrainingExample& ex);

size_t count_words(const Paragraph& p);

// "199.9M" style rendering used by corpus reports.
std::string humanize_count(size_t n);

// "<kept> (out of <total>) words in <n> paragraphs".
std::string corpus_report(size_t words_kept, size_t words_total, size_t paragraphs_kept);

}  // namespace eventbert

#endif  // EVENTBERT_EVENTS_H_
