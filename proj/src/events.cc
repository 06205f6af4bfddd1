#include "eventbert/events.h"

#include <algorithm>
#include <cstdio>

#include "eventbert/errors.h"

namespace eventbert {

size_t event_root(const Sentence& sentence, size_t trigger) {
  const Token& t = sentence.tokens[trigger];
  if (t.upos == "AUX" && t.head != 0 &&
      (t.deprel.starts_with("cop") || t.deprel.starts_with("aux")))
    return static_cast<size_t>(t.head - 1);
  return trigger;
}

ExtractResult extract_event(const Sentence& sentence, size_t trigger, Span connective,
                            const ExtractOptions& options) {
  const size_t n = sentence.size();
  if (trigger >= n || !is_verb_tag(sentence.tokens[trigger].upos))
    throw ContractError("event trigger must be a verb");
  std::vector<std::vector<size_t>> children(n);
  for (size_t i = 0; i < n; ++i)
    if (sentence.tokens[i].head != 0)
      children[static_cast<size_t>(sentence.tokens[i].head - 1)].push_back(i);

  std::vector<char> in_tree(n, 0);
  std::vector<size_t> stack{event_root(sentence, trigger)};
  while (!stack.empty()) {
    size_t u = stack.back();
    stack.pop_back();
    in_tree[u] = 1;
    for (size_t c : children[u]) stack.push_back(c);
  }
  for (size_t i = connective.begin; i < connective.end && i < n; ++i) in_tree[i] = 0;

  size_t begin = trigger, end = trigger + 1;
  while (begin > 0 && in_tree[begin - 1]) --begin;
  while (end < n && in_tree[end]) ++end;
  while (begin < trigger && sentence.tokens[begin].upos == "PUNCT") ++begin;
  while (end > trigger + 1 && sentence.tokens[end - 1].upos == "PUNCT") --end;
  Span span{begin, end};
  if (span.size() < options.min_event_tokens) return {ExtractStatus::kTooShort, span};
  if (span.size() > options.max_event_tokens) return {ExtractStatus::kTooLong, span};
  return {ExtractStatus::kOk, span};
}

size_t count_words(const Paragraph& p) {
  size_t n = 0;
  for (const auto& s : p.sentences)
    for (const auto& t : s.tokens)
      if (t.upos != "PUNCT") ++n;
  return n;
}

Span fit_window(size_t n, Span keep, size_t budget) {
  if (n <= budget) return {0, n};
  const size_t spare = budget - keep.size();
  size_t left = std::min(keep.begin, spare / 2);
  size_t right = std::min(n - keep.end, spare - left);
  left = std::min(keep.begin, spare - right);
  return {keep.begin - left, keep.end + right};
}

BuildResult build_training_set(const std::vector<FilteredParagraph>& filtered,
                               const ExtractOptions& options) {
  BuildResult result;
  const size_t budget = options.max_seq_len - 2;
  for (const auto& fp : filtered) {
    const Paragraph& p = fp.paragraph;
    ++result.stats.paragraphs;
    result.stats.words += count_words(p);
    std::vector<size_t> offsets;
    size_t total = 0;
    for (const auto& s : p.sentences) {
      offsets.push_back(total);
      total += s.size();
    }
    size_t ordinal = 0;
    for (const auto& pair : fp.meta) {
      ++result.stats.pairs;
      const RelationMention& r = pair.relation;
      const size_t off = offsets[r.sentence];
      const Sentence& sentence = p.sentences[r.sentence];
      ExtractResult ext = extract_event(sentence, pair.trigger - off,
                                        Span{r.begin - off, r.end - off}, options);
      if (ext.status == ExtractStatus::kTooShort) {
        ++result.stats.dropped_too_short;
        continue;
      }
      if (ext.status == ExtractStatus::kTooLong) {
        ++result.stats.dropped_too_long;
        continue;
      }
      const Span event{ext.span.begin + off, ext.span.end + off};
      if (event.size() > budget) {
        ++result.stats.dropped_no_fit;
        continue;
      }
      const Span window = fit_window(total, event, budget);
      if (r.begin < window.begin || r.end > window.end) {
        ++result.stats.dropped_no_fit;
        continue;
      }
      TrainingExample ex;
      ex.id = p.id + "-" + std::to_string(ordinal++);
      ex.paragraph_id = p.id;
      ex.doc_id = p.doc_id;
      ex.doc_position = p.doc_position;
      ex.sentence = r.sentence;
      ex.window_offset = window.begin;
      size_t flat = 0;
      for (const auto& s : p.sentences)
        for (const auto& t : s.tokens) {
          if (window.contains(flat)) {
            ex.tokens.push_back(t.surface);
            ex.upos.push_back(t.upos);
          }
          ++flat;
        }
      ex.event = {{event.begin - window.begin, event.end - window.begin},
                  pair.trigger - window.begin};
      ex.relation = {{r.begin - window.begin, r.end - window.begin}, r.surface, r.category};
      check_example(ex);
      result.examples.push_back(std::move(ex));
    }
  }
  result.stats.examples = result.examples.size();
  return result;
}

void check_example(const TrainingExample& ex) {
  const size_t n = ex.tokens.size();
  const Span e = ex.event.span;
  const Span r = ex.relation.span;
  if (ex.upos.size() != n) throw ContractError(ex.id + ": upos/tokens length mismatch");
  if (e.begin >= e.end || e.end > n) throw ContractError(ex.id + ": bad event span");
  if (!e.contains(ex.event.trigger)) throw ContractError(ex.id + ": trigger outside event");
  if (r.begin >= r.end || r.end > n) throw ContractError(ex.id + ": relation outside x");
  if (e.overlaps(r)) throw ContractError(ex.id + ": relation inside event");
  if (ex.fw().size() + e.size() + ex.bw().size() != n)
    throw ContractError(ex.id + ": fw/e/bw do not partition x");
}

std::string humanize_count(size_t n) {
  static const struct {
    double scale;
    const char* suffix;
  } units[] = {{1e9, "B"}, {1e6, "M"}, {1e3, "K"}};
  for (const auto& u : units) {
    if (static_cast<double>(n) >= u.scale) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1f", static_cast<double>(n) / u.scale);
      std::string s = buf;
      if (s.size() > 2 && s.ends_with(".0")) s.resize(s.size() - 2);
      return s + u.suffix;
    }
  }
  return std::to_string(n);
}

std::string corpus_report(size_t words_kept, size_t words_total, size_t paragraphs_kept) {
  return humanize_count(words_kept) + " (out of " + humanize_count(words_total) +
         ") words in " + humanize_count(paragraphs_kept) + " paragraphs";
}

}  // namespace eventbert
