#include "eventbert/pipeline.h"

namespace eventbert {

MineResult mine(const std::vector<Paragraph>& paragraphs, const ConnectiveLexicon& lex,
                const CleanlinessConfig& rules, const DiscourseOptions& options) {
  MineResult result;
  for (const auto& p : paragraphs) {
    ++result.stats.paragraphs;
    const size_t words = count_words(p);
    result.stats.words_total += words;
    const FilterDecision d = basic_filter(p, rules);
    if (!d.keep) {
      ++result.stats.basic[d.reason];
      continue;
    }
    auto fp = filter_paragraph(p, lex, options);
    if (!fp) {
      ++result.stats.no_relation;
      continue;
    }
    ++result.stats.kept;
    result.stats.words_kept += words;
    result.kept.push_back(std::move(*fp));
  }
  return result;
}

std::vector<NegativeSet> sample(const std::vector<TrainingExample>& dataset,
                                const ConnectiveLexicon& lex, const SamplerConfig& config) {
  const EventPool pool = EventPool::build(dataset);
  return build_negative_sets(dataset, pool, lex, config);
}

Vocab build_vocab(const std::vector<TrainingExample>& dataset, const ConnectiveLexicon& lex,
                  size_t min_freq) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(dataset.size());
  for (const auto& ex : dataset) corpus.push_back(ex.tokens);
  std::vector<std::string> always;
  for (const auto& [surface, entry] : lex.entries())
    for (const auto& w : entry.words) always.push_back(w);
  return Vocab::build(corpus, min_freq, always);
}

std::vector<TrainingExample> select(const std::vector<TrainingExample>& dataset,
                                    const std::vector<size_t>& indices) {
  std::vector<TrainingExample> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(dataset.at(i));
  return out;
}

}  // namespace eventbert
