// Stage-level entry points shared by the command-line tool and the tests.

#ifndef EVENTBERT_PIPELINE_H_
#define EVENTBERT_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "eventbert/conllu.h"
#include "eventbert/discourse.h"
#include "eventbert/events.h"
#include "eventbert/negatives.h"
#include "eventbert/vocab.h"

namespace eventbert {

struct MineStats {
  size_t paragraphs = 0;
  size_t kept = 0;
  size_t no_relation = 0;
  std::map<FilterReason, size_t> basic;  // rejections by the cleanliness rules
  size_t words_total = 0;
  size_t words_kept = 0;
};

struct MineResult {
  std::vector<FilteredParagraph> kept;
  MineStats stats;
};

// Cleanliness rules, then connective/verb adjacency.
MineResult mine(const std::vector<Paragraph>& paragraphs, const ConnectiveLexicon& lex,
                const CleanlinessConfig& rules = {}, const DiscourseOptions& options = {});

// Event pool over the dataset, then one negative set per example.
std::vector<NegativeSet> sample(const std::vector<TrainingExample>& dataset,
                                const ConnectiveLexicon& lex, const SamplerConfig& config);

// Vocabulary over the training tokens; connective words are always kept so
// relation negatives never collapse to [UNK].
Vocab build_vocab(const std::vector<TrainingExample>& dataset, const ConnectiveLexicon& lex,
                  size_t min_freq = 2);

// Examples at the given positions, in order.
std::vector<TrainingExample> select(const std::vector<TrainingExample>& dataset,
                                    const std::vector<size_t>& indices);

}  // namespace eventbert

#endif  // EVENTBERT_PIPELINE_H_
