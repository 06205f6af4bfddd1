// Templated storyline corpus with hand-built dependency trees, plus
// multi-choice instances drawn from the same scenarios.

#ifndef EVENTBERT_SYNTHETIC_H_
#define EVENTBERT_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "eventbert/conllu.h"
#include "eventbert/eval.h"

namespace eventbert {

struct Scenario {
  std::string state;         // "drowsy"
  std::string consistent;    // "took/VERB a/DET long/ADJ nap/NOUN"
  std::string contradictory; // "partied/VERB all/DET night/NOUN"
  std::string outcome;       // "felt/VERB rested/ADJ"
};

const std::vector<Scenario>& builtin_scenarios();

// Tagged phrase "w/UPOS w/UPOS ..." headed by its first (verb) token.
// Modifiers attach to the next noun, adverbs to the next adverb or
// adjective, bare adjectives become complements. Returned tokens carry
// sentence-local heads relative to the phrase (0 = phrase head).
std::vector<Token> build_verb_phrase(const std::string& tagged);

struct SyntheticConfig {
  uint64_t seed = 11;
  size_t documents = 20;
  size_t paragraphs_per_document = 10;
  double noise_rate = 0.15;  // share of paragraphs with no usable relation
};

// Paragraph ids are "<doc>.<k>"; documents are "synth-<seed>-<n>".
std::vector<Paragraph> synthetic_corpus(const SyntheticConfig& config);

// Two-candidate cloze instances over the same scenarios: "so" contexts
// (consistent wins), "but" contexts (contradictory wins) and "after"
// contexts (matching outcome wins). Gold position is randomized.
std::vector<MultiChoiceInstance> synthetic_instances(size_t count, uint64_t seed);

}  // namespace eventbert

#endif  // EVENTBERT_SYNTHETIC_H_
