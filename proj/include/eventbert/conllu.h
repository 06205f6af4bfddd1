// CoNLL-U reader/writer and paragraph-level cleanliness filter.

#ifndef EVENTBERT_CONLLU_H_
#define EVENTBERT_CONLLU_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace eventbert {

struct Token {
  int index = 0;  // 1-based position within the sentence
  std::string surface;
  std::string upos;
  int head = 0;  // 0 for the root
  std::string deprel;
  size_t char_begin = 0;  // byte offsets into Paragraph::text
  size_t char_end = 0;
  bool space_after = true;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Paragraph {
  std::string id;  // "<doc>.<doc_position>"
  std::string doc_id;
  int doc_position = 0;
  std::vector<Sentence> sentences;
  std::string text;

  size_t token_count() const;
  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

// Flat (paragraph-order) view of a token: which sentence and which row.
struct TokenRef {
  size_t sentence;
  size_t position;  // 0-based within the sentence
};

// Maps flat paragraph token indices onto sentence-local positions.
std::vector<TokenRef> flatten(const Paragraph& p);

// Fallback grouping when a document carries no `# newpar` markers.
struct ConlluOptions {
  size_t sentences_per_para = 5;
};

// Reads a CoNLL-U stream. Throws ParseError for malformed rows and TreeError
// for heads that do not form a single rooted tree.
std::vector<Paragraph> parse_conllu(std::istream& in,
                                    const ConlluOptions& options = {});
std::vector<Paragraph> parse_conllu_string(std::string_view text,
                                           const ConlluOptions& options = {});

// Writes paragraphs with explicit `# newdoc` / `# newpar` markers so that
// parse_conllu(write_conllu(ps)) == ps.
void write_conllu(std::ostream& out, const std::vector<Paragraph>& paragraphs);

// Throws TreeError if the sentence heads are not a single rooted tree.
void validate_tree(const Sentence& sentence, size_t ordinal);

// Recomputes Paragraph::text and every Token char span from surfaces and
// SpaceAfter flags. Sentences are joined with one space.
void rebuild_text(Paragraph& p);

struct CleanlinessConfig {
  double min_alpha_ratio = 0.6;
  size_t min_tokens = 8;
  size_t max_tokens = 250;
};

enum class FilterReason { kKeep, kAlphaRatio, kTooShort, kTooLong, kNoVerb };

std::string_view to_string(FilterReason reason);

struct FilterDecision {
  bool keep;
  FilterReason reason;
};

// Share of alphabetic code points among non-whitespace code points.
// Non-ASCII code points count as alphabetic.
double alpha_ratio(std::string_view text);

FilterDecision basic_filter(const Paragraph& p, const CleanlinessConfig& rules);

// VERB, plus AUX so that copular clauses can anchor events.
bool is_verb_tag(std::string_view upos);

}  // namespace eventbert

#endif  // EVENTBERT_CONLLU_H_
