// Connective lexicon, connective location and discourse-verb association
// filtering of paragraphs.

#ifndef EVENTBERT_DISCOURSE_H_
#define EVENTBERT_DISCOURSE_H_

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eventbert/conllu.h"

namespace eventbert {

class ConnectiveLexicon {
 public:
  struct Entry {
    std::string surface;
    std::vector<std::string> words;
    std::string category;
  };

  static constexpr size_t kMaxWords = 4;

  // TSV `surface<TAB>category`, `#` comments. Throws LexiconError on
  // conflicting duplicates, malformed rows or an empty source.
  static ConnectiveLexicon load(std::istream& in);
  static ConnectiveLexicon load_file(const std::string& path);
  static const ConnectiveLexicon& builtin();

  // Adds an entry after normalization. Re-adding the same pair is a no-op.
  void add(std::string_view surface, std::string_view category);

  const Entry* find(std::string_view surface) const;
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Sorted by surface.
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::vector<std::string> categories() const;

  // Longest entry matching words[begin, limit). Returns its word count.
  std::optional<std::pair<size_t, const Entry*>> longest_match(
      const std::vector<std::string>& words, size_t begin, size_t limit) const;

 private:
  std::map<std::string, Entry> entries_;
  // First word -> entries, longest first.
  std::unordered_map<std::string, std::vector<const Entry*>> by_first_word_;
};

// Lowercases ASCII and collapses runs of whitespace to one space.
std::string normalize_surface(std::string_view s);

const char* builtin_lexicon_tsv();

struct RelationMention {
  std::string paragraph_id;
  size_t begin = 0;  // flat paragraph token range [begin, end)
  size_t end = 0;
  size_t sentence = 0;
  std::string surface;
  std::string category;

  friend bool operator==(const RelationMention&, const RelationMention&) = default;
};

struct MetaPair {
  RelationMention relation;
  size_t trigger = 0;  // flat paragraph token index of the verb

  friend bool operator==(const MetaPair&, const MetaPair&) = default;
};

struct FilteredParagraph {
  Paragraph paragraph;
  std::vector<MetaPair> meta;  // ordered by relation position, then trigger
};

struct DiscourseOptions {
  size_t adjacency_depth = 1;
};

// Greedy longest-match-first, left to right, never across sentences.
std::vector<RelationMention> locate_connectives(const Paragraph& p,
                                                const ConnectiveLexicon& lex);

// Verb tokens within `depth` undirected dependency edges of any token of r.
// Ascending flat indices; r's own tokens are never returned.
std::vector<size_t> verb_adjacent_triggers(const RelationMention& r, const Paragraph& p,
                                           size_t depth = 1);

std::optional<FilteredParagraph> filter_paragraph(const Paragraph& p,
                                                  const ConnectiveLexicon& lex,
                                                  const DiscourseOptions& options = {});

}  // namespace eventbert

#endif  // EVENTBERT_DISCOURSE_H_
