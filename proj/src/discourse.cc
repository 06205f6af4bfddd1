#include "eventbert/discourse.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "eventbert/errors.h"

namespace eventbert {
namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace

std::string normalize_surface(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

void ConnectiveLexicon::add(std::string_view surface, std::string_view category) {
  std::string norm = normalize_surface(surface);
  std::string cat(category);
  while (!cat.empty() && (cat.back() == ' ' || cat.back() == '\r')) cat.pop_back();
  while (!cat.empty() && cat.front() == ' ') cat.erase(cat.begin());
  if (norm.empty()) throw LexiconError("empty connective surface");
  if (cat.empty()) throw LexiconError("connective '" + norm + "' has no category");
  auto words = split_words(norm);
  if (words.size() > kMaxWords)
    throw LexiconError("connective '" + norm + "' exceeds " + std::to_string(kMaxWords) +
                       " words");
  auto it = entries_.find(norm);
  if (it != entries_.end()) {
    if (it->second.category != cat)
      throw LexiconError("connective '" + norm + "' listed as both " +
                         it->second.category + " and " + cat);
    return;
  }
  auto [pos, _] = entries_.emplace(norm, Entry{norm, std::move(words), std::move(cat)});
  auto& bucket = by_first_word_[pos->second.words.front()];
  bucket.push_back(&pos->second);
  std::stable_sort(bucket.begin(), bucket.end(), [](const Entry* a, const Entry* b) {
    if (a->words.size() != b->words.size()) return a->words.size() > b->words.size();
    return a->surface < b->surface;
  });
}

ConnectiveLexicon ConnectiveLexicon::load(std::istream& in) {
  ConnectiveLexicon lex;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    size_t first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || view[first] == '#') continue;
    size_t tab = view.find('\t');
    if (tab == std::string_view::npos)
      throw LexiconError("lexicon line " + std::to_string(line_no) +
                         ": expected surface<TAB>category");
    try {
      lex.add(view.substr(0, tab), view.substr(tab + 1));
    } catch (const LexiconError& e) {
      throw LexiconError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (lex.empty()) throw LexiconError("lexicon has no entries");
  return lex;
}

ConnectiveLexicon ConnectiveLexicon::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open lexicon " + path);
  return load(in);
}

const ConnectiveLexicon& ConnectiveLexicon::builtin() {
  static const ConnectiveLexicon lex = [] {
    std::istringstream in(builtin_lexicon_tsv());
    return load(in);
  }();
  return lex;
}

const ConnectiveLexicon::Entry* ConnectiveLexicon::find(std::string_view surface) const {
  auto it = entries_.find(normalize_surface(surface));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> ConnectiveLexicon::categories() const {
  std::set<std::string> cats;
  for (const auto& [_, e] : entries_) cats.insert(e.category);
  return {cats.begin(), cats.end()};
}

std::optional<std::pair<size_t, const ConnectiveLexicon::Entry*>>
ConnectiveLexicon::longest_match(const std::vector<std::string>& words, size_t begin,
                                 size_t limit) const {
  auto it = by_first_word_.find(words[begin]);
  if (it == by_first_word_.end()) return std::nullopt;
  for (const Entry* e : it->second) {
    const size_t n = e->words.size();
    if (begin + n > limit) continue;
    if (std::equal(e->words.begin(), e->words.end(), words.begin() + begin))
      return std::make_pair(n, e);
  }
  return std::nullopt;
}

std::vector<RelationMention> locate_connectives(const Paragraph& p,
                                                const ConnectiveLexicon& lex) {
  std::vector<std::string> words;
  std::vector<size_t> sentence_of;
  std::vector<size_t> sentence_end;
  for (size_t s = 0; s < p.sentences.size(); ++s) {
    for (const auto& t : p.sentences[s].tokens) {
      words.push_back(lower(t.surface));
      sentence_of.push_back(s);
    }
    sentence_end.push_back(words.size());
  }
  std::vector<RelationMention> mentions;
  size_t i = 0;
  while (i < words.size()) {
    const size_t s = sentence_of[i];
    auto match = lex.longest_match(words, i, sentence_end[s]);
    if (!match) {
      ++i;
      continue;
    }
    auto [n, entry] = *match;
    mentions.push_back({p.id, i, i + n, s, entry->surface, entry->category});
    i += n;
  }
  return mentions;
}

std::vector<size_t> verb_adjacent_triggers(const RelationMention& r, const Paragraph& p,
                                           size_t depth) {
  size_t offset = 0;
  for (size_t s = 0; s < r.sentence; ++s) offset += p.sentences[s].size();
  const auto& tokens = p.sentences[r.sentence].tokens;
  const size_t n = tokens.size();
  std::vector<std::vector<size_t>> adj(n);
  for (size_t i = 0; i < n; ++i) {
    if (tokens[i].head == 0) continue;
    const size_t h = static_cast<size_t>(tokens[i].head - 1);
    adj[i].push_back(h);
    adj[h].push_back(i);
  }
  std::vector<size_t> dist(n, SIZE_MAX);
  std::vector<size_t> frontier;
  for (size_t f = r.begin; f < r.end; ++f) {
    dist[f - offset] = 0;
    frontier.push_back(f - offset);
  }
  for (size_t d = 1; d <= depth && !frontier.empty(); ++d) {
    std::vector<size_t> next;
    for (size_t u : frontier)
      for (size_t v : adj[u])
        if (dist[v] == SIZE_MAX) {
          dist[v] = d;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  std::vector<size_t> triggers;
  for (size_t i = 0; i < n; ++i)
    if (dist[i] != SIZE_MAX && dist[i] > 0 && is_verb_tag(tokens[i].upos))
      triggers.push_back(offset + i);
  return triggers;
}

std::optional<FilteredParagraph> filter_paragraph(const Paragraph& p,
                                                  const ConnectiveLexicon& lex,
                                                  const DiscourseOptions& options) {
  FilteredParagraph out;
  for (auto& r : locate_connectives(p, lex)) {
    for (size_t v : verb_adjacent_triggers(r, p, options.adjacency_depth))
      out.meta.push_back({r, v});
  }
  if (out.meta.empty()) return std::nullopt;
  out.paragraph = p;
  return out;
}

}  // namespace eventbert
