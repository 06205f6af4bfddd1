#include "eventbert/vocab.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "eventbert/errors.h"

namespace eventbert {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

Vocab::Vocab() {
  for (const char* w : {"[UNK]", "[CLS]", "[SEP]", "[MASK]"}) add(w);
}

void Vocab::add(std::string word) {
  if (index_.contains(word)) return;
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(std::move(word));
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus, size_t min_freq,
                   const std::vector<std::string>& always) {
  std::map<std::string, size_t> counts;
  for (const auto& seq : corpus)
    for (const auto& w : seq) counts[lowercase(w)]++;
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [w, n] : ranked)
    if (n >= min_freq) v.add(w);
  std::vector<std::string> extra;
  for (const auto& w : always) extra.push_back(lowercase(w));
  std::sort(extra.begin(), extra.end());
  for (auto& w : extra) v.add(std::move(w));
  return v;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path);
  Vocab v;
  v.words_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (v.index_.contains(line)) throw DataError("duplicate vocabulary entry '" + line + "'");
    v.add(line);
  }
  if (v.size() < kFirstWord || v.words_[kUnk] != "[UNK]" || v.words_[kCls] != "[CLS]" ||
      v.words_[kSep] != "[SEP]" || v.words_[kMask] != "[MASK]")
    throw DataError("vocabulary " + path + " lacks the reserved tokens");
  return v;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  for (const auto& w : words_) out << w << '\n';
  if (!out) throw DataError("cannot write vocabulary " + path);
}

int Vocab::id(std::string_view word) const {
  auto it = index_.find(lowercase(word));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view word) const { return index_.contains(lowercase(word)); }

std::vector<int> Vocab::encode(const std::vector<std::string>& words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

std::vector<int> Vocab::wrap(const std::vector<std::string>& words) const {
  std::vector<int> ids;
  ids.reserve(words.size() + 2);
  ids.push_back(kCls);
  for (const auto& w : words) ids.push_back(id(w));
  ids.push_back(kSep);
  return ids;
}

}  // namespace eventbert
