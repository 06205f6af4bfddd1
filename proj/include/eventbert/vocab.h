#ifndef EVENTBERT_VOCAB_H_
#define EVENTBERT_VOCAB_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eventbert {

// Lowercased whitespace-token vocabulary with four reserved ids.
class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kCls = 1;
  static constexpr int kSep = 2;
  static constexpr int kMask = 3;
  static constexpr int kFirstWord = 4;

  Vocab();

  // Words seen at least `min_freq` times, most frequent first (ties by
  // byte order); `always` words are included regardless of frequency.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, size_t min_freq = 2,
                     const std::vector<std::string>& always = {});

  // One token per line, line number = id. Throws DataError on bad files.
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  size_t size() const { return words_.size(); }
  int id(std::string_view word) const;
  const std::string& word(int id) const { return words_[static_cast<size_t>(id)]; }
  bool contains(std::string_view word) const;

  std::vector<int> encode(const std::vector<std::string>& words) const;
  // [CLS] words [SEP]
  std::vector<int> wrap(const std::vector<std::string>& words) const;

  const std::vector<std::string>& words() const { return words_; }

 private:
  void add(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

std::string lowercase(std::string_view s);

}  // namespace eventbert

#endif  // EVENTBERT_VOCAB_H_
