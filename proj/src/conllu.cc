#include "eventbert/conllu.h"

#include <charconv>
#include <sstream>

#include "eventbert/errors.h"

namespace eventbert {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool has_space_after_no(std::string_view misc) {
  size_t start = 0;
  while (start <= misc.size()) {
    size_t bar = misc.find('|', start);
    std::string_view item = misc.substr(
        start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    if (item == "SpaceAfter=No") return true;
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return false;
}

struct PendingSentence {
  Sentence sentence;
  bool starts_par;
};

class Reader {
 public:
  explicit Reader(const ConlluOptions& options) : options_(options) {}

  std::vector<Paragraph> run(std::istream& in) {
    std::string raw;
    size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty()) {
        end_sentence();
        continue;
      }
      if (line.front() == '#') {
        comment(line);
        continue;
      }
      row(line, line_no);
    }
    end_sentence();
    flush_document();
    return std::move(out_);
  }

 private:
  void comment(std::string_view line) {
    std::string_view body = trim(line.substr(1));
    if (body.starts_with("newdoc")) {
      next_doc_ = true;
      next_par_ = true;
      std::string_view rest = trim(body.substr(6));
      if (rest.starts_with("id")) {
        rest = trim(rest.substr(2));
        if (rest.starts_with("=")) next_doc_id_ = std::string(trim(rest.substr(1)));
      }
    } else if (body.starts_with("newpar")) {
      next_par_ = true;
      explicit_par_ = true;
    }
  }

  void row(std::string_view line, size_t line_no) {
    auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    // Multiword-token ranges and empty nodes are skipped in favor of the
    // component rows.
    if (fields[0].find('-') != std::string_view::npos ||
        fields[0].find('.') != std::string_view::npos) {
      return;
    }
    Token t;
    if (!parse_int(fields[0], t.index)) throw ParseError(line_no, "bad token id");
    if (t.index != static_cast<int>(current_.tokens.size()) + 1)
      throw ParseError(line_no, "token ids must be consecutive from 1");
    if (!parse_int(fields[6], t.head)) throw ParseError(line_no, "bad head");
    t.surface = std::string(fields[1]);
    t.upos = std::string(fields[3]);
    t.deprel = std::string(fields[7]);
    t.space_after = !has_space_after_no(fields[9]);
    current_.tokens.push_back(std::move(t));
  }

  void end_sentence() {
    if (current_.tokens.empty()) return;
    ++sentence_ordinal_;
    validate_tree(current_, sentence_ordinal_);
    if (next_doc_) flush_document();
    PendingSentence ps{std::move(current_), next_par_};
    if (next_doc_) {
      doc_id_ = next_doc_id_.empty() ? "doc" + std::to_string(doc_count_)
                                     : next_doc_id_;
      ++doc_count_;
    } else if (doc_id_.empty()) {
      doc_id_ = "doc" + std::to_string(doc_count_);
      ++doc_count_;
    }
    if (explicit_par_) doc_has_markers_ = true;
    pending_.push_back(std::move(ps));
    current_ = Sentence{};
    next_doc_ = false;
    next_par_ = false;
    explicit_par_ = false;
    next_doc_id_.clear();
  }

  void flush_document() {
    if (pending_.empty()) return;
    int position = 0;
    Paragraph para;
    auto close = [&]() {
      if (para.sentences.empty()) return;
      para.doc_id = doc_id_;
      para.doc_position = position;
      para.id = doc_id_ + "." + std::to_string(position);
      rebuild_text(para);
      out_.push_back(std::move(para));
      para = Paragraph{};
      ++position;
    };
    for (size_t i = 0; i < pending_.size(); ++i) {
      bool boundary;
      if (doc_has_markers_) {
        boundary = pending_[i].starts_par;
      } else {
        boundary = para.sentences.size() >= options_.sentences_per_para;
      }
      if (boundary) close();
      para.sentences.push_back(std::move(pending_[i].sentence));
    }
    close();
    pending_.clear();
    doc_has_markers_ = false;
  }

  const ConlluOptions& options_;
  std::vector<Paragraph> out_;
  std::vector<PendingSentence> pending_;
  Sentence current_;
  size_t sentence_ordinal_ = 0;
  size_t doc_count_ = 0;
  std::string doc_id_;
  std::string next_doc_id_;
  bool next_doc_ = false;
  bool next_par_ = false;
  bool explicit_par_ = false;
  bool doc_has_markers_ = false;
};

}  // namespace

size_t Paragraph::token_count() const {
  size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::vector<TokenRef> flatten(const Paragraph& p) {
  std::vector<TokenRef> refs;
  refs.reserve(p.token_count());
  for (size_t s = 0; s < p.sentences.size(); ++s)
    for (size_t i = 0; i < p.sentences[s].size(); ++i) refs.push_back({s, i});
  return refs;
}

void validate_tree(const Sentence& sentence, size_t ordinal) {
  const int n = static_cast<int>(sentence.size());
  int roots = 0;
  for (const auto& t : sentence.tokens) {
    if (t.head < 0 || t.head > n)
      throw TreeError(ordinal, "head " + std::to_string(t.head) + " of token " +
                                   std::to_string(t.index) + " out of range");
    if (t.head == t.index)
      throw TreeError(ordinal, "token " + std::to_string(t.index) + " is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw TreeError(ordinal, "expected exactly one root, found " + std::to_string(roots));
  // Every token must reach the root within n steps.
  for (const auto& t : sentence.tokens) {
    int cur = t.index;
    int steps = 0;
    while (cur != 0) {
      cur = sentence.tokens[cur - 1].head;
      if (++steps > n)
        throw TreeError(ordinal, "cycle through token " + std::to_string(t.index));
    }
  }
}

void rebuild_text(Paragraph& p) {
  p.text.clear();
  for (size_t s = 0; s < p.sentences.size(); ++s) {
    if (s > 0) p.text += ' ';
    auto& tokens = p.sentences[s].tokens;
    for (size_t i = 0; i < tokens.size(); ++i) {
      Token& t = tokens[i];
      t.char_begin = p.text.size();
      p.text += t.surface;
      t.char_end = p.text.size();
      if (t.space_after && i + 1 < tokens.size()) p.text += ' ';
    }
  }
}

std::vector<Paragraph> parse_conllu(std::istream& in, const ConlluOptions& options) {
  Reader reader(options);
  return reader.run(in);
}

std::vector<Paragraph> parse_conllu_string(std::string_view text,
                                           const ConlluOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, options);
}

void write_conllu(std::ostream& out, const std::vector<Paragraph>& paragraphs) {
  const std::string* last_doc = nullptr;
  for (const auto& p : paragraphs) {
    if (last_doc == nullptr || *last_doc != p.doc_id)
      out << "# newdoc id = " << p.doc_id << "\n";
    last_doc = &p.doc_id;
    out << "# newpar\n";
    for (const auto& s : p.sentences) {
      for (const auto& t : s.tokens) {
        out << t.index << '\t' << t.surface << "\t_\t" << t.upos << "\t_\t_\t"
            << t.head << '\t' << t.deprel << "\t_\t"
            << (t.space_after ? "_" : "SpaceAfter=No") << "\n";
      }
      out << "\n";
    }
  }
}

std::string_view to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::kKeep: return "keep";
    case FilterReason::kAlphaRatio: return "alpha_ratio";
    case FilterReason::kTooShort: return "too_short";
    case FilterReason::kTooLong: return "too_long";
    case FilterReason::kNoVerb: return "no_verb";
  }
  return "unknown";
}

double alpha_ratio(std::string_view text) {
  size_t alpha = 0, total = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    ++total;
    if (c >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++alpha;
  }
  return total == 0 ? 0.0 : static_cast<double>(alpha) / static_cast<double>(total);
}

bool is_verb_tag(std::string_view upos) { return upos == "VERB" || upos == "AUX"; }

FilterDecision basic_filter(const Paragraph& p, const CleanlinessConfig& rules) {
  if (alpha_ratio(p.text) < rules.min_alpha_ratio) return {false, FilterReason::kAlphaRatio};
  const size_t n = p.token_count();
  if (n < rules.min_tokens) return {false, FilterReason::kTooShort};
  if (n > rules.max_tokens) return {false, FilterReason::kTooLong};
  for (const auto& s : p.sentences)
    for (const auto& t : s.tokens)
      if (t.upos == "VERB") return {true, FilterReason::kKeep};
  return {false, FilterReason::kNoVerb};
}

}  // namespace eventbert
