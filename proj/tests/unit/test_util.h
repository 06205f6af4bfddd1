// Small builders shared by the unit tests.

#ifndef EVENTBERT_TESTS_TEST_UTIL_H_
#define EVENTBERT_TESTS_TEST_UTIL_H_

#include <sstream>
#include <string>
#include <vector>

#include "eventbert/conllu.h"
#include "eventbert/events.h"

namespace eventbert::testing {

inline std::string data_path(const std::string& name) {
  return std::string(EVENTBERT_TEST_DATA_DIR) + "/" + name;
}

// "He/PRON/2/nsubj slept/VERB/0/root ./PUNCT/2/punct"
inline Sentence sentence(const std::string& spec) {
  Sentence s;
  std::istringstream in(spec);
  std::string item;
  int index = 0;
  while (in >> item) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      const size_t slash = item.find('/', start + (k == 0 ? 1 : 0));
      parts.push_back(item.substr(start, slash - start));
      start = slash + 1;
    }
    parts.push_back(item.substr(start));
    Token t;
    t.index = ++index;
    t.surface = parts[0];
    t.upos = parts[1];
    t.head = std::stoi(parts[2]);
    t.deprel = parts[3];
    s.tokens.push_back(std::move(t));
  }
  for (size_t i = 0; i + 1 < s.tokens.size(); ++i)
    if (s.tokens[i + 1].upos == "PUNCT") s.tokens[i].space_after = false;
  return s;
}

inline Paragraph paragraph(const std::vector<std::string>& sentences,
                           const std::string& doc = "doc", int position = 0) {
  Paragraph p;
  p.doc_id = doc;
  p.doc_position = position;
  p.id = doc + "." + std::to_string(position);
  for (const auto& s : sentences) p.sentences.push_back(sentence(s));
  rebuild_text(p);
  return p;
}

// Example whose tokens come from "w/UPOS" items; spans index those tokens.
inline TrainingExample example(const std::string& id, const std::string& doc, int position,
                               const std::string& spec, Span event, size_t trigger,
                               Span relation, const std::string& surface,
                               const std::string& category) {
  TrainingExample ex;
  ex.id = id;
  ex.paragraph_id = doc + "." + std::to_string(position);
  ex.doc_id = doc;
  ex.doc_position = position;
  std::istringstream in(spec);
  std::string item;
  while (in >> item) {
    const size_t slash = item.rfind('/');
    ex.tokens.push_back(item.substr(0, slash));
    ex.upos.push_back(item.substr(slash + 1));
  }
  ex.event = {event, trigger};
  ex.relation = {relation, surface, category};
  return ex;
}

}  // namespace eventbert::testing

#endif  // EVENTBERT_TESTS_TEST_UTIL_H_
