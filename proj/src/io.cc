#include "eventbert/io.h"

#include <fstream>

#include "eventbert/errors.h"

namespace eventbert {
namespace {

Json span_json(const Span& s) { return Json::array({s.begin, s.end}); }

Span span_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw DataError("span must be a [begin, end] pair");
  Span s{j.at(0).get<size_t>(), j.at(1).get<size_t>()};
  if (s.begin > s.end) throw DataError("span begins after it ends");
  return s;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace

Json to_json(const FilteredParagraph& fp) {
  const Paragraph& p = fp.paragraph;
  Json sentences = Json::array();
  for (const auto& s : p.sentences) {
    Json tokens = Json::array();
    for (const auto& t : s.tokens) {
      tokens.push_back(Json{{"id", t.index},
                            {"form", t.surface},
                            {"upos", t.upos},
                            {"head", t.head},
                            {"deprel", t.deprel},
                            {"span", Json::array({t.char_begin, t.char_end})},
                            {"space_after", t.space_after}});
    }
    sentences.push_back(std::move(tokens));
  }
  Json meta = Json::array();
  for (const auto& m : fp.meta) {
    meta.push_back(Json{{"relation",
                         {{"span", Json::array({m.relation.begin, m.relation.end})},
                          {"surface", m.relation.surface},
                          {"category", m.relation.category},
                          {"sentence", m.relation.sentence}}},
                        {"trigger", m.trigger}});
  }
  return Json{{"id", p.id},
              {"doc", p.doc_id},
              {"doc_position", p.doc_position},
              {"text", p.text},
              {"sentences", std::move(sentences)},
              {"meta", std::move(meta)}};
}

FilteredParagraph filtered_from_json(const Json& j) {
  FilteredParagraph fp;
  Paragraph& p = fp.paragraph;
  p.id = j.at("id").get<std::string>();
  p.doc_id = j.at("doc").get<std::string>();
  p.doc_position = j.at("doc_position").get<int>();
  for (const auto& js : j.at("sentences")) {
    Sentence s;
    for (const auto& jt : js) {
      Token t;
      t.index = jt.at("id").get<int>();
      t.surface = jt.at("form").get<std::string>();
      t.upos = jt.at("upos").get<std::string>();
      t.head = jt.at("head").get<int>();
      t.deprel = jt.at("deprel").get<std::string>();
      t.space_after = jt.value("space_after", true);
      s.tokens.push_back(std::move(t));
    }
    validate_tree(s, p.sentences.size() + 1);
    p.sentences.push_back(std::move(s));
  }
  rebuild_text(p);
  if (p.text != j.at("text").get<std::string>())
    throw DataError("paragraph " + p.id + ": text disagrees with its tokens");
  const size_t n = p.token_count();
  for (const auto& jm : j.at("meta")) {
    MetaPair m;
    const Json& r = jm.at("relation");
    Span s = span_from(r.at("span"));
    m.relation = {p.id, s.begin, s.end, r.at("sentence").get<size_t>(),
                  r.at("surface").get<std::string>(), r.at("category").get<std::string>()};
    m.trigger = jm.at("trigger").get<size_t>();
    if (s.end > n || m.trigger >= n || m.relation.sentence >= p.sentences.size())
      throw DataError("paragraph " + p.id + ": meta index out of range");
    fp.meta.push_back(std::move(m));
  }
  return fp;
}

Json to_json(const TrainingExample& ex) {
  return Json{{"id", ex.id},
              {"paragraph", ex.paragraph_id},
              {"doc", ex.doc_id},
              {"doc_position", ex.doc_position},
              {"sentence", ex.sentence},
              {"offset", ex.window_offset},
              {"tokens", ex.tokens},
              {"upos", ex.upos},
              {"event", {{"span", span_json(ex.event.span)}, {"trigger", ex.event.trigger}}},
              {"relation",
               {{"span", span_json(ex.relation.span)},
                {"surface", ex.relation.surface},
                {"category", ex.relation.category}}},
              {"fw", span_json(ex.fw())},
              {"bw", span_json(ex.bw())}};
}

TrainingExample example_from_json(const Json& j) {
  TrainingExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.paragraph_id = j.at("paragraph").get<std::string>();
  ex.doc_id = j.at("doc").get<std::string>();
  ex.doc_position = j.at("doc_position").get<int>();
  ex.sentence = j.at("sentence").get<size_t>();
  ex.window_offset = j.at("offset").get<size_t>();
  ex.tokens = j.at("tokens").get<std::vector<std::string>>();
  ex.upos = j.at("upos").get<std::vector<std::string>>();
  ex.event.span = span_from(j.at("event").at("span"));
  ex.event.trigger = j.at("event").at("trigger").get<size_t>();
  ex.relation.span = span_from(j.at("relation").at("span"));
  ex.relation.surface = j.at("relation").at("surface").get<std::string>();
  ex.relation.category = j.at("relation").at("category").get<std::string>();
  try {
    check_example(ex);
  } catch (const ContractError& e) {
    throw DataError(e.what());
  }
  if (span_from(j.at("fw")) != ex.fw() || span_from(j.at("bw")) != ex.bw())
    throw DataError(ex.id + ": fw/bw disagree with the event span");
  return ex;
}

Json to_json(const NegativeSet& ns) {
  Json ev = Json::array();
  for (const auto& n : ns.event_negs)
    ev.push_back(Json{{"scheme", std::string(scheme_name(n.scheme))},
                      {"event_id", n.event_id},
                      {"span", span_json(n.span)},
                      {"tokens", n.tokens}});
  Json rel = Json::array();
  for (const auto& n : ns.rel_negs)
    rel.push_back(Json{{"surface", n.surface},
                       {"category", n.category},
                       {"span", span_json(n.relation)},
                       {"event", span_json(n.event)},
                       {"tokens", n.tokens}});
  return Json{{"example_id", ns.example_id}, {"event_negs", std::move(ev)},
              {"rel_negs", std::move(rel)}};
}

NegativeSet negative_set_from_json(const Json& j) {
  NegativeSet ns;
  ns.example_id = j.at("example_id").get<std::string>();
  for (const auto& e : j.at("event_negs")) {
    EventNegative n;
    n.scheme = parse_scheme(e.at("scheme").get<std::string>());
    n.event_id = e.at("event_id").get<size_t>();
    n.span = span_from(e.at("span"));
    n.tokens = e.at("tokens").get<std::vector<std::string>>();
    if (n.span.end > n.tokens.size()) throw DataError(ns.example_id + ": event span out of range");
    ns.event_negs.push_back(std::move(n));
  }
  for (const auto& r : j.at("rel_negs")) {
    RelationNegative n;
    n.surface = r.at("surface").get<std::string>();
    n.category = r.at("category").get<std::string>();
    n.relation = span_from(r.at("span"));
    n.event = span_from(r.at("event"));
    n.tokens = r.at("tokens").get<std::vector<std::string>>();
    ns.rel_negs.push_back(std::move(n));
  }
  return ns;
}

void for_each_jsonl(std::istream& in, const std::string& name,
                    const std::function<void(size_t, const Json&)>& fn) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(line_no, Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(name + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_jsonl_line(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

std::vector<FilteredParagraph> read_filtered(const std::string& path) {
  auto in = open_in(path);
  std::vector<FilteredParagraph> out;
  for_each_jsonl(in, path, [&](size_t, const Json& j) { out.push_back(filtered_from_json(j)); });
  return out;
}

std::vector<TrainingExample> read_examples(const std::string& path) {
  auto in = open_in(path);
  std::vector<TrainingExample> out;
  for_each_jsonl(in, path, [&](size_t, const Json& j) { out.push_back(example_from_json(j)); });
  return out;
}

std::vector<NegativeSet> read_negative_sets(const std::string& path) {
  auto in = open_in(path);
  std::vector<NegativeSet> out;
  for_each_jsonl(in, path,
                 [&](size_t, const Json& j) { out.push_back(negative_set_from_json(j)); });
  return out;
}

void write_filtered(const std::string& path, const std::vector<FilteredParagraph>& items) {
  auto out = open_out(path);
  for (const auto& it : items) write_jsonl_line(out, to_json(it));
}

void write_examples(const std::string& path, const std::vector<TrainingExample>& items) {
  auto out = open_out(path);
  for (const auto& it : items) write_jsonl_line(out, to_json(it));
}

void write_negative_sets(const std::string& path, const std::vector<NegativeSet>& items) {
  auto out = open_out(path);
  for (const auto& it : items) write_jsonl_line(out, to_json(it));
}

}  // namespace eventbert
