// JSONL wire formats for the file-based pipeline stages.

#ifndef EVENTBERT_IO_H_
#define EVENTBERT_IO_H_

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "eventbert/discourse.h"
#include "eventbert/events.h"
#include "eventbert/negatives.h"
#include "json.hpp"

namespace eventbert {

using Json = nlohmann::ordered_json;

Json to_json(const FilteredParagraph& fp);
FilteredParagraph filtered_from_json(const Json& j);

Json to_json(const TrainingExample& ex);
TrainingExample example_from_json(const Json& j);

Json to_json(const NegativeSet& ns);
NegativeSet negative_set_from_json(const Json& j);

// Calls `fn(line_no, json)` for each non-empty line. Parse and schema
// failures (json exceptions, DataError) are rethrown as DataError prefixed
// with "<name>:<line>".
void for_each_jsonl(std::istream& in, const std::string& name,
                    const std::function<void(size_t, const Json&)>& fn);

void write_jsonl_line(std::ostream& out, const Json& j);

std::vector<FilteredParagraph> read_filtered(const std::string& path);
std::vector<TrainingExample> read_examples(const std::string& path);
std::vector<NegativeSet> read_negative_sets(const std::string& path);

void write_filtered(const std::string& path, const std::vector<FilteredParagraph>& items);
void write_examples(const std::string& path, const std::vector<TrainingExample>& items);
void write_negative_sets(const std::string& path, const std::vector<NegativeSet>& items);

}  // namespace eventbert

#endif  // EVENTBERT_IO_H_
