#ifndef EVENTBERT_CONFIG_H_
#define EVENTBERT_CONFIG_H_

#include <map>
#include <string>

namespace eventbert {

// Flat `key = value` file in the spirit of TOML: `#` comments, optional
// double quotes around values, `[section]` headers rejected. Keys may use
// '_' or '-' interchangeably and are normalized to '-'. Throws ConfigError.
std::map<std::string, std::string> read_flat_config(const std::string& path);
std::map<std::string, std::string> parse_flat_config(const std::string& text);

}  // namespace eventbert

#endif  // EVENTBERT_CONFIG_H_
