// Content hashing and per-output run manifests.

#ifndef EVENTBERT_MANIFEST_H_
#define EVENTBERT_MANIFEST_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace eventbert {

std::string sha256_hex(std::string_view bytes);
// Throws DataError if the file cannot be read.
std::string sha256_file(const std::string& path);
inline constexpr const char* kRunManifestName = "run_manifest.json";

// Hash over every regular file below `dir`: sorted relative paths and bytes.
// The run manifest at the top level is provenance and is skipped.
std::string sha256_tree(const std::string& dir);

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;  // path -> sha256
  std::map<std::string, std::string> output_hashes;
  unsigned long long seed = 0;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;
};

std::string utc_timestamp();

// Writes `<output>.manifest.json` (or `<dir>/run_manifest.json` for a
// directory output).
void write_run_manifest(const std::string& output, const RunManifest& manifest);

}  // namespace eventbert

#endif  // EVENTBERT_MANIFEST_H_
