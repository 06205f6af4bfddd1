// Checkpoint directories: manifest.json, vocab.txt, one little-endian f64
// file per parameter and, optionally, the AdamW moments.

#ifndef EVENTBERT_CHECKPOINT_H_
#define EVENTBERT_CHECKPOINT_H_

#include <optional>
#include <string>
#include <vector>

#include "eventbert/io.h"
#include "eventbert/model.h"
#include "eventbert/vocab.h"

namespace eventbert {

struct AdamState {
  size_t step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;

  // Zero moments shaped like the store.
  static AdamState zeros(const ParameterStore& store);
};

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);

// Replaces `dir` atomically (written to a sibling first, then renamed).
// `train` is stored verbatim under "train" in the manifest.
void save_checkpoint(const std::string& dir, const Model& model, const Vocab& vocab,
                     const Json& train, const AdamState* adam = nullptr);

struct LoadedCheckpoint {
  Model model;
  Vocab vocab;
  Json train;
  std::optional<AdamState> adam;
};

// Throws DataError on missing files, hash mismatches or shape mismatches.
LoadedCheckpoint load_checkpoint(const std::string& dir);

// Content hash of the whole directory.
std::string checkpoint_hash(const std::string& dir);

}  // namespace eventbert

#endif  // EVENTBERT_CHECKPOINT_H_
