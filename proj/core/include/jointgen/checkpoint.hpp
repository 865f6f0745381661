#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "jointgen/dataset.hpp"
#include "jointgen/model.hpp"

namespace jointgen {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: "JGCK", u32 format version, u64 header length, JSON header
/// (model config, vocabularies, metadata, parameter names and shapes),
/// then every parameter's values as little-endian float32 in header order.
struct Checkpoint {
  ModelConfig config;
  Vocabularies vocab;
  /// Free-form provenance such as the seed and resolved run settings.
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> parameters;
};

Checkpoint snapshot(const JointModel& model, const Vocabularies& vocab,
                    std::map<std::string, std::string> metadata = {});

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `model`. Every model parameter must be present
/// with an identical shape; otherwise FormatError.
void restore(JointModel& model, const Checkpoint& checkpoint);

/// Builds a model from the stored config and loads its weights.
std::unique_ptr<JointModel> instantiate(const Checkpoint& checkpoint);

}  // namespace jointgen
