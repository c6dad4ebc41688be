#pragma once

// Binary model container, all integers and floats little-endian:
//
//   "SPANSEG\0"  u32 version
//   u32 len + config text (key = value lines)
//   u32 count + u32 code point per vocab character, id order
//   u32 count + (u32 len + bytes) per POS tag name, id order
//   u32 count + tensors: u32 len + name, u32 rank, u64 dims[rank], f32 data

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanseg/config.hpp"
#include "spanseg/corpus.hpp"
#include "spanseg/model.hpp"

namespace spanseg {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelArtifact {
  TrainConfig config;
  Vocab vocab;
  TagSet tags;
  Model<float> model;
};

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, version, shape, malformed };

  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::string& path, const ModelArtifact& artifact);
// I/O failures throw std::runtime_error; format problems ModelFormatError.
ModelArtifact load_model(const std::string& path);

}  // namespace spanseg
