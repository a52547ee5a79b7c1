#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scatterhsd/autodiff.hpp"

namespace scatterhsd::ad {
class ParameterSet;
}

namespace scatterhsd::checkpoint {

// Binary layout, all integers little-endian:
//   "SHSDCKPT"  u32 version
//   u64 meta_count   { u32 len, key bytes, u32 len, value bytes } * meta_count
//   u64 tensor_count { u32 len, name bytes, u32 rank, u64 dims[rank], f64 values[prod(dims)] } * tensor_count
// Values are raw IEEE-754 doubles, so a save/load round trip is bit-exact.
inline constexpr std::uint32_t kFormatVersion = 1;

struct NamedTensor {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;
};

Checkpoint capture(const ad::ParameterSet& params, std::map<std::string, std::string> meta = {});
/// Copies tensor values into an existing parameter set; names and shapes must match.
void restore(const Checkpoint& ckpt, ad::ParameterSet& params);

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

void save(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load(const std::filesystem::path& path);

/// FNV-1a 64 over the serialized bytes, as 16 hex digits.
std::string content_hash(const Checkpoint& ckpt);

}  // namespace scatterhsd::checkpoint
