#pragma once

#include "ftmixer/diffarray.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ftmixer {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Named parameter arrays plus a free-form metadata string (the model
/// config in key = value form).
///
/// Binary layout, all integers and floats little-endian:
///   "FTMXCKPT"  u32 version  u64 metadata_len  metadata bytes  u32 entry_count
///   per entry:  u32 name_len  name  u32 rank  u64 dims[rank]  f64 values[prod(dims)]
struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::string metadata;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ftmixer
