#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "caevpr/binary_io.hpp"
#include "caevpr/model.hpp"

namespace caevpr {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Checkpoint layout (little-endian): "CAEC", version u16, ArchSpec, seed
/// u64, layer-norm config, then for every parameter in declaration order its
/// name and float32 values, then batch-norm running stats, then Adam state
/// (first moment, second moment, step count) per parameter.
Bytes save_checkpoint(const CaeModel& model);
CaeModel load_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const CaeModel& model);
CaeModel read_checkpoint(const std::filesystem::path& path);

// FNV-1a over the serialized checkpoint; stamped into DVEC headers.
std::uint64_t model_checksum(const CaeModel& model);

}  // namespace caevpr
