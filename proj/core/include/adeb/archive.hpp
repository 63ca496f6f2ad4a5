#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "adeb/field.hpp"
#include "adeb/partition.hpp"
#include "adeb/planner.hpp"

namespace adeb {

inline constexpr std::uint16_t kArchiveVersion = 1;

// A whole field compressed partition by partition under a plan.
//
// Layout "ADLC": version u16, role u8, strategy u8, field dims 3 x u32,
// block dims 3 x u32, partition count u32, eb_avg f64, measured bitrate f64,
// plan echo (f64 per partition), block offsets (u64, M + 1, relative to the
// first block), serialized blocks, crc32 of everything before it.
struct Archive {
  Role role = Role::generic;
  Strategy strategy = Strategy::uniform;
  Dims3 field_dims;
  Dims3 block_dims;
  double eb_avg = 0.0;
  double measured_bitrate = 0.0;  // whole-archive bits per cell
  std::vector<double> ebs;
  std::vector<std::vector<std::uint8_t>> blocks;  // serialized CompressedBlock records

  std::size_t partitions() const { return ebs.size(); }
  std::size_t byte_size() const;
  double compression_ratio() const { return measured_bitrate > 0.0 ? 32.0 / measured_bitrate : 0.0; }
};

// Throws ArgumentError when the plan length does not match the partition count.
Archive compress_field(const Field3D& field, const Dims3& block_dims, const CompressionPlan& plan,
                       unsigned threads = 1);
Field3D decompress_archive(const Archive& archive, unsigned threads = 1);

std::vector<std::uint8_t> serialize_archive(const Archive& archive);
// Checksum failures and inconsistent records throw DecodeError.
Archive deserialize_archive(std::span<const std::uint8_t> bytes);

void save_archive(const Archive& archive, const std::filesystem::path& path);
Archive load_archive(const std::filesystem::path& path);

}  // namespace adeb
