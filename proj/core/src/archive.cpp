#include "adeb/archive.hpp"

#include <cstring>

#include "adeb/bytes.hpp"
#include "adeb/codec.hpp"
#include "adeb/error.hpp"

namespace adeb {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'L', 'C'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 12 + 12 + 4 + 8 + 8;

std::size_t layout_bytes(std::size_t partitions, std::size_t block_bytes) {
  return kHeaderBytes + 8 * partitions + 8 * (partitions + 1) + block_bytes + 4;
}

void put_dims(std::vector<std::uint8_t>& out, const Dims3& d) {
  for (int a = 0; a < 3; ++a) bytes::put<std::uint32_t>(out, static_cast<std::uint32_t>(d[a]));
}

Dims3 get_dims(bytes::Reader<DecodeError>& in) {
  Dims3 d;
  d.nx = in.get<std::uint32_t>();
  d.ny = in.get<std::uint32_t>();
  d.nz = in.get<std::uint32_t>();
  return d;
}

}  // namespace

std::size_t Archive::byte_size() const {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  return layout_bytes(blocks.size(), total);
}

Archive compress_field(const Field3D& field, const Dims3& block_dims, const CompressionPlan& plan,
                       unsigned threads) {
  const auto pset = partition_field(field, block_dims);
  if (plan.ebs.size() != pset.count()) {
    throw ArgumentError("plan has " + std::to_string(plan.ebs.size()) + " bounds but the field has " +
                        std::to_string(pset.count()) + " partitions");
  }
  Archive archive;
  archive.role = field.role();
  archive.strategy = plan.strategy;
  archive.field_dims = field.dims();
  archive.block_dims = block_dims;
  archive.eb_avg = plan.eb_avg;
  archive.ebs = plan.ebs;
  archive.blocks.resize(pset.count());
  for_each_block(pset.count(), threads, [&](std::size_t id) {
    const auto& blk = pset.blocks[id];
    const auto values = extract_block(field.values(), field.dims(), blk);
    archive.blocks[id] = serialize_block(compress_block(values, blk.extent, plan.ebs[id]));
  });
  archive.measured_bitrate =
      8.0 * static_cast<double>(archive.byte_size()) / static_cast<double>(field.dims().cells());
  return archive;
}

Field3D decompress_archive(const Archive& archive, unsigned threads) {
  const auto pset = partition_field(archive.field_dims, archive.block_dims);
  if (archive.blocks.size() != pset.count() || archive.ebs.size() != pset.count()) {
    throw DecodeError("archive partition count does not match its geometry");
  }
  std::vector<float> values(archive.field_dims.cells());
  for_each_block(pset.count(), threads, [&](std::size_t id) {
    const auto block = deserialize_block(archive.blocks[id]);
    if (block.eb != archive.ebs[id]) {
      throw DecodeError("block " + std::to_string(id) + " bound differs from the stored plan");
    }
    if (block.dims != pset.blocks[id].extent) {
      throw DecodeError("block " + std::to_string(id) + " extent differs from the partition layout");
    }
    insert_block(values, archive.field_dims, pset.blocks[id], decompress_block(block));
  });
  return Field3D(std::string(to_string(archive.role)), archive.role, archive.field_dims, std::move(values));
}

std::vector<std::uint8_t> serialize_archive(const Archive& archive) {
  if (archive.blocks.size() != archive.ebs.size()) throw ArgumentError("archive blocks and plan disagree");
  std::vector<std::uint8_t> out;
  out.reserve(archive.byte_size());
  out.insert(out.end(), kMagic, kMagic + 4);
  bytes::put<std::uint16_t>(out, kArchiveVersion);
  bytes::put<std::uint8_t>(out, static_cast<std::uint8_t>(archive.role));
  bytes::put<std::uint8_t>(out, static_cast<std::uint8_t>(archive.strategy));
  put_dims(out, archive.field_dims);
  put_dims(out, archive.block_dims);
  bytes::put<std::uint32_t>(out, static_cast<std::uint32_t>(archive.ebs.size()));
  bytes::put<double>(out, archive.eb_avg);
  bytes::put<double>(out, archive.measured_bitrate);
  for (double eb : archive.ebs) bytes::put<double>(out, eb);
  std::uint64_t offset = 0;
  bytes::put<std::uint64_t>(out, offset);
  for (const auto& b : archive.blocks) {
    offset += b.size();
    bytes::put<std::uint64_t>(out, offset);
  }
  for (const auto& b : archive.blocks) bytes::put_bytes(out, b);
  bytes::put<std::uint32_t>(out, bytes::crc32(out));
  return out;
}

Archive deserialize_archive(std::span<const std::uint8_t> data) {
  if (data.size() < kHeaderBytes + 4) throw DecodeError("archive shorter than its header");
  if (std::memcmp(data.data(), kMagic, 4) != 0) throw DecodeError("not an archive (bad magic)");
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, data.data() + data.size() - 4, 4);
  if (bytes::crc32(data.first(data.size() - 4)) != stored_crc) throw DecodeError("archive checksum mismatch");

  bytes::Reader<DecodeError> in(data.first(data.size() - 4));
  in.take(4);
  if (const auto version = in.get<std::uint16_t>(); version != kArchiveVersion) {
    throw DecodeError("unsupported archive version " + std::to_string(version));
  }
  Archive a;
  const auto role = in.get<std::uint8_t>();
  const auto strategy = in.get<std::uint8_t>();
  if (role > static_cast<std::uint8_t>(Role::velocity_z)) throw DecodeError("unknown field role in archive");
  if (strategy > static_cast<std::uint8_t>(Strategy::combined)) throw DecodeError("unknown strategy in archive");
  a.role = static_cast<Role>(role);
  a.strategy = static_cast<Strategy>(strategy);
  a.field_dims = get_dims(in);
  a.block_dims = get_dims(in);
  const auto partitions = in.get<std::uint32_t>();
  a.eb_avg = in.get<double>();
  a.measured_bitrate = in.get<double>();
  PartitionSet pset;
  try {
    pset = partition_field(a.field_dims, a.block_dims);
  } catch (const ArgumentError& e) {
    throw DecodeError(std::string("bad archive geometry: ") + e.what());
  }
  if (pset.count() != partitions) throw DecodeError("archive partition count does not match its geometry");

  a.ebs.resize(partitions);
  for (auto& eb : a.ebs) eb = in.get<double>();
  std::vector<std::uint64_t> offsets(partitions + 1);
  for (auto& o : offsets) o = in.get<std::uint64_t>();
  if (offsets.front() != 0 || offsets.back() != in.remaining()) throw DecodeError("archive offset table is inconsistent");
  a.blocks.resize(partitions);
  for (std::size_t m = 0; m < partitions; ++m) {
    if (offsets[m + 1] < offsets[m]) throw DecodeError("archive offset table is not monotone");
    const auto rec = in.take(offsets[m + 1] - offsets[m]);
    a.blocks[m].assign(rec.begin(), rec.end());
  }
  return a;
}

void save_archive(const Archive& archive, const std::filesystem::path& path) {
  bytes::write_file(path.string(), serialize_archive(archive));
}

Archive load_archive(const std::filesystem::path& path) {
  const auto data = bytes::read_file(path.string());
  return deserialize_archive(data);
}

}  // namespace adeb
