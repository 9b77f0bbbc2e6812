#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infodist/arith_coder.hpp"
#include "infodist/entropy_model.hpp"

namespace infodist {

/// Fixed 38-byte little-endian archive header.
///
///   offset  size  field
///        0     4  magic "IDZ1"
///        4     1  version
///        5     8  model_id_hash
///       13     1  total_log2
///       14     4  chunk_chars
///       18     4  chunk_count
///       22     8  original_byte_len
///       30     8  checksum (FNV-1a 64 of the plaintext)
///
/// Each chunk follows as a u32 bit length and ceil(bits / 8) payload bytes.
struct ContainerHeader {
  static constexpr std::array<char, 4> kMagic{'I', 'D', 'Z', '1'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kSize = 38;

  std::uint8_t version = kVersion;
  std::uint64_t model_id_hash = 0;
  std::uint8_t total_log2 = 16;
  std::uint32_t chunk_chars = 2500;
  std::uint32_t chunk_count = 0;
  std::uint64_t original_byte_len = 0;
  std::uint64_t checksum = 0;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

struct Archive {
  ContainerHeader header;
  std::vector<BitStream> streams;
};

/// Throws InvalidArgument if chunk_count disagrees with streams.size(),
/// FormatOverflow if a chunk is longer than a u32 bit count allows.
std::vector<std::uint8_t> pack(const ContainerHeader& header,
                               std::span<const BitStream> streams);

/// Parses and checks magic and version. Throws TruncatedFile, BadMagic,
/// UnsupportedVersion, or CorruptStream on trailing bytes. The plaintext
/// checksum can only be checked after decoding; see decompress().
Archive unpack(std::span<const std::uint8_t> bytes);

std::uint64_t plaintext_checksum(std::string_view text) noexcept;

struct CompressOptions {
  std::size_t chunk_chars = 2500;
  /// Unset picks the vocabulary default; otherwise must lie in [14, 22].
  std::optional<unsigned> total_log2;
  unsigned jobs = 1;
};

struct CompressStats {
  std::uint64_t bytes_in = 0;
  std::uint64_t bits_out = 0;      // whole archive, header included
  std::uint64_t payload_bits = 0;  // sum of chunk bit lengths
  std::uint32_t chunks = 0;
  double ratio() const noexcept {
    return bits_out == 0 ? 0.0 : 8.0 * static_cast<double>(bytes_in) / bits_out;
  }
};

/// Splits text into character chunks, arithmetic-codes each one from an
/// empty history and packs the archive.
std::vector<std::uint8_t> compress(const EntropyModel& model, std::string_view text,
                                   const CompressOptions& options = {},
                                   CompressStats* stats = nullptr);

/// Checks the model hash before any decoding (ModelMismatch), decodes every
/// chunk (errors carry the chunk index) and verifies length and checksum
/// (ChecksumMismatch).
std::string decompress(const EntropyModel& model, std::span<const std::uint8_t> bytes,
                       unsigned jobs = 1);

}  // namespace infodist
