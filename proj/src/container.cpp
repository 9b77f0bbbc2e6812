#include "infodist/container.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "infodist/codelen.hpp"
#include "infodist/error.hpp"
#include "infodist/hash.hpp"
#include "infodist/parallel.hpp"

namespace infodist {

namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw Error(Errc::TruncatedFile, "archive ends after " + std::to_string(in_.size()) +
                                           " bytes, more data expected");
    }
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t plaintext_checksum(std::string_view text) noexcept { return fnv1a64(text); }

std::vector<std::uint8_t> pack(const ContainerHeader& header,
                               std::span<const BitStream> streams) {
  if (header.chunk_count != streams.size()) {
    throw Error(Errc::InvalidArgument, "header declares " +
                                           std::to_string(header.chunk_count) +
                                           " chunks but " + std::to_string(streams.size()) +
                                           " streams were given");
  }
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  for (char c : ContainerHeader::kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(header.version);
  w.u64(header.model_id_hash);
  w.u8(header.total_log2);
  w.u32(header.chunk_chars);
  w.u32(header.chunk_count);
  w.u64(header.original_byte_len);
  w.u64(header.checksum);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].length_bits() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::FormatOverflow,
                  "chunk " + std::to_string(i) + " exceeds 2^32 - 1 bits");
    }
    w.u32(static_cast<std::uint32_t>(streams[i].length_bits()));
    w.raw(streams[i].bytes());
  }
  return out;
}

Archive unpack(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < ContainerHeader::kMagic.size()) {
    throw Error(Errc::TruncatedFile,
                "archive is " + std::to_string(bytes.size()) + " bytes, shorter than its magic");
  }
  if (!std::equal(ContainerHeader::kMagic.begin(), ContainerHeader::kMagic.end(),
                  bytes.begin(), [](char a, std::uint8_t b) {
                    return static_cast<std::uint8_t>(a) == b;
                  })) {
    throw Error(Errc::BadMagic, "not an IDZ1 archive");
  }
  ByteReader r(bytes);
  r.raw(ContainerHeader::kMagic.size());
  Archive a;
  auto& h = a.header;
  h.version = r.u8();
  if (h.version != ContainerHeader::kVersion) {
    throw Error(Errc::UnsupportedVersion,
                "archive version " + std::to_string(h.version) + " is not supported");
  }
  h.model_id_hash = r.u64();
  h.total_log2 = r.u8();
  h.chunk_chars = r.u32();
  h.chunk_count = r.u32();
  h.original_byte_len = r.u64();
  h.checksum = r.u64();
  a.streams.reserve(std::min<std::size_t>(h.chunk_count, r.remaining() / 4));
  for (std::uint32_t i = 0; i < h.chunk_count; ++i) {
    const std::uint32_t bits = r.u32();
    auto payload = r.raw((static_cast<std::uint64_t>(bits) + 7) / 8);
    if (const unsigned used = bits % 8;
        used != 0 && (payload.back() & (0xFFu >> used)) != 0) {
      throw Error(Errc::CorruptStream,
                  "chunk " + std::to_string(i) + " has nonzero padding bits");
    }
    a.streams.push_back(
        BitStream::from_bytes(std::vector<std::uint8_t>(payload.begin(), payload.end()), bits));
  }
  if (r.remaining() != 0) {
    throw Error(Errc::CorruptStream,
                std::to_string(r.remaining()) + " trailing bytes after the last chunk");
  }
  return a;
}

std::vector<std::uint8_t> compress(const EntropyModel& model, std::string_view text,
                                   const CompressOptions& options, CompressStats* stats) {
  const unsigned log2 = options.total_log2.value_or(default_total_log2(model.vocab()));
  if (log2 < 14 || log2 > kMaxTotalLog2) {
    throw Error(Errc::InvalidArgument,
                "archive total_log2 must lie in [14, 22], got " + std::to_string(log2));
  }
  if (options.chunk_chars == 0 ||
      options.chunk_chars > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::FormatOverflow, "chunk_chars must fit in a u32 and be positive");
  }
  const ChunkPlan plan = ChunkPlan::make(text, options.chunk_chars);
  const std::size_t n = plan.chunk_count();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::FormatOverflow, "too many chunks for a u32 count");
  }
  std::vector<BitStream> streams(n);
  const CoderOptions coder{log2, std::nullopt};
  parallel_for(n, options.jobs, [&](std::size_t i) {
    try {
      streams[i] = encode(model, model.tokenize(plan.chunk(text, i)), coder);
    } catch (const Error& e) {
      throw Error(e.code(), "chunk " + std::to_string(i) + ": " + e.what());
    }
  });

  ContainerHeader h;
  h.model_id_hash = model.descriptor().hash();
  h.total_log2 = static_cast<std::uint8_t>(log2);
  h.chunk_chars = static_cast<std::uint32_t>(options.chunk_chars);
  h.chunk_count = static_cast<std::uint32_t>(n);
  h.original_byte_len = text.size();
  h.checksum = plaintext_checksum(text);
  auto bytes = pack(h, streams);
  if (stats) {
    stats->bytes_in = text.size();
    stats->bits_out = 8 * bytes.size();
    stats->payload_bits = 0;
    for (const auto& s : streams) stats->payload_bits += s.length_bits();
    stats->chunks = h.chunk_count;
  }
  return bytes;
}

std::string decompress(const EntropyModel& model, std::span<const std::uint8_t> bytes,
                       unsigned jobs) {
  const Archive a = unpack(bytes);
  const auto& h = a.header;
  if (h.model_id_hash != model.descriptor().hash()) {
    throw Error(Errc::ModelMismatch, "archive was written by a different model than '" +
                                         model.descriptor().model_id + "'");
  }
  const CoderOptions coder{h.total_log2, std::nullopt};
  std::vector<std::string> parts(a.streams.size());
  parallel_for(a.streams.size(), jobs, [&](std::size_t i) {
    try {
      parts[i] = model.detokenize(decode(model, a.streams[i], coder));
    } catch (const Error& e) {
      throw Error(e.code(), "chunk " + std::to_string(i) + ": " + e.what());
    }
  });
  std::string text;
  text.reserve(h.original_byte_len);
  for (const auto& p : parts) text += p;
  if (text.size() != h.original_byte_len || plaintext_checksum(text) != h.checksum) {
    throw Error(Errc::ChecksumMismatch, "decoded text does not match the archive checksum");
  }
  return text;
}

}  // namespace infodist
