#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "infodist/entropy_model.hpp"
#include "infodist/quantize.hpp"

namespace infodist {

/// Append-only bit buffer, most significant bit of each byte first.
class BitStream {
 public:
  BitStream() = default;

  /// Adopts a byte payload holding `length_bits` bits. The payload must be
  /// exactly ceil(length_bits / 8) bytes long.
  static BitStream from_bytes(std::vector<std::uint8_t> bytes, std::uint64_t length_bits);

  void push_bit(bool bit);
  /// Bit at `index`; positions at or past length_bits() read as zero.
  bool bit(std::uint64_t index) const noexcept;

  std::uint64_t length_bits() const noexcept { return length_bits_; }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t length_bits_ = 0;
};

/// Encoder/decoder registers. low and high are inclusive bounds of the
/// current interval scaled to 32 bits; pending counts underflow bits whose
/// value is decided by the next emitted bit.
struct CoderState {
  static constexpr std::uint64_t kTop = 0xFFFFFFFFull;
  static constexpr std::uint64_t kHalf = 1ull << 31;
  static constexpr std::uint64_t kQuarter = 1ull << 30;

  std::uint64_t low = 0;
  std::uint64_t high = kTop;
  std::uint64_t pending_bits = 0;
};

/// Interval-narrowing encoder over quantized distributions, with
/// bit-at-a-time renormalization.
class ArithmeticEncoder {
 public:
  void encode(const QuantizedDistribution& dist, TokenId token);
  /// Emits the terminating bits. The encoder must not be used afterwards.
  BitStream finish() &&;

  const CoderState& state() const noexcept { return state_; }

 private:
  void emit(bool bit);

  CoderState state_;
  BitStream out_;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(const BitStream& in);

  /// Throws CorruptStream when the code value falls outside every range.
  TokenId decode(const QuantizedDistribution& dist);

  const CoderState& state() const noexcept { return state_; }

 private:
  const BitStream& in_;
  std::uint64_t position_ = 0;
  std::uint64_t value_ = 0;
  CoderState state_;
};

struct CoderOptions {
  /// Quantization total is 2^total_log2. Unset picks the vocabulary default.
  std::optional<unsigned> total_log2;
  /// Decoded-token ceiling. Unset means default_max_tokens().
  std::optional<std::uint64_t> max_tokens;
};

/// The larger of 16 * payload bytes + 4096 and twice the most tokens a
/// canonical stream of this length can hold at this precision.
std::uint64_t default_max_tokens(const Vocabulary& vocab, std::uint32_t total,
                                 const BitStream& stream);

std::uint32_t coder_total(const EntropyModel& model, const CoderOptions& options);

/// Arithmetic-codes `seq` followed by an implicit EOS. Histories start from
/// t_0 = EOS, which is never emitted. Throws InteriorEos if seq holds EOS.
BitStream encode(const EntropyModel& model, std::span<const TokenId> seq,
                 const CoderOptions& options = {});

/// Inverse of encode. The decoder mirrors the encoder's register updates and
/// rejects any stream that is not exactly what encode would have produced
/// for the decoded tokens (CorruptStream), so damaged input never decodes
/// silently.
Tokens decode(const EntropyModel& model, const BitStream& stream,
              const CoderOptions& options = {});

/// Sum of -log2(freq / total) over seq and the trailing EOS, using the same
/// quantized distributions encode() would use.
double quantized_code_length(const EntropyModel& model, std::span<const TokenId> seq,
                             const CoderOptions& options = {});

}  // namespace infodist
