#include "infodist/arith_coder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infodist/error.hpp"

namespace infodist {

BitStream BitStream::from_bytes(std::vector<std::uint8_t> bytes, std::uint64_t length_bits) {
  if (bytes.size() != (length_bits + 7) / 8) {
    throw Error(Errc::InvalidArgument, "payload of " + std::to_string(bytes.size()) +
                                           " bytes cannot hold exactly " +
                                           std::to_string(length_bits) + " bits");
  }
  BitStream s;
  s.bytes_ = std::move(bytes);
  s.length_bits_ = length_bits;
  // Bits past the declared length are not part of the stream.
  if (const unsigned used = length_bits % 8; used != 0) {
    s.bytes_.back() &= static_cast<std::uint8_t>(0xFF00u >> used);
  }
  return s;
}

void BitStream::push_bit(bool bit) {
  if (length_bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (length_bits_ % 8));
  ++length_bits_;
}

bool BitStream::bit(std::uint64_t index) const noexcept {
  if (index >= length_bits_) return false;
  return (bytes_[index / 8] >> (7 - index % 8)) & 1u;
}

namespace {

// Narrows [low, high] to the token's sub-range. Shared by both directions so
// the decoder tracks the encoder's registers exactly.
void narrow(CoderState& s, const QuantizedDistribution& dist, TokenId token) {
  const std::uint64_t range = s.high - s.low + 1;
  const std::uint64_t total = dist.total();
  const std::uint64_t lo = dist.cum(token);
  const std::uint64_t hi = lo + dist.freq(token);
  s.high = s.low + range * hi / total - 1;
  s.low = s.low + range * lo / total;
}

}  // namespace

void ArithmeticEncoder::emit(bool bit) {
  out_.push_bit(bit);
  for (; state_.pending_bits > 0; --state_.pending_bits) out_.push_bit(!bit);
}

void ArithmeticEncoder::encode(const QuantizedDistribution& dist, TokenId token) {
  narrow(state_, dist, token);
  for (;;) {
    if (state_.high < CoderState::kHalf) {
      emit(false);
    } else if (state_.low >= CoderState::kHalf) {
      emit(true);
      state_.low -= CoderState::kHalf;
      state_.high -= CoderState::kHalf;
    } else if (state_.low >= CoderState::kQuarter &&
               state_.high < CoderState::kHalf + CoderState::kQuarter) {
      ++state_.pending_bits;
      state_.low -= CoderState::kQuarter;
      state_.high -= CoderState::kQuarter;
    } else {
      break;
    }
    state_.low <<= 1;
    state_.high = (state_.high << 1) | 1;
  }
}

BitStream ArithmeticEncoder::finish() && {
  // Two bits pick a quarter-aligned point inside [low, high]; the decoder
  // reads zeros past the end of the stream.
  ++state_.pending_bits;
  emit(state_.low >= CoderState::kQuarter);
  return std::move(out_);
}

ArithmeticDecoder::ArithmeticDecoder(const BitStream& in) : in_(in) {
  for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | (in_.bit(position_++) ? 1 : 0);
}

TokenId ArithmeticDecoder::decode(const QuantizedDistribution& dist) {
  const std::uint64_t range = state_.high - state_.low + 1;
  if (value_ < state_.low || value_ > state_.high) {
    throw Error(Errc::CorruptStream, "code value left the coding interval");
  }
  const std::uint64_t count = ((value_ - state_.low + 1) * dist.total() - 1) / range;
  if (count >= dist.total()) {
    throw Error(Errc::CorruptStream, "code value matches no token range");
  }
  const TokenId token = dist.lookup(static_cast<std::uint32_t>(count));
  narrow(state_, dist, token);
  for (;;) {
    if (state_.high < CoderState::kHalf) {
      // nothing to subtract
    } else if (state_.low >= CoderState::kHalf) {
      state_.low -= CoderState::kHalf;
      state_.high -= CoderState::kHalf;
      value_ -= CoderState::kHalf;
    } else if (state_.low >= CoderState::kQuarter &&
               state_.high < CoderState::kHalf + CoderState::kQuarter) {
      state_.low -= CoderState::kQuarter;
      state_.high -= CoderState::kQuarter;
      value_ -= CoderState::kQuarter;
    } else {
      break;
    }
    state_.low <<= 1;
    state_.high = (state_.high << 1) | 1;
    value_ = (value_ << 1) | (in_.bit(position_++) ? 1 : 0);
  }
  return token;
}

std::uint32_t coder_total(const EntropyModel& model, const CoderOptions& options) {
  const unsigned log2 = options.total_log2.value_or(default_total_log2(model.vocab()));
  if (log2 < 1 || log2 > kMaxTotalLog2) {
    throw Error(Errc::InvalidArgument,
                "total_log2 must lie in [1, 22], got " + std::to_string(log2));
  }
  const std::uint32_t total = 1u << log2;
  if (total < model.vocab().size) {
    throw Error(Errc::PrecisionTooLow, "2^" + std::to_string(log2) +
                                           " is smaller than the vocabulary size " +
                                           std::to_string(model.vocab().size));
  }
  return total;
}

namespace {

void check_no_eos(std::span<const TokenId> seq, const Vocabulary& vocab) {
  validate_tokens(seq, vocab);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] == vocab.eos_id) {
      throw Error(Errc::InteriorEos, "EOS token at position " + std::to_string(i) +
                                         " cannot be encoded; EOS terminates the stream");
    }
  }
}

}  // namespace

BitStream encode(const EntropyModel& model, std::span<const TokenId> seq,
                 const CoderOptions& options) {
  const Vocabulary& vocab = model.vocab();
  check_no_eos(seq, vocab);
  const std::uint32_t total = coder_total(model, options);

  auto cursor = model.open();
  cursor->push(vocab.eos_id);
  ArithmeticEncoder enc;
  for (TokenId t : seq) {
    enc.encode(cursor->next_quantized(total), t);
    cursor->push(t);
  }
  enc.encode(cursor->next_quantized(total), vocab.eos_id);
  return std::move(enc).finish();
}

std::uint64_t default_max_tokens(const Vocabulary& vocab, std::uint32_t total,
                                 const BitStream& stream) {
  const std::uint64_t simple = 16 * stream.bytes().size() + 4096;
  // Every token costs at least -log2((total - V + 1) / total) bits, and a
  // canonical stream is never more than a bit shorter than its token costs.
  // Twice that count leaves room for rounding.
  const double min_cost =
      -std::log2(1.0 - static_cast<double>(vocab.size - 1) / static_cast<double>(total));
  const double bound = 2.0 * (static_cast<double>(stream.length_bits()) + 2.0) / min_cost + 16;
  if (!(bound < 1e18)) return std::numeric_limits<std::uint64_t>::max();
  return std::max(simple, static_cast<std::uint64_t>(bound));
}

Tokens decode(const EntropyModel& model, const BitStream& stream,
              const CoderOptions& options) {
  const Vocabulary& vocab = model.vocab();
  const std::uint32_t total = coder_total(model, options);
  const std::uint64_t ceiling =
      options.max_tokens.value_or(default_max_tokens(vocab, total, stream));

  auto cursor = model.open();
  cursor->push(vocab.eos_id);
  ArithmeticDecoder dec(stream);
  ArithmeticEncoder mirror;
  Tokens out;
  for (;;) {
    const QuantizedDistribution dist = cursor->next_quantized(total);
    const TokenId t = dec.decode(dist);
    mirror.encode(dist, t);
    if (t == vocab.eos_id) break;
    if (out.size() >= ceiling) {
      throw Error(Errc::RunawayDecode, "decoded more than " + std::to_string(ceiling) +
                                           " tokens without reaching EOS");
    }
    out.push_back(t);
    cursor->push(t);
  }
  if (std::move(mirror).finish() != stream) {
    throw Error(Errc::CorruptStream,
                "stream is not the canonical encoding of its decoded tokens");
  }
  return out;
}

double quantized_code_length(const EntropyModel& model, std::span<const TokenId> seq,
                             const CoderOptions& options) {
  const Vocabulary& vocab = model.vocab();
  check_no_eos(seq, vocab);
  const std::uint32_t total = coder_total(model, options);
  auto cursor = model.open();
  cursor->push(vocab.eos_id);
  double bits = 0.0;
  auto add = [&](TokenId t) {
    const auto dist = cursor->next_quantized(total);
    bits -= std::log2(static_cast<double>(dist.freq(t)) / total);
  };
  for (TokenId t : seq) {
    add(t);
    cursor->push(t);
  }
  add(vocab.eos_id);
  return bits;
}

}  // namespace infodist
