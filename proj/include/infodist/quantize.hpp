#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace infodist {

using TokenId = std::uint32_t;

inline constexpr unsigned kMaxTotalLog2 = 22;

/// Integer-frequency PMF with a power-of-two total. This is the only form of
/// a distribution the arithmetic coder ever sees, so encoder and decoder agree
/// bit for bit as long as they agree on the frequencies.
class QuantizedDistribution {
 public:
  QuantizedDistribution() = default;

  /// Validates: every freq >= 1, sum equals total, total a power of two
  /// no larger than 2^22 and no smaller than the vocabulary.
  QuantizedDistribution(std::vector<std::uint32_t> freqs, std::uint32_t total);

  std::uint32_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return freqs_.size(); }
  std::uint32_t freq(TokenId t) const { return freqs_.at(t); }
  /// Exclusive prefix sum: cum(t) = sum of freqs of ids < t; cum(size()) = total.
  std::uint32_t cum(TokenId t) const { return cum_.at(t); }
  std::span<const std::uint32_t> freqs() const noexcept { return freqs_; }

  /// The token whose range [cum, cum + freq) contains `count`.
  TokenId lookup(std::uint32_t count) const;

  friend bool operator==(const QuantizedDistribution&,
                         const QuantizedDistribution&) = default;

 private:
  std::vector<std::uint32_t> freqs_;
  std::vector<std::uint32_t> cum_;
  std::uint32_t total_ = 0;
};

/// Largest-remainder apportionment of `total` over `probs`.
///
/// Every token is seeded with frequency 1; the remaining total - V units are
/// split proportionally to the (sum-normalized) probabilities, floors first,
/// then one extra unit each to the largest fractional remainders, ties going
/// to the smaller token id. Throws PrecisionTooLow when total < V.
QuantizedDistribution quantize(std::span<const double> probs,
                               std::uint32_t total);

bool is_power_of_two(std::uint64_t v) noexcept;

}  // namespace infodist
