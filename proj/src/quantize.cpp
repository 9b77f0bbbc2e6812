#include "infodist/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "infodist/error.hpp"

namespace infodist {

bool is_power_of_two(std::uint64_t v) noexcept { return v != 0 && (v & (v - 1)) == 0; }

namespace {

void check_total(std::uint32_t total, std::size_t vocab) {
  if (!is_power_of_two(total) || total > (1u << kMaxTotalLog2)) {
    throw Error(Errc::InvalidArgument,
                "quantization total must be a power of two <= 2^22, got " +
                    std::to_string(total));
  }
  if (total < vocab) {
    throw Error(Errc::PrecisionTooLow,
                "quantization total " + std::to_string(total) +
                    " is smaller than the vocabulary (" + std::to_string(vocab) + ")");
  }
}

}  // namespace

QuantizedDistribution::QuantizedDistribution(std::vector<std::uint32_t> freqs,
                                             std::uint32_t total)
    : freqs_(std::move(freqs)), total_(total) {
  if (freqs_.empty()) throw Error(Errc::InvalidArgument, "empty frequency table");
  check_total(total_, freqs_.size());
  cum_.resize(freqs_.size() + 1);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (freqs_[i] == 0) {
      throw Error(Errc::InvalidArgument,
                  "zero frequency for token " + std::to_string(i));
    }
    cum_[i] = static_cast<std::uint32_t>(acc);
    acc += freqs_[i];
    if (acc > total_) break;
  }
  if (acc != total_) {
    throw Error(Errc::InvalidArgument, "frequencies do not sum to the declared total");
  }
  cum_.back() = total_;
}

TokenId QuantizedDistribution::lookup(std::uint32_t count) const {
  // First cum entry strictly greater than count, minus one.
  auto it = std::upper_bound(cum_.begin(), cum_.end(), count);
  return static_cast<TokenId>(std::distance(cum_.begin(), it) - 1);
}

QuantizedDistribution quantize(std::span<const double> probs, std::uint32_t total) {
  const std::size_t n = probs.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "cannot quantize an empty distribution");
  check_total(total, n);

  double mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(Errc::InvalidArgument, "probabilities must be finite and nonnegative");
    }
    mass += p;
  }
  if (!(mass > 0.0)) throw Error(Errc::InvalidArgument, "distribution has zero mass");

  const std::uint64_t spare = total - n;
  const double scale = static_cast<double>(spare) / mass;
  std::vector<std::uint32_t> freqs(n);
  std::vector<double> rem(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = probs[i] * scale;
    double whole = std::floor(share);
    if (whole > static_cast<double>(spare)) whole = static_cast<double>(spare);
    freqs[i] = 1 + static_cast<std::uint32_t>(whole);
    rem[i] = share - whole;
    assigned += static_cast<std::uint64_t>(whole);
  }

  // Rounding in `scale` can leave the floors a hair over budget; take the
  // excess back from the smallest remainders (largest ids first on ties).
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto by_remainder = [&](std::uint32_t a, std::uint32_t b) {
    if (rem[a] != rem[b]) return rem[a] > rem[b];
    return a < b;
  };
  if (assigned > spare) {
    std::uint64_t excess = assigned - spare;
    std::sort(order.begin(), order.end(), by_remainder);
    for (auto it = order.rbegin(); it != order.rend() && excess > 0; ++it) {
      if (freqs[*it] > 1) {
        --freqs[*it];
        --excess;
      }
    }
    return QuantizedDistribution(std::move(freqs), total);
  }

  std::uint64_t leftover = spare - assigned;
  while (leftover >= n) {
    for (auto& f : freqs) ++f;
    leftover -= n;
  }
  if (leftover > 0) {
    auto nth = order.begin() + static_cast<std::ptrdiff_t>(leftover);
    std::nth_element(order.begin(), nth - 1, order.end(), by_remainder);
    for (auto it = order.begin(); it != nth; ++it) ++freqs[*it];
  }
  return QuantizedDistribution(std::move(freqs), total);
}

}  // namespace infodist
