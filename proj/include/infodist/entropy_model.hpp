#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infodist/quantize.hpp"

namespace infodist {

using Tokens = std::vector<TokenId>;

inline constexpr std::uint32_t kMaxVocabulary = 1u << 21;
inline constexpr std::size_t kDefaultContextLimit = 1024;

struct Vocabulary {
  std::uint32_t size = 0;
  TokenId eos_id = 0;

  /// Throws InvalidArgument unless 2 <= size <= 2^21 and eos_id < size.
  static Vocabulary make(std::uint32_t size, TokenId eos_id);

  bool contains(TokenId t) const noexcept { return t < size; }
  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

/// 256 byte values plus EOS at id 256.
inline constexpr Vocabulary kByteVocabulary{257, 256};

/// Throws InvalidToken naming the first offending position.
void validate_tokens(std::span<const TokenId> ids, const Vocabulary& vocab);

/// Real-valued next-token distribution over the full vocabulary.
class NextTokenDistribution {
 public:
  /// Rejects negative entries and sums further than 1e-9 from one.
  explicit NextTokenDistribution(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](TokenId t) const { return probs_.at(t); }
  std::size_t size() const noexcept { return probs_.size(); }
  /// Inclusive-of-zero prefix sums, size() + 1 entries, last one the total.
  std::vector<double> cdf() const;

  /// 1-indexed rank of `t` by descending probability, ties by smaller id.
  std::uint64_t rank_of(TokenId t) const;

 private:
  std::vector<double> probs_;
};

struct ModelDescriptor {
  std::string model_id;
  Vocabulary vocab;
  bool deterministic = true;
  std::size_t context_limit = kDefaultContextLimit;

  /// Stable 64-bit identity of the descriptor; stored in archive headers.
  std::uint64_t hash() const;
};

/// Incremental view over one growing history. Cursors own whatever mutable
/// state a model needs, so the model itself stays shareable across threads.
/// A cursor borrows its model and must not outlive it.
class ModelCursor {
 public:
  virtual ~ModelCursor() = default;

  /// Appends a realized token to the history. Histories longer than the
  /// model's context_limit keep only the most recent context_limit tokens.
  virtual void push(TokenId t) = 0;

  /// Distribution of the token following the current history.
  virtual NextTokenDistribution next() = 0;

  /// Integer form of next(). Models whose frequencies come from elsewhere
  /// (a server, a fixed table) override this so coding never touches floats.
  virtual QuantizedDistribution next_quantized(std::uint32_t total);
};

class EntropyModel {
 public:
  virtual ~EntropyModel() = default;

  virtual const ModelDescriptor& descriptor() const = 0;
  const Vocabulary& vocab() const { return descriptor().vocab; }

  /// Fresh cursor positioned at an empty history.
  virtual std::unique_ptr<ModelCursor> open() const = 0;

  /// P(next | context), context truncated to its last context_limit tokens.
  NextTokenDistribution predict(std::span<const TokenId> context) const;

  /// Probability of each seq[i] given history ++ seq[0..i). The history is
  /// passed as-is; callers own the leading-EOS convention.
  virtual std::vector<double> score(std::span<const TokenId> history,
                                    std::span<const TokenId> seq) const;

  /// Byte-level by default: byte b maps to id b. Requires a vocabulary with
  /// room for all 256 bytes and an EOS id outside that range.
  virtual Tokens tokenize(std::string_view text) const;
  virtual std::string detokenize(std::span<const TokenId> ids) const;
};

/// Per-token probabilities of `seq` with t_0 = EOS prepended ahead of
/// `prior_context`; both sequences are validated against the vocabulary.
std::vector<double> score_sequence(const EntropyModel& model,
                                   std::span<const TokenId> seq,
                                   std::span<const TokenId> prior_context = {});

/// History the scorers condition on: EOS followed by the prior context.
Tokens make_history(const Vocabulary& vocab, std::span<const TokenId> prior_context);

/// Default quantization total: 2^16 for vocabularies up to 2^14 tokens, 2^20
/// beyond that, 2^22 when the vocabulary itself exceeds 2^20.
unsigned default_total_log2(const Vocabulary& vocab) noexcept;

// --- built-in models --------------------------------------------------------

/// Every token equally likely, whatever the history.
class UniformModel final : public EntropyModel {
 public:
  explicit UniformModel(Vocabulary vocab = kByteVocabulary,
                        std::size_t context_limit = kDefaultContextLimit);

  const ModelDescriptor& descriptor() const override { return desc_; }
  std::unique_ptr<ModelCursor> open() const override;
  std::vector<double> score(std::span<const TokenId> history,
                            std::span<const TokenId> seq) const override;

 private:
  ModelDescriptor desc_;
};

/// Context-free model with a fixed distribution. When built from integer
/// frequencies, next_quantized() hands those frequencies to the coder
/// unchanged whenever the requested total matches.
class StaticModel final : public EntropyModel {
 public:
  static StaticModel from_probs(Vocabulary vocab, std::vector<double> probs);
  static StaticModel from_freqs(Vocabulary vocab, std::vector<std::uint32_t> freqs);

  const ModelDescriptor& descriptor() const override { return desc_; }
  std::unique_ptr<ModelCursor> open() const override;
  std::vector<double> score(std::span<const TokenId> history,
                            std::span<const TokenId> seq) const override;

  std::span<const double> probs() const noexcept { return probs_; }

 private:
  StaticModel(Vocabulary vocab, std::vector<double> probs,
              std::vector<std::uint32_t> freqs);

  ModelDescriptor desc_;
  std::vector<double> probs_;
  std::vector<std::uint32_t> freqs_;  // empty unless built from frequencies
};

/// Order-k adaptive context model.
///
/// Statistics are the (context, symbol) observations inside the current
/// window, so a prediction depends only on the last context_limit tokens.
/// Order 0 is a Laplace (add-one) estimate over the whole vocabulary; each
/// higher order m blends in with Witten-Bell weights,
///
///   P_m(s) = (c_m(s) + u_m * P_{m-1}(s)) / (n_m + u_m),
///
/// where n_m is the number of observations of the order-m context and u_m
/// the number of distinct symbols that followed it. An unseen context falls
/// back to the shorter one. EOS may appear in a context but is never counted
/// as an observed symbol, so the leading t_0 does not bias the estimate.
class AdaptiveModel final : public EntropyModel {
 public:
  explicit AdaptiveModel(unsigned order = 2, Vocabulary vocab = kByteVocabulary,
                         std::size_t context_limit = kDefaultContextLimit);

  const ModelDescriptor& descriptor() const override { return desc_; }
  std::unique_ptr<ModelCursor> open() const override;
  unsigned order() const noexcept { return order_; }

 private:
  ModelDescriptor desc_;
  unsigned order_;
};

}  // namespace infodist
