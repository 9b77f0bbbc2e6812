#include "infodist/entropy_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <string>
#include <unordered_map>
#include <utility>

#include "infodist/error.hpp"
#include "infodist/hash.hpp"

namespace infodist {

Vocabulary Vocabulary::make(std::uint32_t size, TokenId eos_id) {
  if (size < 2 || size > kMaxVocabulary) {
    throw Error(Errc::InvalidArgument,
                "vocabulary size must lie in [2, 2^21], got " + std::to_string(size));
  }
  if (eos_id >= size) {
    throw Error(Errc::InvalidArgument, "eos id " + std::to_string(eos_id) +
                                           " outside vocabulary of size " +
                                           std::to_string(size));
  }
  return Vocabulary{size, eos_id};
}

void validate_tokens(std::span<const TokenId> ids, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!vocab.contains(ids[i])) {
      throw Error(Errc::InvalidToken, "token id " + std::to_string(ids[i]) +
                                          " at position " + std::to_string(i) +
                                          " outside vocabulary of size " +
                                          std::to_string(vocab.size));
    }
  }
}

NextTokenDistribution::NextTokenDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(Errc::InvalidArgument, "negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::InvalidArgument,
                "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

std::vector<double> NextTokenDistribution::cdf() const {
  std::vector<double> out(probs_.size() + 1, 0.0);
  for (std::size_t i = 0; i < probs_.size(); ++i) out[i + 1] = out[i] + probs_[i];
  return out;
}

std::uint64_t NextTokenDistribution::rank_of(TokenId t) const {
  const double pt = probs_.at(t);
  std::uint64_t rank = 1;
  for (std::size_t v = 0; v < probs_.size(); ++v) {
    if (probs_[v] > pt || (probs_[v] == pt && v < t)) ++rank;
  }
  return rank;
}

std::uint64_t ModelDescriptor::hash() const {
  return Fnv1a64{}
      .update(model_id)
      .update_u64(vocab.size)
      .update_u64(vocab.eos_id)
      .update_u64(context_limit)
      .update_u64(deterministic ? 1 : 0)
      .digest();
}

QuantizedDistribution ModelCursor::next_quantized(std::uint32_t total) {
  return quantize(next().probs(), total);
}

NextTokenDistribution EntropyModel::predict(std::span<const TokenId> context) const {
  validate_tokens(context, vocab());
  const std::size_t limit = descriptor().context_limit;
  if (context.size() > limit) context = context.last(limit);
  auto cursor = open();
  for (TokenId t : context) cursor->push(t);
  return cursor->next();
}

std::vector<double> EntropyModel::score(std::span<const TokenId> history,
                                        std::span<const TokenId> seq) const {
  std::vector<double> out;
  out.reserve(seq.size());
  auto cursor = open();
  const std::size_t limit = descriptor().context_limit;
  if (history.size() > limit) history = history.last(limit);
  for (TokenId t : history) cursor->push(t);
  for (TokenId t : seq) {
    out.push_back(cursor->next()[t]);
    cursor->push(t);
  }
  return out;
}

namespace {

bool byte_compatible(const Vocabulary& v) { return v.size >= 257 && v.eos_id >= 256; }

}  // namespace

Tokens EntropyModel::tokenize(std::string_view text) const {
  if (!byte_compatible(vocab())) {
    throw Error(Errc::Unsupported, "model '" + descriptor().model_id +
                                       "' has no byte-level tokenizer");
  }
  Tokens ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(c);
  return ids;
}

std::string EntropyModel::detokenize(std::span<const TokenId> ids) const {
  if (!byte_compatible(vocab())) {
    throw Error(Errc::Unsupported, "model '" + descriptor().model_id +
                                       "' has no byte-level tokenizer");
  }
  std::string out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] > 255) {
      throw Error(Errc::InvalidToken, "token id " + std::to_string(ids[i]) +
                                          " at position " + std::to_string(i) +
                                          " is not a byte");
    }
    out.push_back(static_cast<char>(ids[i]));
  }
  return out;
}

Tokens make_history(const Vocabulary& vocab, std::span<const TokenId> prior_context) {
  Tokens h;
  h.reserve(prior_context.size() + 1);
  h.push_back(vocab.eos_id);
  h.insert(h.end(), prior_context.begin(), prior_context.end());
  return h;
}

std::vector<double> score_sequence(const EntropyModel& model,
                                   std::span<const TokenId> seq,
                                   std::span<const TokenId> prior_context) {
  validate_tokens(prior_context, model.vocab());
  validate_tokens(seq, model.vocab());
  const Tokens history = make_history(model.vocab(), prior_context);
  return model.score(history, seq);
}

unsigned default_total_log2(const Vocabulary& vocab) noexcept {
  if (vocab.size > (1u << 20)) return 22;
  if (vocab.size > (1u << 14)) return 20;
  return 16;
}

// --- uniform ----------------------------------------------------------------

namespace {

class UniformCursor final : public ModelCursor {
 public:
  explicit UniformCursor(std::uint32_t size) : size_(size) {}
  void push(TokenId) override {}
  NextTokenDistribution next() override {
    return NextTokenDistribution(std::vector<double>(size_, 1.0 / size_));
  }

 private:
  std::uint32_t size_;
};

ModelDescriptor make_descriptor(std::string id, Vocabulary vocab, std::size_t limit) {
  if (limit < 1) throw Error(Errc::InvalidArgument, "context_limit must be >= 1");
  return ModelDescriptor{std::move(id), vocab, true, limit};
}

}  // namespace

UniformModel::UniformModel(Vocabulary vocab, std::size_t context_limit)
    : desc_(make_descriptor("builtin:uniform/v" + std::to_string(vocab.size), vocab,
                            context_limit)) {
  Vocabulary::make(vocab.size, vocab.eos_id);
}

std::unique_ptr<ModelCursor> UniformModel::open() const {
  return std::make_unique<UniformCursor>(desc_.vocab.size);
}

std::vector<double> UniformModel::score(std::span<const TokenId>,
                                        std::span<const TokenId> seq) const {
  return std::vector<double>(seq.size(), 1.0 / desc_.vocab.size);
}

// --- static -----------------------------------------------------------------

namespace {

class StaticCursor final : public ModelCursor {
 public:
  StaticCursor(std::span<const double> probs, std::span<const std::uint32_t> freqs)
      : probs_(probs), freqs_(freqs) {}
  void push(TokenId) override {}
  NextTokenDistribution next() override {
    return NextTokenDistribution(std::vector<double>(probs_.begin(), probs_.end()));
  }
  QuantizedDistribution next_quantized(std::uint32_t total) override {
    std::uint64_t native = 0;
    for (auto f : freqs_) native += f;
    if (!freqs_.empty() && native == total) {
      return QuantizedDistribution(std::vector<std::uint32_t>(freqs_.begin(), freqs_.end()),
                                   total);
    }
    return quantize(probs_, total);
  }

 private:
  std::span<const double> probs_;
  std::span<const std::uint32_t> freqs_;
};

}  // namespace

StaticModel::StaticModel(Vocabulary vocab, std::vector<double> probs,
                         std::vector<std::uint32_t> freqs)
    : probs_(std::move(probs)), freqs_(std::move(freqs)) {
  Vocabulary::make(vocab.size, vocab.eos_id);
  if (probs_.size() != vocab.size) {
    throw Error(Errc::InvalidArgument, "static distribution size does not match vocabulary");
  }
  NextTokenDistribution check(probs_);
  Fnv1a64 h;
  for (double p : probs_) h.update_u64(std::bit_cast<std::uint64_t>(p));
  for (auto f : freqs_) h.update_u64(f);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  desc_ = make_descriptor("builtin:static/v" + std::to_string(vocab.size) + "/" + buf, vocab,
                          kDefaultContextLimit);
}

StaticModel StaticModel::from_probs(Vocabulary vocab, std::vector<double> probs) {
  return StaticModel(vocab, std::move(probs), {});
}

StaticModel StaticModel::from_freqs(Vocabulary vocab, std::vector<std::uint32_t> freqs) {
  std::uint64_t total = 0;
  for (auto f : freqs) {
    if (f == 0) throw Error(Errc::InvalidArgument, "static frequencies must be >= 1");
    total += f;
  }
  if (!is_power_of_two(total)) {
    throw Error(Errc::InvalidArgument, "static frequencies must sum to a power of two");
  }
  std::vector<double> probs;
  probs.reserve(freqs.size());
  for (auto f : freqs) probs.push_back(static_cast<double>(f) / static_cast<double>(total));
  return StaticModel(vocab, std::move(probs), std::move(freqs));
}

std::unique_ptr<ModelCursor> StaticModel::open() const {
  return std::make_unique<StaticCursor>(probs_, freqs_);
}

std::vector<double> StaticModel::score(std::span<const TokenId>,
                                       std::span<const TokenId> seq) const {
  std::vector<double> out;
  out.reserve(seq.size());
  for (TokenId t : seq) out.push_back(probs_.at(t));
  return out;
}

// --- adaptive ---------------------------------------------------------------

namespace {

struct ContextCounts {
  std::vector<std::pair<TokenId, std::uint32_t>> counts;
  std::uint32_t total = 0;
};

class AdaptiveCursor final : public ModelCursor {
 public:
  AdaptiveCursor(const Vocabulary& vocab, unsigned order, std::size_t limit)
      : vocab_(vocab),
        order_(order),
        limit_(limit),
        bits_(std::max(1, static_cast<int>(std::bit_width(vocab.size - 1)))),
        counts0_(vocab.size, 0),
        stats_(order) {}

  void push(TokenId t) override {
    window_.push_back(t);
    const std::size_t j = window_.size() - 1;
    for (unsigned m = 0; m <= order_ && m <= j; ++m) update(j, m, +1);
    if (window_.size() > limit_) {
      // Token i loses the order-i observation whose context started at the
      // dropped front token.
      for (unsigned i = 0; i <= order_ && i < window_.size(); ++i) update(i, i, -1);
      window_.pop_front();
    }
  }

  NextTokenDistribution next() override {
    const double n0 = static_cast<double>(total0_);
    const double denom0 = n0 + vocab_.size;
    std::vector<double> p(vocab_.size);
    for (std::size_t s = 0; s < p.size(); ++s) p[s] = (counts0_[s] + 1.0) / denom0;

    const std::size_t j = window_.size();
    for (unsigned m = 1; m <= order_ && m <= j; ++m) {
      const auto& table = stats_[m - 1];
      auto it = table.find(context_key(j, m));
      if (it == table.end() || it->second.total == 0) break;
      const auto& ctx = it->second;
      const double u = static_cast<double>(ctx.counts.size());
      const double denom = static_cast<double>(ctx.total) + u;
      const double keep = u / denom;
      for (auto& v : p) v *= keep;
      for (const auto& [sym, c] : ctx.counts) p[sym] += c / denom;
    }
    return NextTokenDistribution(std::move(p));
  }

 private:
  // Packs window_[j-m .. j-1], most recent token in the low bits.
  std::uint64_t context_key(std::size_t j, unsigned m) const {
    std::uint64_t key = 0;
    for (unsigned i = 1; i <= m; ++i) {
      key |= static_cast<std::uint64_t>(window_[j - i]) << (bits_ * (i - 1));
    }
    return key;
  }

  void update(std::size_t j, unsigned m, int delta) {
    const TokenId sym = window_[j];
    if (sym == vocab_.eos_id) return;
    if (m == 0) {
      counts0_[sym] += delta;
      total0_ += delta;
      return;
    }
    auto& table = stats_[m - 1];
    const std::uint64_t key = context_key(j, m);
    auto& ctx = table[key];
    auto hit = std::find_if(ctx.counts.begin(), ctx.counts.end(),
                            [sym](const auto& e) { return e.first == sym; });
    if (delta > 0) {
      if (hit == ctx.counts.end()) {
        ctx.counts.emplace_back(sym, 1);
      } else {
        ++hit->second;
      }
      ++ctx.total;
    } else {
      // The observation being retired was added when this token arrived.
      if (--hit->second == 0) ctx.counts.erase(hit);
      if (--ctx.total == 0) table.erase(key);
    }
  }

  Vocabulary vocab_;
  unsigned order_;
  std::size_t limit_;
  int bits_;
  std::deque<TokenId> window_;
  std::vector<std::uint32_t> counts0_;
  std::uint64_t total0_ = 0;
  std::vector<std::unordered_map<std::uint64_t, ContextCounts>> stats_;
};

}  // namespace

AdaptiveModel::AdaptiveModel(unsigned order, Vocabulary vocab, std::size_t context_limit)
    : desc_(make_descriptor("builtin:adaptive:" + std::to_string(order) + "/v" +
                                std::to_string(vocab.size) + "/w" +
                                std::to_string(context_limit),
                            vocab, context_limit)),
      order_(order) {
  Vocabulary::make(vocab.size, vocab.eos_id);
  const int bits = std::max(1, static_cast<int>(std::bit_width(vocab.size - 1)));
  if (static_cast<long>(order) * bits > 64) {
    throw Error(Errc::InvalidArgument, "adaptive order " + std::to_string(order) +
                                           " too large for vocabulary of size " +
                                           std::to_string(vocab.size));
  }
}

std::unique_ptr<ModelCursor> AdaptiveModel::open() const {
  return std::make_unique<AdaptiveCursor>(desc_.vocab, order_, desc_.context_limit);
}

}  // namespace infodist
