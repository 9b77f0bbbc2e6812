#include "infodist/codelen.hpp"

#include <cmath>
#include <string>

#include "infodist/error.hpp"
#include "infodist/parallel.hpp"

namespace infodist {

std::string_view to_string(Variant v) noexcept {
  return v == Variant::LogProb ? "logprob" : "logrank";
}

std::string_view to_string(JointMode m) noexcept {
  return m == JointMode::Conditional ? "conditional" : "concatenation";
}

Variant parse_variant(std::string_view s) {
  if (s == "logprob" || s == "LogProb") return Variant::LogProb;
  if (s == "logrank" || s == "LogRank") return Variant::LogRank;
  throw Error(Errc::InvalidArgument, "unknown variant '" + std::string(s) +
                                         "' (expected logprob or logrank)");
}

JointMode parse_joint_mode(std::string_view s) {
  if (s == "conditional" || s == "Conditional") return JointMode::Conditional;
  if (s == "concatenation" || s == "Concatenation") return JointMode::Concatenation;
  throw Error(Errc::InvalidArgument, "unknown mode '" + std::string(s) +
                                         "' (expected conditional or concatenation)");
}

nlohmann::ordered_json CodeLengthReport::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = to_string(variant);
  j["total_bits"] = total_bits;
  j["token_count"] = token_count;
  j["chunk_totals"] = chunk_totals;
  if (ratio) j["ratio"] = *ratio;
  return j;
}

namespace {

CodeLengthReport finish_report(Variant variant, std::vector<double> bits) {
  CodeLengthReport r;
  r.variant = variant;
  r.token_count = bits.size();
  for (double b : bits) r.total_bits += b;
  r.per_token_bits = std::move(bits);
  return r;
}

}  // namespace

CodeLengthReport codelen_logprob(const EntropyModel& model, std::span<const TokenId> x,
                                 std::span<const TokenId> context) {
  const std::vector<double> probs = score_sequence(model, x, context);
  std::vector<double> bits;
  bits.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) {
      throw Error(Errc::ZeroProbability, "model '" + model.descriptor().model_id +
                                             "' gave zero probability to token " +
                                             std::to_string(i));
    }
    bits.push_back(probs[i] >= 1.0 ? 0.0 : -std::log2(probs[i]));
  }
  return finish_report(Variant::LogProb, std::move(bits));
}

CodeLengthReport codelen_logrank(const EntropyModel& model, std::span<const TokenId> x,
                                 std::span<const TokenId> context) {
  validate_tokens(context, model.vocab());
  validate_tokens(x, model.vocab());
  const Tokens history = make_history(model.vocab(), context);
  std::span<const TokenId> recent = history;
  const std::size_t limit = model.descriptor().context_limit;
  if (recent.size() > limit) recent = recent.last(limit);

  auto cursor = model.open();
  for (TokenId t : recent) cursor->push(t);
  std::vector<double> bits;
  bits.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const NextTokenDistribution dist = cursor->next();
    if (!(dist[x[i]] > 0.0)) {
      throw Error(Errc::ZeroProbability, "model '" + model.descriptor().model_id +
                                             "' gave zero probability to token " +
                                             std::to_string(i));
    }
    bits.push_back(std::log2(static_cast<double>(dist.rank_of(x[i]))));
    cursor->push(x[i]);
  }
  return finish_report(Variant::LogRank, std::move(bits));
}

CodeLengthReport codelen(const EntropyModel& model, std::span<const TokenId> x,
                         std::span<const TokenId> context, Variant variant) {
  return variant == Variant::LogProb ? codelen_logprob(model, x, context)
                                     : codelen_logrank(model, x, context);
}

namespace {

Tokens join(std::span<const TokenId> a, std::span<const TokenId> sep,
            std::span<const TokenId> b) {
  Tokens out;
  out.reserve(a.size() + sep.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), sep.begin(), sep.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

LengthQuintuple joint_codelen(const EntropyModel& model, std::span<const TokenId> x,
                              std::span<const TokenId> y, const JointOptions& options) {
  if (x.empty() || y.empty()) {
    throw Error(Errc::EmptyOperand, std::string(x.empty() ? "x" : "y") +
                                        " is empty; conditional lengths need both operands");
  }
  const Variant v = options.variant;
  const auto& sep = options.separator;
  LengthQuintuple q;
  q.variant = v;
  q.mode = options.mode;
  q.c_x = codelen(model, x, {}, v).total_bits;
  q.c_y = codelen(model, y, {}, v).total_bits;

  if (options.mode == JointMode::Conditional) {
    q.c_x_given_y = codelen(model, x, join(y, sep, {}), v).total_bits;
    q.c_y_given_x = codelen(model, y, join(x, sep, {}), v).total_bits;
    q.c_xy = q.c_x + q.c_y_given_x;
    return q;
  }

  const double xy = codelen(model, join(x, sep, y), {}, v).total_bits;
  const double yx = codelen(model, join(y, sep, x), {}, v).total_bits;
  q.c_x_given_y = yx - q.c_y;
  q.c_y_given_x = xy - q.c_x;
  q.c_xy = options.symmetrize_joint ? (xy + yx) / 2.0 : xy;
  return q;
}

namespace {

// Byte length of the character starting at text[pos].
std::size_t char_length(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t want = 1;
  if ((lead >> 5) == 0x6) want = 2;
  else if ((lead >> 4) == 0xE) want = 3;
  else if ((lead >> 3) == 0x1E) want = 4;
  if (pos + want > text.size()) return 1;
  for (std::size_t i = 1; i < want; ++i) {
    if ((static_cast<unsigned char>(text[pos + i]) >> 6) != 0x2) return 1;
  }
  return want;
}

}  // namespace

ChunkPlan ChunkPlan::make(std::string_view text, std::size_t chunk_chars) {
  if (chunk_chars == 0) throw Error(Errc::InvalidArgument, "chunk_chars must be positive");
  ChunkPlan plan;
  plan.chunk_chars = chunk_chars;
  if (text.empty()) return plan;
  plan.boundaries.push_back(0);
  std::size_t chars = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    if (chars == chunk_chars) {
      plan.boundaries.push_back(pos);
      chars = 0;
    }
    pos += char_length(text, pos);
    ++chars;
  }
  plan.boundaries.push_back(text.size());
  return plan;
}

CodeLengthReport chunked_codelen(const EntropyModel& model, std::string_view text,
                                 const ChunkPlan& plan, Variant variant, unsigned jobs) {
  if (text.empty()) throw Error(Errc::EmptyOperand, "cannot measure an empty text");
  if (plan.boundaries.empty() || plan.boundaries.front() != 0 ||
      plan.boundaries.back() != text.size()) {
    throw Error(Errc::InvalidArgument, "chunk plan does not cover the text");
  }
  const std::size_t n = plan.chunk_count();
  std::vector<CodeLengthReport> parts(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      const Tokens ids = model.tokenize(plan.chunk(text, i));
      parts[i] = codelen(model, ids, {}, variant);
    } catch (const Error& e) {
      throw Error(e.code(), "chunk " + std::to_string(i) + ": " + e.what());
    }
  });

  CodeLengthReport r;
  r.variant = variant;
  for (auto& p : parts) {
    r.chunk_totals.push_back(p.total_bits);
    r.total_bits += p.total_bits;
    r.token_count += p.token_count;
    r.per_token_bits.insert(r.per_token_bits.end(), p.per_token_bits.begin(),
                            p.per_token_bits.end());
  }
  if (r.total_bits > 0.0) r.ratio = 8.0 * static_cast<double>(text.size()) / r.total_bits;
  return r;
}

}  // namespace infodist
