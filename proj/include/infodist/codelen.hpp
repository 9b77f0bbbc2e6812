#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "infodist/entropy_model.hpp"

namespace infodist {

enum class Variant { LogProb, LogRank };
enum class JointMode { Conditional, Concatenation };

std::string_view to_string(Variant v) noexcept;
std::string_view to_string(JointMode m) noexcept;
Variant parse_variant(std::string_view s);
JointMode parse_joint_mode(std::string_view s);

struct CodeLengthReport {
  Variant variant = Variant::LogProb;
  double total_bits = 0.0;
  std::vector<double> per_token_bits;
  std::uint64_t token_count = 0;
  /// Filled by chunked_codelen only.
  std::vector<double> chunk_totals;
  std::optional<double> ratio;

  /// {variant, total_bits, token_count, chunk_totals, ratio?}
  nlohmann::ordered_json to_json() const;
};

/// -log2 P(x_i | EOS ++ context ++ x_<i) per token. Empty context gives C(x),
/// context y gives C(x|y). Throws ZeroProbability if the model assigns zero
/// mass to a realized token.
CodeLengthReport codelen_logprob(const EntropyModel& model, std::span<const TokenId> x,
                                 std::span<const TokenId> context = {});

/// log2 of each token's 1-indexed rank under descending probability, ties
/// broken by smaller token id.
CodeLengthReport codelen_logrank(const EntropyModel& model, std::span<const TokenId> x,
                                 std::span<const TokenId> context = {});

CodeLengthReport codelen(const EntropyModel& model, std::span<const TokenId> x,
                         std::span<const TokenId> context, Variant variant);

/// The five code lengths every distance metric is built from, in bits.
struct LengthQuintuple {
  double c_x = 0.0;
  double c_y = 0.0;
  double c_x_given_y = 0.0;
  double c_y_given_x = 0.0;
  double c_xy = 0.0;
  Variant variant = Variant::LogProb;
  JointMode mode = JointMode::Conditional;
};

struct JointOptions {
  JointMode mode = JointMode::Conditional;
  Variant variant = Variant::LogProb;
  /// Tokens placed between the conditioning text and the coded text.
  Tokens separator;
  /// Concatenation mode only: report C(xy) as the mean of C(xy) and C(yx).
  bool symmetrize_joint = true;
};

/// Conditional mode: C(x|y) = C(x; context y ++ sep), C(y|x) likewise, and
/// C(xy) = C(x) + C(y|x).
/// Concatenation mode: C(xy) codes x ++ sep ++ y as one stream and the
/// conditionals use the subtraction form C(x|y) = C(yx) - C(y).
/// Throws EmptyOperand when x or y is empty.
LengthQuintuple joint_codelen(const EntropyModel& model, std::span<const TokenId> x,
                              std::span<const TokenId> y, const JointOptions& options);

/// Partition of a text into chunks of at most chunk_chars characters
/// (UTF-8 code points; stray bytes count as one character each). Boundaries
/// are byte offsets, starting at 0 and ending at the text size, and never
/// split a code point.
struct ChunkPlan {
  static constexpr std::size_t kDefaultChunkChars = 2500;

  std::size_t chunk_chars = kDefaultChunkChars;
  std::vector<std::size_t> boundaries;

  static ChunkPlan make(std::string_view text, std::size_t chunk_chars = kDefaultChunkChars);
  std::size_t chunk_count() const noexcept {
    return boundaries.empty() ? 0 : boundaries.size() - 1;
  }
  std::string_view chunk(std::string_view text, std::size_t i) const {
    return text.substr(boundaries[i], boundaries[i + 1] - boundaries[i]);
  }
};

/// Scores every chunk independently with an empty context, `jobs` chunks at
/// a time (0 = hardware concurrency). total_bits is the sum of the chunk
/// totals; ratio = 8 * text bytes / total_bits.
CodeLengthReport chunked_codelen(const EntropyModel& model, std::string_view text,
                                 const ChunkPlan& plan, Variant variant = Variant::LogProb,
                                 unsigned jobs = 1);

}  // namespace infodist
