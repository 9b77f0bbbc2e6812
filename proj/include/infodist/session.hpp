#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "infodist/codelen.hpp"
#include "infodist/distance.hpp"
#include "infodist/entropy_model.hpp"

namespace infodist {

/// Parsed form of a model selector:
///   builtin:uniform
///   builtin:adaptive        (order 2)
///   builtin:adaptive:K
///   remote:URL              (remote alone takes the URL from INFODIST_SERVER)
struct ModelSelector {
  enum class Kind { Uniform, Adaptive, Remote };
  Kind kind = Kind::Adaptive;
  unsigned order = 2;
  std::string url;

  static ModelSelector parse(std::string_view text, std::string_view default_server = {});
  std::string to_string() const;
};

std::shared_ptr<const EntropyModel> make_model(const ModelSelector& selector);

/// Settings shared by every command. Flags override the environment, which
/// overrides these defaults.
struct SessionConfig {
  std::string model = "builtin:adaptive:2";
  std::string server;  // used by a bare "remote" selector
  Variant variant = Variant::LogProb;
  Metric metric = Metric::Mean;
  JointMode mode = JointMode::Conditional;
  std::size_t chunk_chars = 2500;
  std::optional<unsigned> total_log2;
  std::string separator = "\n";  // tokenized by the model
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0 = hardware concurrency

  /// Fills model and server from INFODIST_MODEL and INFODIST_SERVER.
  void apply_environment();
  /// Throws InvalidArgument when a field is out of bounds.
  void validate() const;

  ModelSelector selector() const { return ModelSelector::parse(model, server); }
};

}  // namespace infodist
