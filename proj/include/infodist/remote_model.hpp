#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infodist/entropy_model.hpp"
#include "infodist/quantize.hpp"

namespace infodist {

/// Protocol version sent and expected in the X-InfoDist-Protocol header.
inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kProtocolHeader = "X-InfoDist-Protocol";

struct ServerEndpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  /// Sent as "Authorization: Bearer <token>" when nonempty.
  std::string bearer_token;
};

/// Reply to GET /info.
struct ServerInfo {
  std::string model_id;
  Vocabulary vocab;
  std::size_t context_window = 0;
  std::string tokenizer;  // tokenizer fingerprint
  bool distribution = false;
};

struct ScoreResponse {
  Tokens token_ids;
  std::vector<double> logprobs_bits;  // log2 P(token), all <= 0
  std::string model_id;
};

/// Thin JSON-over-HTTP client. Every call is synchronous and self-contained,
/// so one client may be used from several threads at once; each request
/// carries a fresh request_id that the reply must echo.
///
/// Connection failures and 503 replies are retried `retries` times before
/// Unreachable. A 413 reply maps to TooLong, 501 to Unsupported, and any
/// other error reply to ServerFault carrying the server's message.
class RemoteClient {
 public:
  explicit RemoteClient(ServerEndpoint endpoint);

  const ServerEndpoint& endpoint() const noexcept { return endpoint_; }

  ServerInfo info() const;
  Tokens tokenize(std::string_view text) const;
  std::string detokenize(std::span<const TokenId> ids) const;
  /// One /score request; no windowing.
  ScoreResponse score_once(std::span<const TokenId> context,
                           std::span<const TokenId> targets) const;
  QuantizedDistribution distribution(std::span<const TokenId> context,
                                     std::uint32_t total) const;

 private:
  ServerEndpoint endpoint_;
};

/// Scores `seq` after `context`, splitting into sliding windows of the
/// server's context window W with stride W/2 when the combined length
/// exceeds W. Each token is scored in the earliest window containing it,
/// which is the one giving it the most left context.
ScoreResponse score_windowed(const RemoteClient& client, std::size_t context_window,
                             std::span<const TokenId> seq, std::span<const TokenId> context,
                             std::string_view expected_model_id = {});

Tokens remote_tokenize(const ServerEndpoint& ep, std::string_view text);
std::string remote_detokenize(const ServerEndpoint& ep, std::span<const TokenId> ids);
ScoreResponse remote_score(const ServerEndpoint& ep, std::span<const TokenId> seq,
                           std::span<const TokenId> context);
QuantizedDistribution remote_distribution(const ServerEndpoint& ep,
                                          std::span<const TokenId> context,
                                          std::uint32_t total);

/// EntropyModel backed by a probability server. Length estimation goes
/// through /score; coding and rank computation go through /distribution,
/// whose integer frequencies are used as-is.
class RemoteModel final : public EntropyModel {
 public:
  /// Fetches /info. Throws Unreachable if the server cannot be reached.
  explicit RemoteModel(ServerEndpoint endpoint);

  const ModelDescriptor& descriptor() const override { return desc_; }
  const ServerInfo& info() const noexcept { return info_; }
  const RemoteClient& client() const noexcept { return client_; }

  std::unique_ptr<ModelCursor> open() const override;
  std::vector<double> score(std::span<const TokenId> history,
                            std::span<const TokenId> seq) const override;
  Tokens tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> ids) const override;

 private:
  RemoteClient client_;
  ServerInfo info_;
  ModelDescriptor desc_;
};

}  // namespace infodist
