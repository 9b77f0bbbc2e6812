#include "infodist/remote_model.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "infodist/error.hpp"

namespace infodist {

using nlohmann::json;

namespace {

std::atomic<std::uint64_t> g_request_counter{0};

std::string next_request_id() {
  return "req-" + std::to_string(++g_request_counter);
}

std::string dump_strict(const json& j) {
  try {
    return j.dump();
  } catch (const json::type_error& e) {
    throw Error(Errc::InvalidArgument, std::string("request is not valid UTF-8: ") + e.what());
  }
}

std::string error_message(const std::string& body) {
  try {
    const json j = json::parse(body);
    if (j.contains("error") && j["error"].contains("message")) {
      return j["error"]["message"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return body.empty() ? "no message" : body;
}

// Sends one request, retrying connection failures and 503s.
json call(const ServerEndpoint& ep, const std::string& path, const json* body) {
  const httplib::Headers headers{{kProtocolHeader, std::to_string(kProtocolVersion)}};
  const std::string payload = body ? dump_strict(*body) : std::string();
  std::string last_problem;
  for (int attempt = 0; attempt <= ep.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(20 * attempt));
    httplib::Client cli(ep.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    if (!ep.bearer_token.empty()) cli.set_bearer_token_auth(ep.bearer_token);

    auto res = body ? cli.Post(path, headers, payload, "application/json")
                    : cli.Get(path, headers);
    if (!res) {
      last_problem = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 503) {
      last_problem = "503 " + error_message(res->body);
      continue;
    }
    if (res->status == 413) throw Error(Errc::TooLong, error_message(res->body));
    if (res->status == 501) throw Error(Errc::Unsupported, error_message(res->body));
    if (res->status != 200) {
      throw Error(Errc::ServerFault,
                  path + " returned " + std::to_string(res->status) + ": " +
                      error_message(res->body));
    }
    if (res->get_header_value(kProtocolHeader) != std::to_string(kProtocolVersion)) {
      throw Error(Errc::ServerFault, path + " reply lacks protocol version " +
                                         std::to_string(kProtocolVersion));
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(Errc::ServerFault, path + " reply is not JSON: " + e.what());
    }
    if (body && body->contains("request_id") &&
        reply.value("request_id", std::string()) != (*body)["request_id"].get<std::string>()) {
      throw Error(Errc::ServerFault, path + " reply does not echo the request id");
    }
    return reply;
  }
  throw Error(Errc::Unreachable, ep.base_url + path + " failed after " +
                                     std::to_string(ep.retries + 1) +
                                     " attempts: " + last_problem);
}

template <class T>
T field(const json& j, const char* name, const char* path) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::ServerFault,
                std::string(path) + " reply has a bad '" + name + "' field: " + e.what());
  }
}

json ids_json(std::span<const TokenId> ids) { return json(std::vector<TokenId>(ids.begin(), ids.end())); }

}  // namespace

RemoteClient::RemoteClient(ServerEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.retries < 0) throw Error(Errc::InvalidArgument, "retries must be >= 0");
  if (endpoint_.timeout.count() <= 0) throw Error(Errc::InvalidArgument, "timeout must be > 0");
  while (!endpoint_.base_url.empty() && endpoint_.base_url.back() == '/') {
    endpoint_.base_url.pop_back();
  }
}

ServerInfo RemoteClient::info() const {
  const json j = call(endpoint_, "/info", nullptr);
  ServerInfo info;
  info.model_id = field<std::string>(j, "model_id", "/info");
  try {
    info.vocab = Vocabulary::make(field<std::uint32_t>(j, "vocab_size", "/info"),
                                  field<TokenId>(j, "eos_id", "/info"));
  } catch (const Error& e) {
    throw Error(Errc::ServerFault, std::string("/info: ") + e.what());
  }
  info.context_window = field<std::size_t>(j, "context_window", "/info");
  if (info.context_window < 1) throw Error(Errc::ServerFault, "/info: context_window < 1");
  info.tokenizer = j.value("tokenizer", std::string());
  info.distribution = j.value("distribution", false);
  return info;
}

Tokens RemoteClient::tokenize(std::string_view text) const {
  const json req{{"request_id", next_request_id()}, {"text", std::string(text)}};
  return field<Tokens>(call(endpoint_, "/tokenize", &req), "ids", "/tokenize");
}

std::string RemoteClient::detokenize(std::span<const TokenId> ids) const {
  const json req{{"request_id", next_request_id()}, {"ids", ids_json(ids)}};
  return field<std::string>(call(endpoint_, "/detokenize", &req), "text", "/detokenize");
}

ScoreResponse RemoteClient::score_once(std::span<const TokenId> context,
                                       std::span<const TokenId> targets) const {
  const json req{{"request_id", next_request_id()},
                 {"context_ids", ids_json(context)},
                 {"target_ids", ids_json(targets)}};
  const json j = call(endpoint_, "/score", &req);
  ScoreResponse r;
  r.token_ids.assign(targets.begin(), targets.end());
  r.logprobs_bits = field<std::vector<double>>(j, "logprobs_bits", "/score");
  r.model_id = j.value("model_id", std::string());
  if (r.logprobs_bits.size() != targets.size()) {
    throw Error(Errc::ServerFault, "/score returned " + std::to_string(r.logprobs_bits.size()) +
                                       " values for " + std::to_string(targets.size()) +
                                       " targets");
  }
  for (double lp : r.logprobs_bits) {
    if (!(lp <= 0.0)) throw Error(Errc::ServerFault, "/score returned a positive log-probability");
  }
  return r;
}

QuantizedDistribution RemoteClient::distribution(std::span<const TokenId> context,
                                                 std::uint32_t total) const {
  const json req{{"request_id", next_request_id()},
                 {"context_ids", ids_json(context)},
                 {"total", total}};
  const json j = call(endpoint_, "/distribution", &req);
  try {
    return QuantizedDistribution(field<std::vector<std::uint32_t>>(j, "freqs", "/distribution"),
                                 total);
  } catch (const Error& e) {
    if (e.code() == Errc::ServerFault) throw;
    throw Error(Errc::ServerFault, std::string("/distribution: ") + e.what());
  }
}

ScoreResponse score_windowed(const RemoteClient& client, std::size_t context_window,
                             std::span<const TokenId> seq, std::span<const TokenId> context,
                             std::string_view expected_model_id) {
  ScoreResponse out;
  out.token_ids.assign(seq.begin(), seq.end());
  if (seq.empty()) return out;
  if (context_window == 0) throw Error(Errc::TooLong, "server context window is zero");

  auto check_model = [&](const ScoreResponse& r) {
    if (!expected_model_id.empty() && !r.model_id.empty() && r.model_id != expected_model_id) {
      throw Error(Errc::ModelMismatch, "server now serves '" + r.model_id + "', session uses '" +
                                           std::string(expected_model_id) + "'");
    }
    if (out.model_id.empty()) out.model_id = r.model_id;
  };

  const std::size_t c = context.size();
  const std::size_t n = seq.size();
  const std::size_t w = context_window;
  if (c + n <= w) {
    ScoreResponse r = client.score_once(context, seq);
    check_model(r);
    out.logprobs_bits = std::move(r.logprobs_bits);
    return out;
  }

  Tokens all(context.begin(), context.end());
  all.insert(all.end(), seq.begin(), seq.end());
  const std::size_t stride = std::max<std::size_t>(1, w / 2);
  out.logprobs_bits.reserve(n);
  for (std::size_t j = 0;; ++j) {
    const std::size_t start = j * stride;
    // Positions first covered by window j.
    const std::size_t own_lo = j == 0 ? 0 : start + (w - stride);
    const std::size_t own_hi = start + w;
    if (own_lo >= c + n) break;
    const std::size_t lo = std::max(own_lo, c);
    const std::size_t hi = std::min(own_hi, c + n);
    if (lo >= hi) continue;
    std::span<const TokenId> view(all);
    ScoreResponse r = client.score_once(view.subspan(start, lo - start), view.subspan(lo, hi - lo));
    check_model(r);
    out.logprobs_bits.insert(out.logprobs_bits.end(), r.logprobs_bits.begin(),
                             r.logprobs_bits.end());
  }
  return out;
}

Tokens remote_tokenize(const ServerEndpoint& ep, std::string_view text) {
  return RemoteClient(ep).tokenize(text);
}

std::string remote_detokenize(const ServerEndpoint& ep, std::span<const TokenId> ids) {
  return RemoteClient(ep).detokenize(ids);
}

ScoreResponse remote_score(const ServerEndpoint& ep, std::span<const TokenId> seq,
                           std::span<const TokenId> context) {
  RemoteClient client(ep);
  const ServerInfo info = client.info();
  validate_tokens(context, info.vocab);
  validate_tokens(seq, info.vocab);
  return score_windowed(client, info.context_window, seq, context, info.model_id);
}

QuantizedDistribution remote_distribution(const ServerEndpoint& ep,
                                          std::span<const TokenId> context,
                                          std::uint32_t total) {
  return RemoteClient(ep).distribution(context, total);
}

// --- model ------------------------------------------------------------------

namespace {

class RemoteCursor final : public ModelCursor {
 public:
  explicit RemoteCursor(const RemoteModel& model) : model_(model) {}

  void push(TokenId t) override {
    history_.push_back(t);
    const std::size_t limit = model_.descriptor().context_limit;
    // Trim in blocks so the history buffer stays amortized O(1) per push.
    if (history_.size() >= 2 * limit) {
      history_.erase(history_.begin(),
                     history_.begin() + static_cast<std::ptrdiff_t>(history_.size() - limit));
    }
  }

  NextTokenDistribution next() override {
    const std::uint32_t total = 1u << kMaxTotalLog2;
    const QuantizedDistribution q = next_quantized(total);
    std::vector<double> probs;
    probs.reserve(q.size());
    for (auto f : q.freqs()) probs.push_back(static_cast<double>(f) / total);
    return NextTokenDistribution(std::move(probs));
  }

  QuantizedDistribution next_quantized(std::uint32_t total) override {
    if (!model_.info().distribution) {
      throw Error(Errc::Unsupported, "server '" + model_.info().model_id +
                                         "' does not serve full distributions");
    }
    std::span<const TokenId> ctx(history_);
    const std::size_t limit = model_.descriptor().context_limit;
    if (ctx.size() > limit) ctx = ctx.last(limit);
    QuantizedDistribution q = model_.client().distribution(ctx, total);
    if (q.size() != model_.vocab().size) {
      throw Error(Errc::ServerFault, "/distribution size differs from the vocabulary");
    }
    return q;
  }

 private:
  const RemoteModel& model_;
  Tokens history_;
};

}  // namespace

RemoteModel::RemoteModel(ServerEndpoint endpoint)
    : client_(std::move(endpoint)), info_(client_.info()) {
  desc_.model_id = "remote:" + info_.model_id;
  if (!info_.tokenizer.empty()) desc_.model_id += "#" + info_.tokenizer;
  desc_.vocab = info_.vocab;
  desc_.deterministic = true;
  desc_.context_limit = info_.context_window;
}

std::unique_ptr<ModelCursor> RemoteModel::open() const {
  return std::make_unique<RemoteCursor>(*this);
}

std::vector<double> RemoteModel::score(std::span<const TokenId> history,
                                       std::span<const TokenId> seq) const {
  const ScoreResponse r =
      score_windowed(client_, info_.context_window, seq, history, info_.model_id);
  std::vector<double> probs;
  probs.reserve(r.logprobs_bits.size());
  for (double lp : r.logprobs_bits) probs.push_back(std::exp2(lp));
  return probs;
}

Tokens RemoteModel::tokenize(std::string_view text) const {
  Tokens ids = client_.tokenize(text);
  try {
    validate_tokens(ids, vocab());
  } catch (const Error& e) {
    throw Error(Errc::ServerFault, std::string("/tokenize: ") + e.what());
  }
  return ids;
}

std::string RemoteModel::detokenize(std::span<const TokenId> ids) const {
  return client_.detokenize(ids);
}

}  // namespace infodist
