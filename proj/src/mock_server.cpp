#include "infodist/mock_server.hpp"

#include <cmath>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

#include "infodist/error.hpp"
#include "infodist/remote_model.hpp"

namespace infodist {

using nlohmann::json;

namespace {

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(),
                  "application/json");
}

int status_for(Errc code) {
  switch (code) {
    case Errc::TooLong: return 413;
    case Errc::Unsupported: return 501;
    case Errc::InvalidToken:
    case Errc::InvalidArgument:
    case Errc::ParseError: return 400;
    default: return 500;
  }
}

}  // namespace

MockServer::MockServer(Options options) : opts_(std::move(options)) {
  if (!opts_.model) throw Error(Errc::InvalidArgument, "mock server needs a model");
  if (opts_.context_window == 0) throw Error(Errc::InvalidArgument, "context_window must be > 0");
  if (opts_.model_id.empty()) opts_.model_id = opts_.model->descriptor().model_id;
  failures_left_ = opts_.fail_first;
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

MockServer::~MockServer() { stop(); }

std::string MockServer::model_id() const {
  std::lock_guard lock(id_mutex_);
  return opts_.model_id;
}

void MockServer::set_model_id(std::string id) {
  std::lock_guard lock(id_mutex_);
  opts_.model_id = std::move(id);
}

void MockServer::install_routes() {
  const std::string version = std::to_string(kProtocolVersion);
  const auto& model = *opts_.model;

  // Wraps a handler with request counting, failure injection, the version
  // header and JSON error replies.
  auto wrap = [this, version](auto body) {
    return [this, version, body](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      res.set_header(kProtocolHeader, version);
      int left = failures_left_.load();
      while (left > 0 && !failures_left_.compare_exchange_weak(left, left - 1)) {
      }
      if (left > 0) {
        reply_error(res, 503, "Unavailable", "injected failure");
        return;
      }
      if (req.get_header_value(kProtocolHeader) != version) {
        reply_error(res, 400, "ProtocolMismatch", "expected protocol version " + version);
        return;
      }
      try {
        json in = req.body.empty() ? json::object() : json::parse(req.body);
        json out = body(in);
        if (in.contains("request_id")) out["request_id"] = in["request_id"];
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        reply_error(res, status_for(e.code()), std::string(errc_name(e.code())), e.what());
      } catch (const json::exception& e) {
        reply_error(res, 400, "ParseError", e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what());
      }
    };
  };

  server_->Get("/info", wrap([this, &model](const json&) {
                 return json{{"model_id", model_id()},
                             {"vocab_size", model.vocab().size},
                             {"eos_id", model.vocab().eos_id},
                             {"context_window", opts_.context_window},
                             {"tokenizer", opts_.tokenizer},
                             {"distribution", opts_.distribution}};
               }));

  server_->Post("/tokenize", wrap([&model](const json& in) {
                  return json{{"ids", model.tokenize(in.at("text").get<std::string>())}};
                }));

  server_->Post("/detokenize", wrap([&model](const json& in) {
                  const auto ids = in.at("ids").get<Tokens>();
                  validate_tokens(ids, model.vocab());
                  return json{{"text", model.detokenize(ids)}};
                }));

  server_->Post("/score", wrap([this, &model](const json& in) {
                  const auto ctx = in.at("context_ids").get<Tokens>();
                  const auto tgt = in.at("target_ids").get<Tokens>();
                  if (ctx.size() + tgt.size() > opts_.context_window) {
                    throw Error(Errc::TooLong, std::to_string(ctx.size() + tgt.size()) +
                                                   " tokens exceed the window of " +
                                                   std::to_string(opts_.context_window));
                  }
                  validate_tokens(ctx, model.vocab());
                  validate_tokens(tgt, model.vocab());
                  std::vector<double> bits;
                  bits.reserve(tgt.size());
                  for (double p : model.score(ctx, tgt)) bits.push_back(std::log2(p));
                  return json{{"logprobs_bits", bits}, {"model_id", model_id()}};
                }));

  server_->Post("/distribution", wrap([this, &model](const json& in) {
                  if (!opts_.distribution) {
                    throw Error(Errc::Unsupported, "this server does not serve distributions");
                  }
                  const auto ctx = in.at("context_ids").get<Tokens>();
                  const auto total = in.at("total").get<std::uint32_t>();
                  if (ctx.size() >= opts_.context_window) {
                    throw Error(Errc::TooLong, "context exceeds the window");
                  }
                  validate_tokens(ctx, model.vocab());
                  auto cursor = model.open();
                  for (TokenId t : ctx) cursor->push(t);
                  const QuantizedDistribution q = cursor->next_quantized(total);
                  return json{{"freqs", q.freqs()}, {"model_id", model_id()}};
                }));
}

int MockServer::start(const std::string& host, int port) {
  if (thread_.joinable()) throw Error(Errc::InvalidArgument, "mock server already running");
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw Error(Errc::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::wait() {
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace infodist
