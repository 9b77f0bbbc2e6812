#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"

#include "infodist/arith_coder.hpp"
#include "infodist/codelen.hpp"
#include "infodist/mock_server.hpp"
#include "infodist/remote_model.hpp"

using namespace infodist;
using nlohmann::json;

namespace {

struct Mock {
  MockServer server;
  ServerEndpoint ep;

  explicit Mock(MockServer::Options o) : server(std::move(o)) {
    server.start();
    ep.base_url = server.base_url();
    ep.timeout = std::chrono::milliseconds(5000);
  }
};

MockServer::Options opts(std::shared_ptr<const EntropyModel> m, std::size_t window = 4096) {
  MockServer::Options o;
  o.model = std::move(m);
  o.context_window = window;
  return o;
}

// A bare server whose handlers the test writes by hand, for replies the mock
// never produces.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  FakeServer() = default;
  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  ServerEndpoint endpoint() const {
    ServerEndpoint ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port);
    ep.retries = 0;
    return ep;
  }
};

void reply(httplib::Response& res, const json& j, bool header = true) {
  if (header) res.set_header(kProtocolHeader, "1");
  res.set_content(j.dump(), "application/json");
}

std::string rid(const httplib::Request& req) {
  return json::parse(req.body).at("request_id").get<std::string>();
}

// log2 P(all[p] | all[start..p)) for the first window that contains p.
std::vector<double> windowed_oracle(const EntropyModel& m, const Tokens& all, std::size_t c,
                                    std::size_t w) {
  const std::size_t s = w / 2;
  std::vector<double> out;
  for (std::size_t p = c; p < all.size(); ++p) {
    const std::size_t j = p < w ? 0 : (p - w) / s + 1;
    const Tokens ctx(all.begin() + static_cast<std::ptrdiff_t>(j * s),
                     all.begin() + static_cast<std::ptrdiff_t>(p));
    out.push_back(std::log2(m.score(ctx, Tokens{all[p]})[0]));
  }
  return out;
}

}  // namespace

TEST_CASE("info, tokenize and detokenize") {
  Mock mock(opts(std::make_shared<AdaptiveModel>(2), 512));
  RemoteClient client(mock.ep);
  const auto info = client.info();
  CHECK(info.model_id == "builtin:adaptive:2/v257/w1024");
  CHECK(info.vocab.size == 257);
  CHECK(info.vocab.eos_id == 256);
  CHECK(info.context_window == 512);
  CHECK(info.tokenizer == "bytes-v1");
  CHECK(info.distribution);

  CHECK(remote_tokenize(mock.ep, "ab") == Tokens{97, 98});
  CHECK(remote_tokenize(mock.ep, "").empty());
  const std::string text = "caf\xC3\xA9\n\ttabs";
  CHECK(remote_detokenize(mock.ep, remote_tokenize(mock.ep, text)) == text);
  CHECK_ERRC(remote_detokenize(mock.ep, Tokens{999}), Errc::ServerFault);
}

TEST_CASE("uniform binary server scores minus one bit per token") {
  Mock mock(opts(std::make_shared<UniformModel>(Vocabulary::make(2, 1))));
  const auto r = remote_score(mock.ep, Tokens{0, 1, 0, 0}, Tokens{});
  CHECK(r.logprobs_bits == std::vector<double>{-1.0, -1.0, -1.0, -1.0});
  CHECK(r.token_ids == Tokens{0, 1, 0, 0});
  CHECK_ERRC(remote_score(mock.ep, Tokens{2}, Tokens{}), Errc::InvalidToken);
}

TEST_CASE("distributions follow the quantization rule") {
  {
    Mock mock(opts(std::make_shared<UniformModel>(Vocabulary::make(4, 3))));
    const auto q = remote_distribution(mock.ep, Tokens{}, 1u << 16);
    CHECK(std::vector<std::uint32_t>(q.freqs().begin(), q.freqs().end()) ==
          std::vector<std::uint32_t>{16384, 16384, 16384, 16384});
  }
  {
    Mock mock(opts(std::make_shared<StaticModel>(
        StaticModel::from_probs(kAbVocab, {0.5, 0.25, 0.25}))));
    const auto q = remote_distribution(mock.ep, Tokens{0}, 1u << 16);
    CHECK(std::vector<std::uint32_t>(q.freqs().begin(), q.freqs().end()) ==
          std::vector<std::uint32_t>{32768, 16384, 16384});
  }
  {
    Mock mock(opts(std::make_shared<StaticModel>(
        StaticModel::from_probs(kAbVocab, {0.6, 0.3, 0.1}))));
    const auto q = remote_distribution(mock.ep, Tokens{}, 1u << 16);
    CHECK(std::vector<std::uint32_t>(q.freqs().begin(), q.freqs().end()) ==
          std::vector<std::uint32_t>{39321, 19661, 6554});
  }
}

TEST_CASE("status codes map to error kinds") {
  auto o = opts(std::make_shared<AdaptiveModel>(1), 8);
  o.distribution = false;
  Mock mock(o);
  RemoteClient client(mock.ep);
  CHECK_ERRC(client.distribution(Tokens{}, 1u << 16), Errc::Unsupported);
  CHECK_ERRC(client.score_once(Tokens(5, 1), Tokens(4, 1)), Errc::TooLong);
  CHECK_ERRC(client.score_once(Tokens{}, Tokens{300}), Errc::ServerFault);
}

TEST_CASE("503 replies are retried") {
  const auto model = std::make_shared<AdaptiveModel>(2);
  const Tokens x = bytes_of("retry me");
  auto o = opts(model);
  Mock clean(o);
  const auto expect = remote_score(clean.ep, x, Tokens{});

  o.fail_first = 2;
  Mock flaky(o);
  flaky.ep.retries = 2;
  // /info absorbs both failures, then /score goes through.
  const auto got = remote_score(flaky.ep, x, Tokens{});
  CHECK(got.logprobs_bits == expect.logprobs_bits);
  CHECK(flaky.server.request_count() == 4);

  o.fail_first = 3;
  Mock down(o);
  down.ep.retries = 2;
  CHECK_ERRC(RemoteClient(down.ep).info(), Errc::Unreachable);
}

TEST_CASE("an unreachable server") {
  int port = 0;
  {
    // Grab a free port and release it again.
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  ServerEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.retries = 1;
  ep.timeout = std::chrono::milliseconds(500);
  CHECK_ERRC(RemoteClient(ep).info(), Errc::Unreachable);
  CHECK_ERRC(RemoteModel{ep}, Errc::Unreachable);
}

TEST_CASE("endpoint checks") {
  ServerEndpoint ep;
  ep.retries = -1;
  CHECK_ERRC(RemoteClient{ep}, Errc::InvalidArgument);
  ep.retries = 0;
  ep.timeout = std::chrono::milliseconds(0);
  CHECK_ERRC(RemoteClient{ep}, Errc::InvalidArgument);
  ep.timeout = std::chrono::milliseconds(10);
  ep.base_url = "http://example.invalid///";
  CHECK(RemoteClient(ep).endpoint().base_url == "http://example.invalid");
}

TEST_CASE("wire format seen by a raw client") {
  Mock mock(opts(std::make_shared<AdaptiveModel>(2)));
  httplib::Client cli(mock.ep.base_url);
  const httplib::Headers h{{kProtocolHeader, "1"}};

  auto res = cli.Post("/score", h,
                      json{{"request_id", "abc-1"}, {"context_ids", {97}}, {"target_ids", {98, 99}}}
                          .dump(),
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value(kProtocolHeader) == "1");
  const json j = json::parse(res->body);
  CHECK(j["request_id"] == "abc-1");
  CHECK(j["logprobs_bits"].size() == 2);
  CHECK(j["model_id"] == "builtin:adaptive:2/v257/w1024");

  res = cli.Post("/score", json{{"request_id", "x"}, {"context_ids", json::array()},
                                {"target_ids", {1}}}.dump(),
                 "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Post("/score", h, "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["code"] == "ParseError");
}

TEST_CASE("malformed replies are server faults") {
  FakeServer fake;
  fake.server.Get("/info", [](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"model_id", "m"}, {"vocab_size", 4}, {"eos_id", 7}, {"context_window", 10}});
  });
  fake.server.Post("/tokenize", [](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"request_id", "someone-else"}, {"ids", {1}}});
  });
  fake.server.Post("/detokenize", [](const httplib::Request& req, httplib::Response& res) {
    reply(res, {{"request_id", rid(req)}, {"text", "x"}}, false);
  });
  fake.server.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
    const auto n = json::parse(req.body)["target_ids"].size();
    if (n == 1) {
      reply(res, {{"request_id", rid(req)}, {"logprobs_bits", {0.5}}});
    } else {
      reply(res, {{"request_id", rid(req)}, {"logprobs_bits", {-1.0}}});
    }
  });
  fake.server.Post("/distribution", [](const httplib::Request& req, httplib::Response& res) {
    if (json::parse(req.body)["total"] == 16) {
      res.status = 500;
      res.set_content(R"({"error":{"code":"Internal","message":"boom"}})", "application/json");
      return;
    }
    reply(res, {{"request_id", rid(req)}, {"freqs", {1, 1}}});
  });
  fake.start();
  RemoteClient client(fake.endpoint());

  CHECK_ERRC(client.info(), Errc::ServerFault);
  CHECK_ERRC(client.tokenize("a"), Errc::ServerFault);
  CHECK_ERRC(client.detokenize(Tokens{1}), Errc::ServerFault);
  CHECK_ERRC(client.score_once(Tokens{}, Tokens{1}), Errc::ServerFault);
  CHECK_ERRC(client.score_once(Tokens{}, Tokens{1, 2}), Errc::ServerFault);
  CHECK_ERRC(client.distribution(Tokens{}, 1u << 16), Errc::ServerFault);
  try {
    client.distribution(Tokens{}, 16);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ServerFault);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

TEST_CASE("a bearer token is sent when configured") {
  FakeServer fake;
  std::string seen;
  fake.server.Get("/info", [&seen](const httplib::Request& req, httplib::Response& res) {
    seen = req.get_header_value("Authorization");
    reply(res, {{"model_id", "m"}, {"vocab_size", 4}, {"eos_id", 3}, {"context_window", 10}});
  });
  fake.start();
  auto ep = fake.endpoint();
  ep.bearer_token = "s3cret";
  const auto info = RemoteClient(ep).info();
  CHECK(seen == "Bearer s3cret");
  CHECK_FALSE(info.distribution);
  CHECK(info.tokenizer.empty());
}

TEST_CASE("a changed model id is detected") {
  Mock mock(opts(std::make_shared<AdaptiveModel>(2)));
  RemoteModel m(mock.ep);
  const Tokens x = bytes_of("abc");
  CHECK_NOTHROW(m.score(make_history(m.vocab(), {}), x));
  mock.server.set_model_id("swapped-model");
  CHECK_ERRC(m.score(make_history(m.vocab(), {}), x), Errc::ModelMismatch);
  // A fresh session picks up the new id.
  CHECK(remote_score(mock.ep, x, Tokens{}).model_id == "swapped-model");
}

TEST_CASE("property: windowed scoring matches the window oracle") {
  std::mt19937_64 rng(71);
  const auto model = std::make_shared<AdaptiveModel>(2);
  for (std::size_t w : {3, 8, 17}) {
    Mock mock(opts(model, w));
    RemoteClient client(mock.ep);
    for (int trial = 0; trial < 8; ++trial) {
      const Tokens ctx = random_tokens(rng, rng() % 30, 5);
      const Tokens seq = random_tokens(rng, 1 + rng() % 40, 5);
      Tokens all = ctx;
      all.insert(all.end(), seq.begin(), seq.end());
      const auto got = score_windowed(client, w, seq, ctx);
      const auto expect = windowed_oracle(*model, all, ctx.size(), w);
      REQUIRE(got.logprobs_bits.size() == seq.size());
      for (std::size_t i = 0; i < seq.size(); ++i) {
        REQUIRE(std::abs(got.logprobs_bits[i] - expect[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("remote lengths agree with the in-process model") {
  const auto model = std::make_shared<AdaptiveModel>(2);
  Mock mock(opts(model));
  const RemoteModel remote(mock.ep);
  CHECK(remote.descriptor().model_id == "remote:builtin:adaptive:2/v257/w1024#bytes-v1");
  CHECK(remote.descriptor().context_limit == 4096);
  const Tokens x = remote.tokenize("the cat sat on the mat");
  const Tokens y = remote.tokenize("a cat on a mat");
  const auto local = codelen_logprob(*model, x, y);
  const auto far = codelen_logprob(remote, x, y);
  CHECK(far.total_bits == doctest::Approx(local.total_bits).epsilon(1e-12));
  CHECK(std::abs(far.total_bits - local.total_bits) < 1e-9);
  // Conditioning changes the answer the same way on both sides.
  const auto far_uncond = codelen_logprob(remote, x);
  CHECK(std::abs(far_uncond.total_bits - codelen_logprob(*model, x).total_bits) < 1e-9);
  CHECK(far_uncond.total_bits != doctest::Approx(far.total_bits));
}

TEST_CASE("coding through the distribution endpoint") {
  const auto model = std::make_shared<AdaptiveModel>(2);
  Mock mock(opts(model));
  const RemoteModel remote(mock.ep);
  const Tokens x = bytes_of("abracadabra, abracadabra");
  const auto s = encode(remote, x);
  CHECK(s == encode(*model, x));
  CHECK(decode(remote, s) == x);
  CHECK(codelen_logrank(remote, x).total_bits == codelen_logrank(*model, x).total_bits);

  auto o = opts(model);
  o.distribution = false;
  Mock scorer(o);
  const RemoteModel limited(scorer.ep);
  CHECK_ERRC(encode(limited, x), Errc::Unsupported);
  CHECK_NOTHROW(codelen_logprob(limited, x));
}

TEST_CASE("retried distribution requests give identical payloads") {
  const auto model = std::make_shared<AdaptiveModel>(2);
  auto o = opts(model);
  Mock clean(o);
  RemoteClient a(clean.ep);
  o.fail_first = 2;
  Mock flaky(o);
  RemoteClient b(flaky.ep);
  const Tokens ctx = bytes_of("context");
  CHECK(a.distribution(ctx, 1u << 16) == b.distribution(ctx, 1u << 16));
}
