#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "infodist/arith_coder.hpp"
#include "infodist/codelen.hpp"

using namespace infodist;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// C(x | context) under order-0 Laplace, recounted per position.
double laplace_bits(const Tokens& context, const Tokens& x, std::uint32_t vocab, TokenId eos) {
  Tokens hist{eos};
  hist.insert(hist.end(), context.begin(), context.end());
  double bits = 0;
  for (TokenId t : x) {
    bits -= std::log2(oracle::adaptive_probs(hist, 0, vocab, eos, 1u << 20)[t]);
    hist.push_back(t);
  }
  return bits;
}

}  // namespace

TEST_CASE("uniform identity over ten tokens") {
  const UniformModel m;
  const Tokens x = bytes_of("0123456789");
  const auto r = codelen_logprob(m, x);
  CHECK(r.token_count == 10);
  CHECK(r.total_bits == doctest::Approx(10 * std::log2(257.0)).epsilon(1e-12));
}

TEST_CASE("dyadic probabilities sum to five bits") {
  const auto m = StaticModel::from_probs(Vocabulary::make(4, 3), {0.5, 0.25, 0.25, 0.0});
  const auto r = codelen_logprob(m, Tokens{0, 1, 2});
  CHECK(r.per_token_bits == std::vector<double>{1, 2, 2});
  CHECK(r.total_bits == 5);
  CHECK_ERRC(codelen_logprob(m, Tokens{3}), Errc::ZeroProbability);
}

TEST_CASE("adaptive order 0 on aa") {
  const AdaptiveModel m(0, kAbVocab);
  const auto r = codelen_logprob(m, Tokens{0, 0});
  CHECK(r.total_bits == doctest::Approx(laplace_bits({}, {0, 0}, 3, 2)).epsilon(1e-12));
  CHECK(r.total_bits == doctest::Approx(std::log2(3.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("empty x costs nothing") {
  const AdaptiveModel m(2);
  const auto r = codelen_logprob(m, Tokens{});
  CHECK(r.total_bits == 0);
  CHECK(r.token_count == 0);
  CHECK(codelen_logrank(m, Tokens{}).total_bits == 0);
}

TEST_CASE("logrank examples") {
  // A model that always puts the realized token first.
  const auto peaked = StaticModel::from_freqs(kAbVocab, {14, 1, 1});
  CHECK(codelen_logrank(peaked, Tokens{0, 0, 0}).total_bits == 0);

  const UniformModel u(kAbVocab);
  CHECK(codelen_logrank(u, Tokens{0, 0, 0, 0}).total_bits == 0);
  const auto b = codelen_logrank(u, Tokens{1});
  CHECK(b.per_token_bits == std::vector<double>{1.0});
  CHECK(b.total_bits == 1.0);
}

TEST_CASE("property: logrank values are log2 of positive integers") {
  std::mt19937_64 rng(41);
  const AdaptiveModel m(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tokens x = random_tokens(rng, 1 + rng() % 200, 12);
    const auto r = codelen_logrank(m, x);
    for (double b : r.per_token_bits) {
      const double rank = std::exp2(b);
      REQUIRE(b >= 0);
      REQUIRE(std::abs(rank - std::round(rank)) < 1e-9);
    }
    REQUIRE(r.total_bits == doctest::Approx(sum(r.per_token_bits)).epsilon(1e-6));
  }
}

TEST_CASE("modal token has logrank zero") {
  const AdaptiveModel m(1);
  const Tokens hist = bytes_of("aaaaaaaaab");
  const auto d = m.predict(make_history(m.vocab(), hist));
  const auto modal = static_cast<TokenId>(
      std::max_element(d.probs().begin(), d.probs().end()) - d.probs().begin());
  CHECK(codelen_logrank(m, Tokens{modal}, hist).total_bits == 0);
}

TEST_CASE("property: per-token lengths are nonnegative and sum to the total") {
  std::mt19937_64 rng(43);
  const AdaptiveModel m(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Tokens x = random_tokens(rng, rng() % 300, 40);
    const Tokens ctx = random_tokens(rng, rng() % 100, 40);
    const auto r = codelen_logprob(m, x, ctx);
    for (double b : r.per_token_bits) REQUIRE(b >= 0);
    REQUIRE(r.total_bits == doctest::Approx(sum(r.per_token_bits)).epsilon(1e-6));
  }
}

TEST_CASE("uniform model is context-free in both modes") {
  const UniformModel m;
  const Tokens x = bytes_of("hello"), y = bytes_of("world!!"), sep = bytes_of("\n");
  const double lv = std::log2(257.0);
  const auto c = joint_codelen(m, x, y, {JointMode::Conditional, Variant::LogProb, sep, true});
  CHECK(c.c_x_given_y == doctest::Approx(c.c_x));
  CHECK(c.c_y_given_x == doctest::Approx(c.c_y));
  CHECK(c.c_xy == doctest::Approx(c.c_x + c.c_y));
  const auto k = joint_codelen(m, x, y, {JointMode::Concatenation, Variant::LogProb, sep, true});
  CHECK(k.c_x_given_y == doctest::Approx(c.c_x + lv));
  CHECK(k.c_xy == doctest::Approx(c.c_x + c.c_y + lv));
}

TEST_CASE("conditioning on ab shortens ab under order 0") {
  const AdaptiveModel m(0, kAbVocab);
  const Tokens ab{0, 1};
  const auto q = joint_codelen(m, ab, ab, {});
  CHECK(q.c_x == doctest::Approx(laplace_bits({}, ab, 3, 2)).epsilon(1e-12));
  CHECK(q.c_x_given_y == doctest::Approx(laplace_bits(ab, ab, 3, 2)).epsilon(1e-12));
  CHECK(q.c_x_given_y < q.c_x);
}

TEST_CASE("empty operands are refused") {
  const UniformModel m;
  CHECK_ERRC(joint_codelen(m, Tokens{}, Tokens{1}, {}), Errc::EmptyOperand);
  CHECK_ERRC(joint_codelen(m, Tokens{1}, Tokens{}, {}), Errc::EmptyOperand);
}

TEST_CASE("chunk plans split on code points") {
  const std::string text = "a\xC3\xA9" "b\xE2\x82\xAC" "c\xF0\x9F\x98\x80";  // a, e-acute, b, euro sign, c, an emoji
  const auto plan = ChunkPlan::make(text, 2);
  CHECK(plan.boundaries == std::vector<std::size_t>{0, 3, 7, text.size()});
  std::string joined;
  for (std::size_t i = 0; i < plan.chunk_count(); ++i) joined += plan.chunk(text, i);
  CHECK(joined == text);
  // A stray continuation byte counts as one character.
  CHECK(ChunkPlan::make("\x80\x80\x80", 2).boundaries == std::vector<std::size_t>{0, 2, 3});
  CHECK(ChunkPlan::make("", 5).chunk_count() == 0);
  CHECK_ERRC(ChunkPlan::make("abc", 0), Errc::InvalidArgument);
}

TEST_CASE("one chunk equals unchunked scoring") {
  const AdaptiveModel m(2);
  const std::string text = "she sells sea shells by the sea shore";
  const auto r = chunked_codelen(m, text, ChunkPlan::make(text, 1000));
  CHECK(r.total_bits == codelen_logprob(m, bytes_of(text)).total_bits);
  CHECK(r.chunk_totals.size() == 1);
}

TEST_CASE("chunking repetitive text costs context resets") {
  const AdaptiveModel m(2);
  std::string text;
  while (text.size() < 10240) text += "ab";
  const auto one = chunked_codelen(m, text, ChunkPlan::make(text, text.size()));
  const auto two = chunked_codelen(m, text, ChunkPlan::make(text, text.size() / 2));
  CHECK(two.chunk_totals.size() == 2);
  CHECK(two.total_bits >= one.total_bits);
  // Chunk additivity.
  const auto plan = ChunkPlan::make(text, 777);
  const auto many = chunked_codelen(m, text, plan, Variant::LogProb, 3);
  double expect = 0;
  for (std::size_t i = 0; i < plan.chunk_count(); ++i) {
    expect += codelen_logprob(m, bytes_of(plan.chunk(text, i))).total_bits;
  }
  CHECK(many.total_bits == expect);
}

TEST_CASE("uniform ratio does not depend on chunking") {
  const UniformModel m;
  const std::string text(12345, 'q');
  const double ideal = 8.0 / std::log2(257.0);
  for (std::size_t c : {100, 2500, 20000}) {
    const auto r = chunked_codelen(m, text, ChunkPlan::make(text, c));
    REQUIRE(r.ratio.has_value());
    CHECK(*r.ratio == doctest::Approx(ideal).epsilon(1e-12));
  }
}

TEST_CASE("chunk errors carry the chunk index") {
  const UniformModel small(kAbVocab);
  try {
    chunked_codelen(small, "abcd", ChunkPlan::make("abcd", 2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unsupported);
    CHECK(std::string(e.what()).rfind("chunk 0: ", 0) == 0);
  }
  CHECK_ERRC(chunked_codelen(small, "", ChunkPlan{}), Errc::EmptyOperand);
}

TEST_CASE("parallel chunking matches serial") {
  const AdaptiveModel m(2);
  const std::string text = read_data("english_1mb.txt").substr(0, 60000);
  const auto plan = ChunkPlan::make(text);
  const auto a = chunked_codelen(m, text, plan, Variant::LogProb, 1);
  const auto b = chunked_codelen(m, text, plan, Variant::LogProb, 4);
  CHECK(a.chunk_totals == b.chunk_totals);
  CHECK(a.total_bits == b.total_bits);
}

TEST_CASE("property: estimator and coder agree within 34 bits") {
  std::mt19937_64 rng(47);
  const AdaptiveModel m(2);
  for (int trial = 0; trial < 40; ++trial) {
    const Tokens x = random_tokens(rng, rng() % 1500, 1 + rng() % 256);
    // Real-valued estimate plus the EOS the coder appends.
    const double est = quantized_code_length(m, x);
    const double bits = static_cast<double>(encode(m, x).length_bits());
    REQUIRE(std::abs(bits - est) <= 34);
  }
}

TEST_CASE("report JSON layout") {
  const UniformModel m;
  const std::string text = "abc";
  const auto j = chunked_codelen(m, text, ChunkPlan::make(text, 2)).to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"variant", "total_bits", "token_count", "chunk_totals",
                                         "ratio"});
  CHECK(j["variant"] == "logprob");
}
