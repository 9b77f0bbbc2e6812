#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "infodist/distance.hpp"

using namespace infodist;

namespace {

LengthQuintuple quint(double cx, double cy, double cxy_, double cyx_, double cjoint) {
  LengthQuintuple q;
  q.c_x = cx;
  q.c_y = cy;
  q.c_x_given_y = cxy_;
  q.c_y_given_x = cyx_;
  q.c_xy = cjoint;
  return q;
}

}  // namespace

TEST_CASE("metric formulas on a hand quintuple") {
  const auto q = quint(10, 20, 2, 8, 18);
  CHECK(m_max(q) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(m_min(q) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(m_mean(q) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(cdm(q) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(metric_value(q, Metric::Max) == m_max(q));
  CHECK(metric_value(q, Metric::Min) == m_min(q));
  CHECK(metric_value(q, Metric::Mean) == m_mean(q));
}

TEST_CASE("degenerate quintuples are refused") {
  CHECK_ERRC(m_mean(quint(0, 5, 0, 1, 1)), Errc::DegenerateInput);
  CHECK_ERRC(m_max(quint(5, 0, 1, 0, 1)), Errc::DegenerateInput);
  CHECK_ERRC(m_min(quint(5, 5, -1, 1, 1)), Errc::DegenerateInput);
  CHECK_ERRC(cdm(quint(5, 5, 1, 1, -1)), Errc::DegenerateInput);
  CHECK_ERRC(m_mean(quint(NAN, 5, 1, 1, 1)), Errc::DegenerateInput);
}

TEST_CASE("values above one are not clamped") {
  const auto q = quint(4, 4, 6, 5, 10);
  CHECK(m_max(q) == 1.5);
  CHECK(m_mean(q) == 11.0 / 8);
}

TEST_CASE("metric names") {
  CHECK(parse_metric("max") == Metric::Max);
  CHECK(parse_metric("min") == Metric::Min);
  CHECK(parse_metric("mean") == Metric::Mean);
  CHECK(to_string(Metric::Min) == "min");
  CHECK_ERRC(parse_metric("avg"), Errc::InvalidArgument);
}

TEST_CASE("a context-free model puts every pair at distance one") {
  const UniformModel m;
  for (auto mode : {JointMode::Conditional, JointMode::Concatenation}) {
    DistanceOptions o;
    o.joint.mode = mode;
    const auto r = distance(m, "the cat sat", "quantum flux regulator", o);
    CHECK(r.m_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.m_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.m_mean == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("an adaptive model sees abab as redundant with itself") {
  const AdaptiveModel m(2);
  const auto r = distance(m, "abababab", "abababab");
  CHECK(r.m_max < 1.0);
  CHECK(r.m_mean < 1.0);
}

TEST_CASE("shared content lowers the distance") {
  const AdaptiveModel m(2);
  const std::string doc = "the quick brown fox jumps over the lazy dog near the river bank";
  const auto related = distance(m, "the quick brown fox", doc, {Metric::Min, {}});
  const auto unrelated = distance(m, "the quick brown fox", "0123456789 !@#$%^&*() []{}", {Metric::Min, {}});
  CHECK(related.value < unrelated.value);
  const auto a = distance(m, "the cat sat", "the cat sat on the mat");
  const auto b = distance(m, "the cat sat", "quantum flux regulator");
  CHECK(a.m_mean < b.m_mean);
}

TEST_CASE("property: metrics are symmetric in x and y") {
  std::mt19937_64 rng(53);
  const AdaptiveModel m(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Tokens x = random_tokens(rng, 1 + rng() % 120, 10);
    const Tokens y = random_tokens(rng, 1 + rng() % 120, 10);
    for (auto mode : {JointMode::Conditional, JointMode::Concatenation}) {
      JointOptions o;
      o.mode = mode;
      const auto qxy = joint_codelen(m, x, y, o);
      const auto qyx = joint_codelen(m, y, x, o);
      REQUIRE(m_max(qxy) == m_max(qyx));
      REQUIRE(m_min(qxy) == m_min(qyx));
      REQUIRE(m_mean(qxy) == doctest::Approx(m_mean(qyx)).epsilon(1e-15));
    }
  }
}

TEST_CASE("property: metrics are invariant to scaling all lengths") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.5, 500.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = quint(u(rng), u(rng), u(rng), u(rng), u(rng));
    const double k = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10);
    const auto s = quint(q.c_x * k, q.c_y * k, q.c_x_given_y * k, q.c_y_given_x * k, q.c_xy * k);
    REQUIRE(m_max(s) == m_max(q));
    REQUIRE(m_min(s) == m_min(q));
    REQUIRE(m_mean(s) == m_mean(q));
    REQUIRE(cdm(s) == cdm(q));
  }
}

TEST_CASE("property: concatenation mode gives m_mean = 2 cdm - 1") {
  std::mt19937_64 rng(61);
  const AdaptiveModel m(2);
  JointOptions o;
  o.mode = JointMode::Concatenation;
  o.separator = bytes_of("\n");
  for (int trial = 0; trial < 100; ++trial) {
    const Tokens x = random_tokens(rng, 1 + rng() % 200, 20);
    const Tokens y = random_tokens(rng, 1 + rng() % 200, 20);
    const auto q = joint_codelen(m, x, y, o);
    REQUIRE(std::abs(m_mean(q) - (2 * cdm(q) - 1)) < 1e-9);
  }
}

TEST_CASE("empty texts are refused") {
  const AdaptiveModel m(2);
  CHECK_ERRC(distance(m, "", "abc"), Errc::EmptyOperand);
  CHECK_ERRC(distance(m, "abc", ""), Errc::EmptyOperand);
}

TEST_CASE("report JSON layout") {
  const auto r = DistanceReport::from(quint(10, 20, 2, 8, 18), Metric::Max);
  CHECK(r.value == r.m_max);
  const auto j = r.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"metric", "value", "variant", "mode", "c_x", "c_y",
                                         "c_x_given_y", "c_y_given_x", "c_xy", "m_max", "m_min",
                                         "m_mean", "cdm"});
  CHECK(j["metric"] == "max");
  CHECK(j["mode"] == "conditional");
}
