#include "infodist/distance.hpp"

#include <algorithm>
#include <string>

#include "infodist/error.hpp"

namespace infodist {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Max: return "max";
    case Metric::Min: return "min";
    case Metric::Mean: return "mean";
  }
  return "mean";
}

Metric parse_metric(std::string_view s) {
  if (s == "max") return Metric::Max;
  if (s == "min") return Metric::Min;
  if (s == "mean") return Metric::Mean;
  throw Error(Errc::InvalidArgument,
              "unknown metric '" + std::string(s) + "' (expected max, min or mean)");
}

namespace {

void check(const LengthQuintuple& q) {
  if (q.c_x_given_y < 0 || q.c_y_given_x < 0 || q.c_xy < 0) {
    throw Error(Errc::DegenerateInput, "negative code length in quintuple");
  }
  if (!(q.c_x > 0) || !(q.c_y > 0)) {
    throw Error(Errc::DegenerateInput,
                "C(x) and C(y) must both be positive to normalize a distance");
  }
}

}  // namespace

double m_max(const LengthQuintuple& q) {
  check(q);
  return std::max(q.c_x_given_y, q.c_y_given_x) / std::max(q.c_x, q.c_y);
}

double m_min(const LengthQuintuple& q) {
  check(q);
  return std::min(q.c_x_given_y, q.c_y_given_x) / std::min(q.c_x, q.c_y);
}

double m_mean(const LengthQuintuple& q) {
  check(q);
  return (q.c_x_given_y + q.c_y_given_x) / (q.c_x + q.c_y);
}

double cdm(const LengthQuintuple& q) {
  check(q);
  return q.c_xy / (q.c_x + q.c_y);
}

double metric_value(const LengthQuintuple& q, Metric metric) {
  switch (metric) {
    case Metric::Max: return m_max(q);
    case Metric::Min: return m_min(q);
    case Metric::Mean: return m_mean(q);
  }
  return m_mean(q);
}

DistanceReport DistanceReport::from(const LengthQuintuple& q, Metric metric) {
  DistanceReport r;
  r.metric = metric;
  r.quintuple = q;
  r.m_max = infodist::m_max(q);
  r.m_min = infodist::m_min(q);
  r.m_mean = infodist::m_mean(q);
  r.cdm = infodist::cdm(q);
  r.value = metric == Metric::Max ? r.m_max : metric == Metric::Min ? r.m_min : r.m_mean;
  return r;
}

nlohmann::ordered_json DistanceReport::to_json() const {
  nlohmann::ordered_json j;
  j["metric"] = to_string(metric);
  j["value"] = value;
  j["variant"] = to_string(quintuple.variant);
  j["mode"] = to_string(quintuple.mode);
  j["c_x"] = quintuple.c_x;
  j["c_y"] = quintuple.c_y;
  j["c_x_given_y"] = quintuple.c_x_given_y;
  j["c_y_given_x"] = quintuple.c_y_given_x;
  j["c_xy"] = quintuple.c_xy;
  j["m_max"] = m_max;
  j["m_min"] = m_min;
  j["m_mean"] = m_mean;
  j["cdm"] = cdm;
  return j;
}

DistanceReport distance(const EntropyModel& model, std::string_view x_text,
                        std::string_view y_text, const DistanceOptions& options) {
  const Tokens x = model.tokenize(x_text);
  const Tokens y = model.tokenize(y_text);
  return DistanceReport::from(joint_codelen(model, x, y, options.joint), options.metric);
}

}  // namespace infodist
