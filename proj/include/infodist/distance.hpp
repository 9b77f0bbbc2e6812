#pragma once

#include <string_view>

#include "json.hpp"

#include "infodist/codelen.hpp"
#include "infodist/entropy_model.hpp"

namespace infodist {

enum class Metric { Max, Min, Mean };

std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view s);

// All metrics require c_x > 0, c_y > 0 and no negative length; otherwise
// they throw DegenerateInput. Values are never clamped to [0, 1].

/// max{C(x|y), C(y|x)} / max{C(x), C(y)}
double m_max(const LengthQuintuple& q);
/// min{C(x|y), C(y|x)} / min{C(x), C(y)}
double m_min(const LengthQuintuple& q);
/// (C(x|y) + C(y|x)) / (C(x) + C(y))
double m_mean(const LengthQuintuple& q);
/// C(xy) / (C(x) + C(y))
double cdm(const LengthQuintuple& q);

double metric_value(const LengthQuintuple& q, Metric metric);

struct DistanceReport {
  Metric metric = Metric::Mean;
  double value = 0.0;
  double m_max = 0.0;
  double m_min = 0.0;
  double m_mean = 0.0;
  double cdm = 0.0;
  LengthQuintuple quintuple;

  static DistanceReport from(const LengthQuintuple& q, Metric metric);
  nlohmann::ordered_json to_json() const;
};

struct DistanceOptions {
  Metric metric = Metric::Mean;
  JointOptions joint;
};

/// Tokenizes both texts with the model's tokenizer, computes the quintuple
/// and evaluates every metric. Throws EmptyOperand if either text tokenizes
/// to nothing.
DistanceReport distance(const EntropyModel& model, std::string_view x_text,
                        std::string_view y_text, const DistanceOptions& options = {});

}  // namespace infodist
