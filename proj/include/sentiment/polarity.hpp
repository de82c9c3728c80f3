#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sentiment/schemes.hpp"

namespace sentiment {

// Non-negative rational, compared exactly against integer counts.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  // Parses a plain decimal such as "1.2" or "0.85" without rounding.
  static Ratio parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  // a > ratio * b, evaluated as a * den > num * b.
  bool exceeded_by(std::int64_t a, std::int64_t b) const;
};

struct PolarityThresholds {
  Ratio neutral_fraction{17, 20};  // 0.85 of all reviews
  Ratio base_ratio{6, 5};          // 1.2 between super classes
  Ratio sub_ratio{3, 2};           // 1.5 between sub classes (and in the three-class gate)

  // "neu=0.85,base=1.2,sub=1.5"; omitted keys keep their defaults.
  static PolarityThresholds parse(std::string_view spec);
  void validate() const;
  std::string str() const;
};

using OverallPolarity = Polarity;

OverallPolarity overall_binary(const ClassCounts& counts, const PolarityThresholds& th = {});
OverallPolarity overall_three(const ClassCounts& counts, const PolarityThresholds& th = {});
OverallPolarity overall_four(const ClassCounts& counts, const PolarityThresholds& th = {});
OverallPolarity overall_five(const ClassCounts& counts, const PolarityThresholds& th = {});

// Dispatches on counts.scheme.
OverallPolarity overall_polarity(const ClassCounts& counts, const PolarityThresholds& th = {});

// Three-class label from a binary probability pair: Neutral when
// |p_positive - p_negative| < delta, otherwise the argmax class.
ClassLabel delta_neutralize(double p_negative, double p_positive, double delta);

}  // namespace sentiment
