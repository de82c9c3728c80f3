#include "sentiment/polarity.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include "sentiment/error.hpp"

namespace sentiment {

namespace {

void require_scheme(const ClassCounts& counts, Scheme scheme) {
  if (counts.scheme != scheme) {
    throw Error(ErrorCode::kSchemeMismatch, "expected " + std::string(scheme_name(scheme)) +
                                                " counts, got " +
                                                std::string(scheme_name(counts.scheme)));
  }
  if (counts.total() < 1) {
    throw Error(ErrorCode::kEmptyInput, "empty prediction vector");
  }
}

// Shared by the four- and five-class variants once the neutral gate is passed.
OverallPolarity hierarchical(std::int64_t hneg, std::int64_t neg, std::int64_t pos,
                             std::int64_t hpos, const PolarityThresholds& th) {
  const std::int64_t neg_total = hneg + neg;
  const std::int64_t pos_total = pos + hpos;
  if (th.base_ratio.exceeded_by(neg_total, pos_total)) {
    return th.sub_ratio.exceeded_by(hneg, neg) ? Polarity::kHighlyNegative : Polarity::kNegative;
  }
  if (th.base_ratio.exceeded_by(pos_total, neg_total)) {
    return th.sub_ratio.exceeded_by(hpos, pos) ? Polarity::kHighlyPositive : Polarity::kPositive;
  }
  return Polarity::kNeutral;
}

}  // namespace

Ratio Ratio::parse(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::kConfig, "not a non-negative decimal: '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) throw fail();
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) throw fail();
    seen_digit = true;
    if (num > 100'000'000'000LL || (seen_point && den >= 1'000'000'000LL)) throw fail();
    num = num * 10 + (c - '0');
    if (seen_point) den *= 10;
  }
  if (!seen_digit) throw fail();
  return Ratio{num, den};
}

std::string Ratio::str() const {
  std::ostringstream os;
  os << value();
  return os.str();
}

bool Ratio::exceeded_by(std::int64_t a, std::int64_t b) const {
  return static_cast<__int128>(a) * den > static_cast<__int128>(num) * b;
}

PolarityThresholds PolarityThresholds::parse(std::string_view spec) {
  PolarityThresholds th;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t end = spec.find(',', pos);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "threshold entry needs key=value: '" + std::string(item) + "'");
    }
    const std::string_view key = item.substr(0, eq);
    const Ratio value = Ratio::parse(item.substr(eq + 1));
    if (key == "neu") {
      th.neutral_fraction = value;
    } else if (key == "base") {
      th.base_ratio = value;
    } else if (key == "sub") {
      th.sub_ratio = value;
    } else {
      throw Error(ErrorCode::kConfig, "unknown threshold key '" + std::string(key) + "'");
    }
  }
  th.validate();
  return th;
}

void PolarityThresholds::validate() const {
  if (!(neutral_fraction.num > 0 && neutral_fraction.num < neutral_fraction.den)) {
    throw Error(ErrorCode::kConfig, "neutral fraction must lie in (0, 1)");
  }
  if (base_ratio.num <= base_ratio.den || sub_ratio.num <= sub_ratio.den) {
    throw Error(ErrorCode::kConfig, "ratio thresholds must exceed 1");
  }
}

std::string PolarityThresholds::str() const {
  return "neu=" + neutral_fraction.str() + ",base=" + base_ratio.str() + ",sub=" + sub_ratio.str();
}

OverallPolarity overall_binary(const ClassCounts& counts, const PolarityThresholds& th) {
  require_scheme(counts, Scheme::kBinary);
  const std::int64_t pos = counts.of(Polarity::kPositive);
  const std::int64_t neg = counts.of(Polarity::kNegative);
  if (th.base_ratio.exceeded_by(pos, neg)) return Polarity::kPositive;
  if (th.base_ratio.exceeded_by(neg, pos)) return Polarity::kNegative;
  return Polarity::kNeutral;
}

OverallPolarity overall_three(const ClassCounts& counts, const PolarityThresholds& th) {
  require_scheme(counts, Scheme::kThree);
  const std::int64_t neu = counts.of(Polarity::kNeutral);
  if (th.neutral_fraction.exceeded_by(neu, counts.total())) return Polarity::kNeutral;
  const std::int64_t pos = counts.of(Polarity::kPositive);
  const std::int64_t neg = counts.of(Polarity::kNegative);
  if (th.sub_ratio.exceeded_by(pos, neg)) return Polarity::kPositive;
  if (th.sub_ratio.exceeded_by(neg, pos)) return Polarity::kNegative;
  return Polarity::kNeutral;
}

OverallPolarity overall_four(const ClassCounts& counts, const PolarityThresholds& th) {
  require_scheme(counts, Scheme::kFour);
  return hierarchical(counts.of(Polarity::kHighlyNegative), counts.of(Polarity::kNegative),
                      counts.of(Polarity::kPositive), counts.of(Polarity::kHighlyPositive), th);
}

OverallPolarity overall_five(const ClassCounts& counts, const PolarityThresholds& th) {
  require_scheme(counts, Scheme::kFive);
  if (th.neutral_fraction.exceeded_by(counts.of(Polarity::kNeutral), counts.total())) {
    return Polarity::kNeutral;
  }
  return hierarchical(counts.of(Polarity::kHighlyNegative), counts.of(Polarity::kNegative),
                      counts.of(Polarity::kPositive), counts.of(Polarity::kHighlyPositive), th);
}

OverallPolarity overall_polarity(const ClassCounts& counts, const PolarityThresholds& th) {
  switch (counts.scheme) {
    case Scheme::kBinary: return overall_binary(counts, th);
    case Scheme::kThree: return overall_three(counts, th);
    case Scheme::kFour: return overall_four(counts, th);
    case Scheme::kFive: return overall_five(counts, th);
  }
  throw Error(ErrorCode::kUnsupportedScheme, "unknown scheme");
}

ClassLabel delta_neutralize(double p_negative, double p_positive, double delta) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::kConfig, "delta must be non-negative");
  if (!std::isfinite(p_negative) || !std::isfinite(p_positive) || p_negative < 0.0 ||
      p_positive < 0.0 || std::abs(p_negative + p_positive - 1.0) > 1e-6) {
    throw Error(ErrorCode::kConfig, "probabilities must lie on the 2-simplex");
  }
  if (std::abs(p_positive - p_negative) < delta) {
    return make_label(Scheme::kThree, Polarity::kNeutral);
  }
  return make_label(Scheme::kThree,
                    p_positive > p_negative ? Polarity::kPositive : Polarity::kNegative);
}

}  // namespace sentiment
