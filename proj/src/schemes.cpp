#include "sentiment/schemes.hpp"

#include <algorithm>
#include <cctype>

#include "sentiment/error.hpp"

namespace sentiment {

namespace {

constexpr std::array<Polarity, 2> kBinaryClasses = {Polarity::kNegative, Polarity::kPositive};
constexpr std::array<Polarity, 3> kThreeClasses = {Polarity::kNegative, Polarity::kNeutral,
                                                   Polarity::kPositive};
constexpr std::array<Polarity, 4> kFourClasses = {Polarity::kHighlyNegative, Polarity::kNegative,
                                                  Polarity::kPositive, Polarity::kHighlyPositive};
constexpr std::array<Polarity, 5> kFiveClasses = {Polarity::kHighlyNegative, Polarity::kNegative,
                                                  Polarity::kNeutral, Polarity::kPositive,
                                                  Polarity::kHighlyPositive};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool valid_imdb_score(int score) {
  return score >= 1 && score <= 10 && score != 5 && score != 6;
}

}  // namespace

int arity(Scheme scheme) { return static_cast<int>(scheme); }

std::span<const Polarity> classes(Scheme scheme) {
  switch (scheme) {
    case Scheme::kBinary: return kBinaryClasses;
    case Scheme::kThree: return kThreeClasses;
    case Scheme::kFour: return kFourClasses;
    case Scheme::kFive: return kFiveClasses;
  }
  throw Error(ErrorCode::kUnsupportedScheme, "unknown scheme");
}

std::optional<int> class_index(Scheme scheme, Polarity polarity) {
  const auto cls = classes(scheme);
  const auto it = std::find(cls.begin(), cls.end(), polarity);
  if (it == cls.end()) return std::nullopt;
  return static_cast<int>(it - cls.begin());
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kBinary: return "binary";
    case Scheme::kThree: return "three";
    case Scheme::kFour: return "four";
    case Scheme::kFive: return "five";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  const std::string n = lower(name);
  if (n == "binary" || n == "2") return Scheme::kBinary;
  if (n == "three" || n == "3") return Scheme::kThree;
  if (n == "four" || n == "4") return Scheme::kFour;
  if (n == "five" || n == "5") return Scheme::kFive;
  throw Error(ErrorCode::kConfig, "unknown scheme '" + std::string(name) +
                                      "' (expected binary|three|four|five)");
}

std::string_view polarity_name(Polarity polarity) {
  switch (polarity) {
    case Polarity::kHighlyNegative: return "HighlyNegative";
    case Polarity::kNegative: return "Negative";
    case Polarity::kNeutral: return "Neutral";
    case Polarity::kPositive: return "Positive";
    case Polarity::kHighlyPositive: return "HighlyPositive";
  }
  return "?";
}

Polarity parse_polarity(std::string_view name) {
  const std::string n = lower(name);
  if (n == "highlynegative" || n == "highly_negative" || n == "hneg" || n == "hn")
    return Polarity::kHighlyNegative;
  if (n == "negative" || n == "neg" || n == "n") return Polarity::kNegative;
  if (n == "neutral" || n == "neu") return Polarity::kNeutral;
  if (n == "positive" || n == "pos" || n == "p") return Polarity::kPositive;
  if (n == "highlypositive" || n == "highly_positive" || n == "hpos" || n == "hp")
    return Polarity::kHighlyPositive;
  throw Error(ErrorCode::kMalformedRecord, "unknown polarity '" + std::string(name) + "'");
}

ClassLabel make_label(Scheme scheme, Polarity polarity) {
  const auto idx = class_index(scheme, polarity);
  if (!idx) {
    throw Error(ErrorCode::kSchemeMismatch, std::string(polarity_name(polarity)) +
                                                " is not a class of scheme " +
                                                std::string(scheme_name(scheme)));
  }
  return ClassLabel{scheme, *idx};
}

ClassLabel label_at(Scheme scheme, int index) {
  if (index < 0 || index >= arity(scheme)) {
    throw Error(ErrorCode::kSchemeMismatch, "class index " + std::to_string(index) +
                                                " outside scheme " +
                                                std::string(scheme_name(scheme)));
  }
  return ClassLabel{scheme, index};
}

ClassLabel imdb_score_to_label(int score, Scheme scheme) {
  if (scheme == Scheme::kFive) {
    throw Error(ErrorCode::kUnsupportedScheme, "IMDb scores have no five-class mapping");
  }
  if (!valid_imdb_score(score)) {
    throw Error(ErrorCode::kInvalidScore, "invalid IMDb score " + std::to_string(score));
  }
  switch (scheme) {
    case Scheme::kBinary:
      return make_label(scheme, score <= 4 ? Polarity::kNegative : Polarity::kPositive);
    case Scheme::kThree:
      // 4 and 7 are both neutral here even though 4 is negative in the binary scheme.
      if (score <= 3) return make_label(scheme, Polarity::kNegative);
      if (score == 4 || score == 7) return make_label(scheme, Polarity::kNeutral);
      return make_label(scheme, Polarity::kPositive);
    case Scheme::kFour:
      if (score <= 2) return make_label(scheme, Polarity::kHighlyNegative);
      if (score <= 4) return make_label(scheme, Polarity::kNegative);
      if (score <= 8) return make_label(scheme, Polarity::kPositive);
      return make_label(scheme, Polarity::kHighlyPositive);
    case Scheme::kFive:
      break;
  }
  throw Error(ErrorCode::kUnsupportedScheme, "unsupported scheme");
}

std::optional<ClassLabel> amazon_score_to_label(int score, Scheme scheme) {
  if (score < 1 || score > 5) {
    throw Error(ErrorCode::kInvalidScore, "invalid five-star score " + std::to_string(score));
  }
  switch (scheme) {
    case Scheme::kBinary:
      if (score == 3) return std::nullopt;
      return make_label(scheme, score <= 2 ? Polarity::kNegative : Polarity::kPositive);
    case Scheme::kFive:
      return ClassLabel{scheme, score - 1};
    default:
      throw Error(ErrorCode::kUnsupportedScheme,
                  "five-star scores map only to binary or five-class schemes");
  }
}

ClassLabel binary_tree_split(ClassLabel parent, int score) {
  if (parent.scheme != Scheme::kBinary) {
    throw Error(ErrorCode::kSchemeMismatch, "binary tree split expects a binary parent label");
  }
  if (!valid_imdb_score(score)) {
    throw Error(ErrorCode::kInvalidScore, "invalid IMDb score " + std::to_string(score));
  }
  const bool negative_parent = parent.polarity() == Polarity::kNegative;
  if (negative_parent != (score <= 4)) {
    throw Error(ErrorCode::kInconsistentLabel,
                "score " + std::to_string(score) + " contradicts parent label " +
                    std::string(polarity_name(parent.polarity())));
  }
  return imdb_score_to_label(score, Scheme::kFour);
}

ClassLabel coarsen_to_binary(ClassLabel four_class) {
  if (four_class.scheme != Scheme::kFour) {
    throw Error(ErrorCode::kSchemeMismatch, "coarsening expects a four-class label");
  }
  const Polarity p = four_class.polarity();
  const bool negative = p == Polarity::kHighlyNegative || p == Polarity::kNegative;
  return make_label(Scheme::kBinary, negative ? Polarity::kNegative : Polarity::kPositive);
}

std::int64_t ClassCounts::total() const {
  std::int64_t sum = 0;
  for (int i = 0; i < arity(scheme); ++i) sum += per_class[static_cast<std::size_t>(i)];
  return sum;
}

std::int64_t ClassCounts::of(Polarity polarity) const {
  const auto idx = class_index(scheme, polarity);
  return idx ? per_class[static_cast<std::size_t>(*idx)] : 0;
}

void ClassCounts::add(const ClassLabel& label, std::int64_t n) {
  if (label.scheme != scheme || label.index < 0 || label.index >= arity(scheme)) {
    throw Error(ErrorCode::kSchemeMismatch, "label does not belong to scheme " +
                                                std::string(scheme_name(scheme)));
  }
  per_class[static_cast<std::size_t>(label.index)] += n;
}

ClassCounts ClassCounts::tally(Scheme scheme, std::span<const ClassLabel> labels) {
  ClassCounts counts{scheme, {}};
  for (const auto& l : labels) counts.add(l);
  return counts;
}

ClassCounts make_counts(Scheme scheme, std::span<const std::int64_t> by_index) {
  if (static_cast<int>(by_index.size()) != arity(scheme)) {
    throw Error(ErrorCode::kSchemeMismatch, "count vector length does not match scheme arity");
  }
  ClassCounts counts{scheme, {}};
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    if (by_index[i] < 0) throw Error(ErrorCode::kConfig, "negative class count");
    counts.per_class[i] = by_index[i];
  }
  return counts;
}

}  // namespace sentiment
