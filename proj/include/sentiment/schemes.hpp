#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace sentiment {

// Ordered most-negative to most-positive.
enum class Polarity : int {
  kHighlyNegative = 0,
  kNegative,
  kNeutral,
  kPositive,
  kHighlyPositive,
};

// Value equals the number of classes.
enum class Scheme : int {
  kBinary = 2,
  kThree = 3,
  kFour = 4,
  kFive = 5,
};

enum class ScoreScale {
  kImdb,      // 1..10 without 5 and 6
  kFiveStar,  // 1..5
};

struct RawScore {
  int value = 0;
  ScoreScale scale = ScoreScale::kImdb;
};

int arity(Scheme scheme);
std::span<const Polarity> classes(Scheme scheme);
std::optional<int> class_index(Scheme scheme, Polarity polarity);

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);
std::string_view polarity_name(Polarity polarity);
Polarity parse_polarity(std::string_view name);

struct ClassLabel {
  Scheme scheme = Scheme::kBinary;
  int index = 0;

  Polarity polarity() const { return classes(scheme)[static_cast<std::size_t>(index)]; }
  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

// Throws kSchemeMismatch when the polarity is not part of the scheme.
ClassLabel make_label(Scheme scheme, Polarity polarity);
// Throws kSchemeMismatch when index is outside [0, arity).
ClassLabel label_at(Scheme scheme, int index);

// IMDb 1..10 scores for the binary, three and four class variants.
ClassLabel imdb_score_to_label(int score, Scheme scheme);

// Amazon five-star scores. Returns nullopt for a dropped review (score 3
// in the binary scheme).
std::optional<ClassLabel> amazon_score_to_label(int score, Scheme scheme);

// Refines a binary IMDb label into its four-class child using the score.
ClassLabel binary_tree_split(ClassLabel parent, int score);

// Four-class to binary: {HN, N} -> N, {P, HP} -> P.
ClassLabel coarsen_to_binary(ClassLabel four_class);

struct ClassCounts {
  Scheme scheme = Scheme::kBinary;
  std::array<std::int64_t, 5> per_class{};  // indexed by class index

  std::int64_t total() const;
  // Zero for polarities outside the scheme.
  std::int64_t of(Polarity polarity) const;
  void add(const ClassLabel& label, std::int64_t n = 1);

  static ClassCounts tally(Scheme scheme, std::span<const ClassLabel> labels);
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts make_counts(Scheme scheme, std::span<const std::int64_t> by_index);

}  // namespace sentiment
