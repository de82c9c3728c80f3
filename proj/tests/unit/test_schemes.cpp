#include <doctest.h>

#include <vector>

#include "sentiment/error.hpp"
#include "sentiment/schemes.hpp"

using namespace sentiment;

namespace {

Polarity imdb(int score, Scheme s) { return imdb_score_to_label(score, s).polarity(); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("scheme class lists") {
  CHECK(arity(Scheme::kBinary) == 2);
  CHECK(classes(Scheme::kThree)[1] == Polarity::kNeutral);
  CHECK(classes(Scheme::kFour).size() == 4);
  CHECK(classes(Scheme::kFour)[2] == Polarity::kPositive);
  CHECK(classes(Scheme::kFive)[4] == Polarity::kHighlyPositive);
  CHECK_FALSE(class_index(Scheme::kFour, Polarity::kNeutral).has_value());
  for (auto s : {Scheme::kBinary, Scheme::kThree, Scheme::kFour, Scheme::kFive}) {
    CHECK(parse_scheme(scheme_name(s)) == s);
    auto cls = classes(s);
    for (std::size_t i = 1; i < cls.size(); ++i) CHECK(cls[i - 1] < cls[i]);
  }
  CHECK(code_of([] { parse_scheme("six"); }) == ErrorCode::kConfig);
}

TEST_CASE("imdb score mapping examples") {
  CHECK(imdb(9, Scheme::kFour) == Polarity::kHighlyPositive);
  CHECK(imdb(4, Scheme::kThree) == Polarity::kNeutral);
  CHECK(imdb(7, Scheme::kThree) == Polarity::kNeutral);
  CHECK(imdb(4, Scheme::kBinary) == Polarity::kNegative);
  CHECK(imdb(3, Scheme::kFour) == Polarity::kNegative);
  CHECK(imdb(2, Scheme::kFour) == Polarity::kHighlyNegative);
  CHECK(imdb(8, Scheme::kThree) == Polarity::kPositive);
  for (int bad : {5, 6, 0, 11, -1}) {
    CHECK(code_of([&] { imdb_score_to_label(bad, Scheme::kBinary); }) == ErrorCode::kInvalidScore);
  }
  CHECK(code_of([] { imdb_score_to_label(9, Scheme::kFive); }) == ErrorCode::kUnsupportedScheme);
}

TEST_CASE("amazon score mapping examples") {
  CHECK(amazon_score_to_label(1, Scheme::kBinary)->polarity() == Polarity::kNegative);
  CHECK_FALSE(amazon_score_to_label(3, Scheme::kBinary).has_value());
  CHECK(amazon_score_to_label(5, Scheme::kFive)->polarity() == Polarity::kHighlyPositive);
  CHECK(amazon_score_to_label(3, Scheme::kFive)->polarity() == Polarity::kNeutral);
  CHECK(code_of([] { amazon_score_to_label(6, Scheme::kFive); }) == ErrorCode::kInvalidScore);
  CHECK(code_of([] { amazon_score_to_label(2, Scheme::kFour); }) == ErrorCode::kUnsupportedScheme);
}

TEST_CASE("binary tree split and coarsening") {
  const auto neg = make_label(Scheme::kBinary, Polarity::kNegative);
  const auto pos = make_label(Scheme::kBinary, Polarity::kPositive);
  CHECK(binary_tree_split(neg, 1).polarity() == Polarity::kHighlyNegative);
  CHECK(binary_tree_split(pos, 8).polarity() == Polarity::kPositive);
  CHECK(code_of([&] { binary_tree_split(neg, 9); }) == ErrorCode::kInconsistentLabel);
  for (int s : {1, 2, 3, 4, 7, 8, 9, 10}) {
    const auto parent = imdb_score_to_label(s, Scheme::kBinary);
    CHECK(coarsen_to_binary(binary_tree_split(parent, s)) == parent);
    CHECK(coarsen_to_binary(imdb_score_to_label(s, Scheme::kFour)) == parent);
  }
}

TEST_CASE("monotone mappings") {
  const int scores[] = {1, 2, 3, 4, 7, 8, 9, 10};
  for (auto s : {Scheme::kBinary, Scheme::kThree, Scheme::kFour}) {
    for (int i = 1; i < 8; ++i) CHECK(imdb(scores[i - 1], s) <= imdb(scores[i], s));
  }
  for (int v = 1; v < 5; ++v) {
    CHECK(amazon_score_to_label(v, Scheme::kFive)->index < amazon_score_to_label(v + 1, Scheme::kFive)->index);
  }
}

TEST_CASE("class counts") {
  ClassCounts c{Scheme::kBinary, {}};
  CHECK(c.total() == 0);
  const auto pos = make_label(Scheme::kBinary, Polarity::kPositive);
  const auto neg = make_label(Scheme::kBinary, Polarity::kNegative);
  std::vector<ClassLabel> labels{pos, pos, neg, pos};
  const auto t = ClassCounts::tally(Scheme::kBinary, labels);
  CHECK(t.of(Polarity::kPositive) == 3);
  CHECK(t.of(Polarity::kNegative) == 1);
  CHECK(t.of(Polarity::kNeutral) == 0);
  CHECK(code_of([] { make_label(Scheme::kBinary, Polarity::kNeutral); }) == ErrorCode::kSchemeMismatch);
  CHECK(code_of([] { label_at(Scheme::kThree, 3); }) == ErrorCode::kSchemeMismatch);
  CHECK(parse_polarity("HighlyPositive") == Polarity::kHighlyPositive);
  CHECK(parse_polarity(polarity_name(Polarity::kNeutral)) == Polarity::kNeutral);
}
