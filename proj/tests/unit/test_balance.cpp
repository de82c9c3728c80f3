#include <doctest.h>

#include "sentiment/balance.hpp"
#include "sentiment/error.hpp"
#include "sentiment/rng.hpp"

using namespace sentiment;

namespace {

const WordEmbeddingTable& table() {
  static const auto t = WordEmbeddingTable::load(std::string(TEST_DATA_DIR) + "/word_vectors.txt");
  return t;
}

FeatureMatrix matrix(std::initializer_list<std::pair<std::vector<double>, int>> rows) {
  FeatureMatrix m;
  m.dim = static_cast<int>(rows.begin()->first.size());
  for (const auto& [v, l] : rows) m.append(v, l, false);
  return m;
}

}  // namespace

TEST_CASE("smote degenerate segment") {
  auto m = matrix({{{1, 1}, 0}, {{1, 1}, 0}, {{0, 0}, 1}, {{5, 0}, 1}, {{0, 5}, 1}, {{3, 3}, 1}});
  const auto r = smote_resample(m, 5, std::nullopt, 1);
  CHECK(r.features.class_sizes() == std::vector<std::int64_t>{4, 4});
  for (std::size_t i = m.size(); i < r.features.size(); ++i) {
    CHECK(r.features.row(i)[0] == 1.0);
    CHECK(r.features.row(i)[1] == 1.0);
    CHECK(r.features.synthetic[i]);
  }
}

TEST_CASE("smote no-op and errors") {
  auto m = matrix({{{1, 0}, 0}, {{2, 0}, 0}, {{0, 1}, 1}, {{0, 2}, 1}});
  const auto r = smote_resample(m, 5, 2, 1);
  CHECK(r.features.rows == m.rows);
  CHECK(r.origins.empty());
  CHECK_THROWS_AS(smote_resample(m, 5, 1, 1), Error);
  CHECK_THROWS_AS(smote_resample(m, 0, std::nullopt, 1), Error);
  auto single = matrix({{{1, 0}, 0}, {{0, 1}, 1}, {{0, 2}, 1}});
  CHECK_THROWS_AS(smote_resample(single, 5, std::nullopt, 1), Error);
}

TEST_CASE("smote target and serial agreement") {
  Rng rng(4);
  FeatureMatrix m;
  m.dim = 3;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> v{rng.normal(), rng.normal(), rng.normal()};
    m.append(v, i < 6 ? 0 : (i < 16 ? 1 : 2), false);
  }
  const auto a = smote_resample(m, 3, 20, 8, Parallelism::kOpenMP);
  const auto b = smote_resample(m, 3, 20, 8, Parallelism::kSerial);
  CHECK(a.features.rows == b.features.rows);
  CHECK(a.features.class_sizes() == std::vector<std::int64_t>{20, 20, 20});
  for (std::size_t i = 0; i < m.rows.size(); ++i) CHECK(a.features.rows[i] == m.rows[i]);
  for (const auto& o : a.origins) {
    CHECK(o.lambda >= 0.0);
    CHECK(o.lambda < 1.0);
    CHECK(m.labels[o.seed_row] == m.labels[o.neighbor_row]);
  }
}

TEST_CASE("store conversion keeps originals") {
  EmbeddingStore s(2, StoreMode::kPooled);
  s.add({"a", 0, 1, {1, 1}});
  s.add({"b", 0, 1, {2, 2}});
  s.add({"c", 1, 1, {5, 5}});
  s.add({"d", 1, 1, {6, 6}});
  s.add({"e", 1, 1, {7, 7}});
  const auto r = smote_resample(features_from_store(s), 5, std::nullopt, 2);
  const auto out = store_from_features(r.features, s);
  CHECK(out.size() == 6);
  CHECK(out[0] == s[0]);
  CHECK(out.find("smote-0") != nullptr);
  CHECK(out.find("smote-0")->label == 0);
}

TEST_CASE("sst-5 counts balance to the largest class") {
  const std::int64_t sizes[] = {1208, 2512, 1794, 2489, 1482};
  FeatureMatrix m;
  m.dim = 1;
  for (int c = 0; c < 5; ++c) {
    for (std::int64_t i = 0; i < sizes[c]; ++i) {
      const double v = static_cast<double>(c * 10000 + i);
      m.append(std::span<const double>(&v, 1), c, false);
    }
  }
  const auto r = smote_resample(m, 5, std::nullopt, 3);
  CHECK(r.features.class_sizes() == std::vector<std::int64_t>(5, 2512));
}

TEST_CASE("word table nearest neighbor") {
  const auto& t = table();
  CHECK(t.size() == 200);
  const auto good = t.find("good");
  REQUIRE(good.has_value());
  CHECK(t.word(*t.nearest(*good)) == "great");
  CHECK_FALSE(t.find("movie").has_value());
}

TEST_CASE("augmentation") {
  const auto& t = table();
  std::vector<std::string> in{"a good movie"};
  const auto out = augment_texts(in, t, 1.0, 1);
  CHECK(out.outputs == std::vector<std::string>{"a great movie"});
  CHECK(augment_texts({}, t, 0.5, 1).outputs.empty());

  std::vector<std::string> texts{"The plot was boring, the ending awful.", "Cheap product, broken on arrival!",
                                 "nothing here matches"};
  const auto a = augment_texts(texts, t, 0.5, 7);
  const auto b = augment_texts(texts, t, 0.5, 7);
  CHECK(a.outputs == b.outputs);
  CHECK(a.outputs.size() == texts.size());
  CHECK(a.outputs[2] == texts[2]);
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(a.mapping[i] == i);
  CHECK_THROWS_AS(augment_texts(texts, t, 0.0, 1), Error);
  CHECK_THROWS_AS(augment_texts(texts, t, 1.5, 1), Error);
}

TEST_CASE("minority augmentation and merge") {
  std::vector<LabeledReview> r;
  for (int i = 0; i < 5; ++i) r.push_back({"p" + std::to_string(i), "a good film", std::nullopt, label_at(Scheme::kBinary, 1)});
  r.push_back({"n0", "a bad film", std::nullopt, label_at(Scheme::kBinary, 0)});
  r.push_back({"n1", "an awful story", std::nullopt, label_at(Scheme::kBinary, 0)});
  const auto added = augment_minority(r, Scheme::kBinary, table(), 1.0, 3);
  CHECK(added.size() == 3);
  for (const auto& a : added) CHECK(a.label.index == 0);
  const auto merged = merge_balanced(r, added);
  CHECK(merged.reviews.size() == r.size() + added.size());
  CHECK(merged.reviews[0].id == r[0].id);
  CHECK(merged.synthetic.back());
  CHECK_FALSE(merged.synthetic.front());
  CHECK(class_counts(merged.reviews, Scheme::kBinary).per_class[0] == 5);
  CHECK(merge_balanced(r, {}).reviews.size() == r.size());
}
