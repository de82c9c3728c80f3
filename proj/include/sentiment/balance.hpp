#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentiment/corpus.hpp"
#include "sentiment/embedding_store.hpp"
#include "sentiment/head.hpp"

namespace sentiment {

struct FeatureMatrix {
  int dim = 0;
  std::vector<double> rows;  // size() x dim
  std::vector<int> labels;
  std::vector<bool> synthetic;  // provenance, aligned with labels

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(rows).subspan(i * static_cast<std::size_t>(dim),
                                                 static_cast<std::size_t>(dim));
  }
  void append(std::span<const double> values, int label, bool is_synthetic);
  int class_span() const;
  std::vector<std::int64_t> class_sizes() const;
};

// Pooled rows of a labeled store.
FeatureMatrix features_from_store(const EmbeddingStore& store);
// Original records keep their ids; synthetic rows are named smote-<n>.
EmbeddingStore store_from_features(const FeatureMatrix& features, const EmbeddingStore& original);

// Where a synthetic row came from.
struct SmoteOrigin {
  std::size_t seed_row = 0;
  std::size_t neighbor_row = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  FeatureMatrix features;           // originals verbatim, then synthetic rows by class
  std::vector<SmoteOrigin> origins;  // one per synthetic row, in order
};

// Oversamples every class up to `target` rows (default: the largest class)
// with x + lambda * (neighbor - x), neighbor among the k nearest same-class
// rows (Euclidean), lambda uniform in [0, 1).
SmoteResult smote_resample(const FeatureMatrix& features, int k, std::optional<std::int64_t> target,
                           std::uint64_t seed, Parallelism parallelism = Parallelism::kOpenMP);

// Plain-text word vectors, one "word v1 ... vd" per line.
class WordEmbeddingTable {
 public:
  static WordEmbeddingTable load(const std::string& path);
  static WordEmbeddingTable from_entries(std::vector<std::string> words, std::vector<std::vector<double>> vectors);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  std::optional<std::size_t> find(const std::string& word) const;
  const std::string& word(std::size_t i) const { return words_[i]; }
  std::span<const double> vector(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * static_cast<std::size_t>(dim_),
                                                    static_cast<std::size_t>(dim_));
  }
  // Highest cosine similarity excluding i itself, ties to the lower index.
  std::optional<std::size_t> nearest(std::size_t i) const;

 private:
  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

bool is_stopword(const std::string& lowercase_word);

struct AugmentationBatch {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::size_t> mapping;  // inputs[i] -> outputs[mapping[i]]
};

// Replaces ceil(rate * n) of the n in-table content words of every text
// with their nearest embedding neighbor. Deterministic given seed.
AugmentationBatch augment_texts(std::span<const std::string> texts, const WordEmbeddingTable& table,
                                double rate, std::uint64_t seed);

struct BalancedReviews {
  std::vector<LabeledReview> reviews;
  std::vector<bool> synthetic;
};

// Augmented copies of randomly drawn minority reviews until every class
// reaches the size of the largest. Additions are named aug-<n>.
std::vector<LabeledReview> augment_minority(std::span<const LabeledReview> reviews, Scheme scheme,
                                            const WordEmbeddingTable& table, double rate,
                                            std::uint64_t seed);

FeatureMatrix merge_balanced(const FeatureMatrix& original, const FeatureMatrix& additions);
BalancedReviews merge_balanced(std::span<const LabeledReview> original,
                               std::span<const LabeledReview> additions);

}  // namespace sentiment
