#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentiment/corpus.hpp"
#include "sentiment/embedding_store.hpp"
#include "sentiment/head.hpp"
#include "sentiment/polarity.hpp"

namespace sentiment {

// Correct predictions over total, as a percentage.
double accuracy(std::span<const int> predicted, std::span<const int> gold);

// Two decimals, e.g. "97.67".
std::string format_percent(double value);

struct ConfusionMatrix {
  Scheme scheme = Scheme::kBinary;
  std::vector<std::int64_t> cells;  // gold row x predicted column

  std::int64_t at(int gold, int predicted) const;
  ClassCounts gold_counts() const;
  ClassCounts predicted_counts() const;
  std::int64_t total() const;
};

ConfusionMatrix confusion(Scheme scheme, std::span<const int> predicted, std::span<const int> gold);

struct EvalReport {
  std::string dataset;
  Scheme scheme = Scheme::kBinary;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  OverallPolarity original_op = Polarity::kNeutral;  // from gold labels
  OverallPolarity computed_op = Polarity::kNeutral;  // from predictions
  KeyValues config;                                  // echo: preset, seed, thresholds, ...
  std::vector<EpochStats> history;
};

EvalReport make_report(const std::string& dataset, Scheme scheme, std::span<const int> predicted,
                       std::span<const int> gold, const PolarityThresholds& thresholds,
                       KeyValues config = {});

// Aligned tables for people; key=value lines for tools.
std::string render_text(const EvalReport& report);
std::string render_key_values(const EvalReport& report);

enum class DataSource { kSynthetic, kStores, kCorpus };

struct ExperimentConfig {
  std::string dataset = "synthetic";
  DataSource source = DataSource::kSynthetic;
  Scheme scheme = Scheme::kBinary;
  std::string preset = "fine-grained";
  Hyperparams hyper = fine_grained_preset();
  HeadConfig head;
  PolarityThresholds thresholds;

  // synthetic
  int synthetic_dim = 16;
  int synthetic_per_class = 500;
  int synthetic_test_per_class = 100;
  double synthetic_separation = 10.0;
  double synthetic_spread = 1.0;

  // stores
  std::string train_store;
  std::string test_store;

  // corpus + embedding service
  CorpusDescriptor corpus;
  RemoteConfig remote;
  std::string vocab;  // optional; encodes the reviews when set

  std::string balance = "none";  // none|smote
  int smote_k = 5;

  std::string output_dir;  // optional; report.txt and report.kv land here

  KeyValues echo() const;
};

// Unknown keys are rejected so that typos surface as config errors.
ExperimentConfig parse_experiment_config(const KeyValues& kv);

// prepare -> (encode) -> train -> predict -> accuracy -> aggregate.
// Errors are rethrown with the failing stage named.
EvalReport run_experiment(const ExperimentConfig& config);

}  // namespace sentiment
