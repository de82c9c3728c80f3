#include "sentiment/eval.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "sentiment/balance.hpp"
#include "sentiment/error.hpp"
#include "sentiment/tokenizer.hpp"

namespace sentiment {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v.find('-') != std::string::npos) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected a non-negative integer, got '" + v + "'");
  }
}

std::vector<int> labels_of(const EmbeddingStore& store) {
  std::vector<int> out;
  out.reserve(store.size());
  for (const auto& r : store.records()) out.push_back(r.label);
  return out;
}

EmbeddingStore fetch_store(const ExperimentConfig& config, std::span<const LabeledReview> reviews) {
  std::vector<std::string> ids, texts;
  for (const auto& r : reviews) {
    ids.push_back(r.id);
    texts.push_back(r.text);
  }
  const StoreMode mode = config.head.input == HeadInput::kTokens ? StoreMode::kTokens : StoreMode::kPooled;
  auto records = fetch_remote(config.remote, ids, texts, mode);
  EmbeddingStore store(config.remote.dim, mode, config.remote.endpoint);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].label = reviews[i].label.index;
    store.add(std::move(records[i]));
  }
  return store;
}

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and gold vectors differ in length");
  }
  if (gold.empty()) throw Error(ErrorCode::kEmptyInput, "accuracy of an empty prediction vector");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += predicted[i] == gold[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::string format_percent(double value) { return fixed(value, 2); }

std::int64_t ConfusionMatrix::at(int gold, int predicted) const {
  const int k = arity(scheme);
  return cells[static_cast<std::size_t>(gold * k + predicted)];
}

ClassCounts ConfusionMatrix::gold_counts() const {
  ClassCounts c{scheme, {}};
  const int k = arity(scheme);
  for (int g = 0; g < k; ++g)
    for (int p = 0; p < k; ++p) c.per_class[static_cast<std::size_t>(g)] += at(g, p);
  return c;
}

ClassCounts ConfusionMatrix::predicted_counts() const {
  ClassCounts c{scheme, {}};
  const int k = arity(scheme);
  for (int g = 0; g < k; ++g)
    for (int p = 0; p < k; ++p) c.per_class[static_cast<std::size_t>(p)] += at(g, p);
  return c;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto v : cells) t += v;
  return t;
}

ConfusionMatrix confusion(Scheme scheme, std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and gold vectors differ in length");
  }
  const int k = arity(scheme);
  ConfusionMatrix m{scheme, std::vector<std::int64_t>(static_cast<std::size_t>(k * k), 0)};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw Error(ErrorCode::kSchemeMismatch, "label outside scheme " + std::string(scheme_name(scheme)));
    }
    ++m.cells[static_cast<std::size_t>(gold[i] * k + predicted[i])];
  }
  return m;
}

EvalReport make_report(const std::string& dataset, Scheme scheme, std::span<const int> predicted,
                       std::span<const int> gold, const PolarityThresholds& thresholds,
                       KeyValues config) {
  EvalReport r;
  r.dataset = dataset;
  r.scheme = scheme;
  r.accuracy = accuracy(predicted, gold);
  r.confusion = confusion(scheme, predicted, gold);
  r.original_op = overall_polarity(r.confusion.gold_counts(), thresholds);
  r.computed_op = overall_polarity(r.confusion.predicted_counts(), thresholds);
  r.config = std::move(config);
  r.config["thresholds"] = thresholds.str();
  return r;
}

std::string render_text(const EvalReport& r) {
  std::ostringstream os;
  const auto cls = classes(r.scheme);
  os << "Experiment report\n";
  os << pad("dataset", 14) << r.dataset << '\n';
  os << pad("scheme", 14) << scheme_name(r.scheme) << '\n';
  os << pad("accuracy (%)", 14) << format_percent(r.accuracy) << '\n';
  os << pad("test size", 14) << r.confusion.total() << "\n\n";

  os << "Confusion (rows: gold, columns: predicted)\n";
  os << pad("", 16);
  for (auto p : cls) os << pad(std::string(polarity_name(p)), 16, false);
  os << pad("total", 10, false) << '\n';
  const auto gold = r.confusion.gold_counts();
  for (std::size_t g = 0; g < cls.size(); ++g) {
    os << pad(std::string(polarity_name(cls[g])), 16);
    for (std::size_t p = 0; p < cls.size(); ++p) {
      os << pad(std::to_string(r.confusion.at(static_cast<int>(g), static_cast<int>(p))), 16, false);
    }
    os << pad(std::to_string(gold.per_class[g]), 10, false) << '\n';
  }
  os << '\n';

  os << "Overall polarity\n";
  os << pad("  Original OP", 16) << polarity_name(r.original_op) << '\n';
  os << pad("  Computed OP", 16) << polarity_name(r.computed_op) << '\n';
  os << '\n';

  if (!r.history.empty()) {
    os << "Training history\n";
    os << pad("  epoch", 10) << pad("loss", 14, false) << pad("accuracy", 12, false) << '\n';
    for (std::size_t e = 0; e < r.history.size(); ++e) {
      os << pad("  " + std::to_string(e + 1), 10) << pad(fixed(r.history[e].mean_loss, 6), 14, false)
         << pad(format_percent(r.history[e].accuracy), 12, false) << '\n';
    }
    os << '\n';
  }

  os << "Configuration\n";
  for (const auto& [k, v] : r.config) os << "  " << k << " = " << v << '\n';
  return os.str();
}

std::string render_key_values(const EvalReport& r) {
  std::ostringstream os;
  const auto cls = classes(r.scheme);
  os << "dataset=" << r.dataset << '\n';
  os << "scheme=" << scheme_name(r.scheme) << '\n';
  os << "accuracy=" << format_percent(r.accuracy) << '\n';
  os << "accuracy.exact=" << fixed(r.accuracy, 10) << '\n';
  os << "test.size=" << r.confusion.total() << '\n';
  const auto gold = r.confusion.gold_counts();
  const auto pred = r.confusion.predicted_counts();
  for (std::size_t c = 0; c < cls.size(); ++c) {
    os << "gold." << polarity_name(cls[c]) << '=' << gold.per_class[c] << '\n';
    os << "predicted." << polarity_name(cls[c]) << '=' << pred.per_class[c] << '\n';
  }
  for (std::size_t g = 0; g < cls.size(); ++g) {
    for (std::size_t p = 0; p < cls.size(); ++p) {
      os << "confusion." << polarity_name(cls[g]) << '.' << polarity_name(cls[p]) << '='
         << r.confusion.at(static_cast<int>(g), static_cast<int>(p)) << '\n';
    }
  }
  os << "op.original=" << polarity_name(r.original_op) << '\n';
  os << "op.computed=" << polarity_name(r.computed_op) << '\n';
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    os << "history." << e + 1 << ".loss=" << fixed(r.history[e].mean_loss, 10) << '\n';
    os << "history." << e + 1 << ".accuracy=" << fixed(r.history[e].accuracy, 4) << '\n';
  }
  for (const auto& [k, v] : r.config) os << "config." << k << '=' << v << '\n';
  return os.str();
}

KeyValues ExperimentConfig::echo() const {
  KeyValues kv;
  kv["dataset.name"] = dataset;
  kv["scheme"] = std::string(scheme_name(scheme));
  kv["preset"] = preset;
  kv["seed"] = std::to_string(hyper.seed);
  kv["train.epochs"] = std::to_string(hyper.epochs);
  kv["train.batch_size"] = std::to_string(hyper.batch_size);
  kv["train.learning_rate"] = fixed(hyper.learning_rate, 8);
  kv["train.decay"] = fixed(hyper.weight_decay, 8);
  kv["train.decay_mode"] = hyper.decay_mode == DecayMode::kL2 ? "l2" : "lr";
  kv["train.loss"] = std::string(loss_kind_name(hyper.loss));
  kv["head.hidden"] = std::to_string(head.hidden);
  kv["head.input"] = std::string(head_input_name(head.input));
  kv["balance.method"] = balance;
  return kv;
}

ExperimentConfig parse_experiment_config(const KeyValues& kv) {
  static const std::set<std::string> kKnown = {
      "dataset.name", "dataset.source", "dataset.path", "dataset.layout", "dataset.labels",
      "dataset.test_fraction", "dataset.train_store", "dataset.test_store", "scheme", "preset",
      "seed", "synthetic.dim", "synthetic.per_class", "synthetic.test_per_class",
      "synthetic.separation", "synthetic.spread", "embedding.endpoint", "embedding.path",
      "embedding.retries", "embedding.dim", "embedding.backoff_ms", "embedding.batch",
      "encode.vocab", "head.hidden", "head.input", "head.parallel", "train.epochs",
      "train.batch_size", "train.learning_rate", "train.decay", "train.decay_mode",
      "train.epsilon", "train.epsilon_placement", "thresholds.neu", "thresholds.base",
      "thresholds.sub", "balance.method", "balance.k", "output.dir"};
  for (const auto& [k, v] : kv) {
    if (kKnown.count(k) == 0) throw Error(ErrorCode::kConfig, "unknown config key '" + k + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  ExperimentConfig c;
  if (auto v = get("scheme")) c.scheme = parse_scheme(*v);
  if (auto v = get("preset")) c.preset = *v;
  c.hyper = preset_by_name(c.preset);
  if (auto v = get("seed")) c.hyper.seed = to_u64("seed", *v);
  if (auto v = get("train.epochs")) c.hyper.epochs = to_int("train.epochs", *v);
  if (auto v = get("train.batch_size")) c.hyper.batch_size = to_int("train.batch_size", *v);
  if (auto v = get("train.learning_rate")) c.hyper.learning_rate = to_double("train.learning_rate", *v);
  if (auto v = get("train.decay")) c.hyper.weight_decay = to_double("train.decay", *v);
  if (auto v = get("train.epsilon")) c.hyper.epsilon = to_double("train.epsilon", *v);
  if (auto v = get("train.decay_mode")) {
    if (*v == "l2") c.hyper.decay_mode = DecayMode::kL2;
    else if (*v == "lr") c.hyper.decay_mode = DecayMode::kLearningRate;
    else throw Error(ErrorCode::kConfig, "train.decay_mode must be l2|lr");
  }
  if (auto v = get("train.epsilon_placement")) {
    if (*v == "corrected") c.hyper.epsilon_placement = EpsilonPlacement::kCorrected;
    else if (*v == "hat") c.hyper.epsilon_placement = EpsilonPlacement::kHat;
    else throw Error(ErrorCode::kConfig, "train.epsilon_placement must be corrected|hat");
  }
  c.hyper.validate();
  if (c.hyper.loss == LossKind::kBinaryCrossEntropy && c.scheme != Scheme::kBinary) {
    throw Error(ErrorCode::kConfig, "the binary preset needs scheme=binary");
  }

  c.head.classes = arity(c.scheme);
  if (auto v = get("head.hidden")) c.head.hidden = to_int("head.hidden", *v);
  if (c.head.hidden < 1) throw Error(ErrorCode::kConfig, "head.hidden must be positive");
  if (auto v = get("head.input")) c.head.input = parse_head_input(*v);
  if (auto v = get("head.parallel")) {
    if (*v == "openmp") c.head.parallelism = Parallelism::kOpenMP;
    else if (*v == "serial") c.head.parallelism = Parallelism::kSerial;
    else throw Error(ErrorCode::kConfig, "head.parallel must be openmp|serial");
  }

  PolarityThresholds th;
  if (auto v = get("thresholds.neu")) th.neutral_fraction = Ratio::parse(*v);
  if (auto v = get("thresholds.base")) th.base_ratio = Ratio::parse(*v);
  if (auto v = get("thresholds.sub")) th.sub_ratio = Ratio::parse(*v);
  th.validate();
  c.thresholds = th;

  if (auto v = get("dataset.name")) c.dataset = *v;
  std::string source = "synthetic";
  if (auto v = get("dataset.source")) source = *v;
  if (source == "synthetic") {
    c.source = DataSource::kSynthetic;
  } else if (source == "stores") {
    c.source = DataSource::kStores;
  } else if (source == "corpus") {
    c.source = DataSource::kCorpus;
  } else {
    throw Error(ErrorCode::kConfig, "dataset.source must be synthetic|stores|corpus");
  }

  if (auto v = get("synthetic.dim")) c.synthetic_dim = to_int("synthetic.dim", *v);
  if (auto v = get("synthetic.per_class")) c.synthetic_per_class = to_int("synthetic.per_class", *v);
  if (auto v = get("synthetic.test_per_class")) c.synthetic_test_per_class = to_int("synthetic.test_per_class", *v);
  if (auto v = get("synthetic.separation")) c.synthetic_separation = to_double("synthetic.separation", *v);
  if (auto v = get("synthetic.spread")) c.synthetic_spread = to_double("synthetic.spread", *v);

  if (auto v = get("dataset.train_store")) c.train_store = *v;
  if (auto v = get("dataset.test_store")) c.test_store = *v;
  if (c.source == DataSource::kStores && (c.train_store.empty() || c.test_store.empty())) {
    throw Error(ErrorCode::kConfig, "dataset.train_store and dataset.test_store are required");
  }

  c.corpus.name = c.dataset;
  if (auto v = get("dataset.path")) c.corpus.path = *v;
  if (auto v = get("dataset.layout")) c.corpus.layout = parse_layout(*v);
  if (auto v = get("dataset.labels")) c.corpus.labels = parse_label_source(*v);
  if (auto v = get("dataset.test_fraction")) c.corpus.test_fraction = to_double("dataset.test_fraction", *v);
  if (auto v = get("embedding.endpoint")) c.remote.endpoint = *v;
  if (auto v = get("embedding.path")) c.remote.path = *v;
  if (auto v = get("embedding.retries")) c.remote.retries = to_int("embedding.retries", *v);
  if (auto v = get("embedding.dim")) c.remote.dim = to_int("embedding.dim", *v);
  if (auto v = get("embedding.backoff_ms")) c.remote.backoff_ms = to_int("embedding.backoff_ms", *v);
  if (auto v = get("embedding.batch")) c.remote.batch_size = static_cast<std::size_t>(to_int("embedding.batch", *v));
  if (auto v = get("encode.vocab")) c.vocab = *v;
  if (c.source == DataSource::kCorpus && (c.corpus.path.empty() || c.remote.endpoint.empty())) {
    throw Error(ErrorCode::kConfig, "corpus runs need dataset.path and embedding.endpoint");
  }

  if (auto v = get("balance.method")) c.balance = *v;
  if (c.balance != "none" && c.balance != "smote") {
    throw Error(ErrorCode::kConfig, "balance.method for run must be none|smote");
  }
  if (auto v = get("balance.k")) c.smote_k = to_int("balance.k", *v);
  if (auto v = get("output.dir")) c.output_dir = *v;
  return c;
}

EvalReport run_experiment(const ExperimentConfig& config) {
  EmbeddingStore train_store;
  EmbeddingStore test_store;

  switch (config.source) {
    case DataSource::kSynthetic:
      stage("prepare", [&] {
        const auto specs =
            separated_clusters(config.hyper.seed, config.synthetic_dim, arity(config.scheme),
                               config.synthetic_per_class, config.synthetic_separation,
                               config.synthetic_spread);
        train_store = synthetic_store(config.hyper.seed, config.synthetic_dim, specs);
        auto test_specs = specs;
        for (auto& s : test_specs) s.count = config.synthetic_test_per_class;
        test_store = synthetic_store(config.hyper.seed + 0x5bd1e995ULL, config.synthetic_dim, test_specs);
      });
      break;
    case DataSource::kStores:
      stage("prepare", [&] {
        train_store = load_store(config.train_store);
        test_store = load_store(config.test_store);
      });
      break;
    case DataSource::kCorpus: {
      DatasetSplit split = stage("prepare", [&] {
        auto s = ingest(config.corpus, config.scheme, config.hyper.seed);
        verify_published_counts(s);
        return s;
      });
      if (!config.vocab.empty()) {
        stage("encode", [&] {
          const Vocab vocab = Vocab::load(config.vocab);
          std::vector<std::string> ids;
          std::vector<EncodedExample> encoded;
          for (const auto* part : {&split.train, &split.test}) {
            for (const auto& r : *part) {
              ids.push_back(r.id);
              encoded.push_back(encode(InputExample{r.text, "", r.label}, vocab, config.hyper.max_seq_len));
            }
          }
          if (!config.output_dir.empty()) {
            std::filesystem::create_directories(config.output_dir);
            write_encoded_table(config.output_dir + "/encoded.tsv", ids, encoded);
          }
        });
      }
      stage("embed", [&] {
        train_store = fetch_store(config, split.train);
        test_store = fetch_store(config, split.test);
      });
      break;
    }
  }

  if (config.balance == "smote") {
    stage("balance", [&] {
      const auto res = smote_resample(features_from_store(train_store), config.smote_k, std::nullopt,
                                      config.hyper.seed, config.head.parallelism);
      train_store = store_from_features(res.features, train_store);
    });
  }

  const TrainResult trained = stage("train", [&] { return train(config.head, train_store, config.hyper); });
  const int max_steps = config.head.input == HeadInput::kTokens ? config.hyper.max_seq_len : 0;
  const auto predicted = stage("predict", [&] {
    return predict(trained.params, test_store, config.head.input, max_steps, config.head.parallelism);
  });
  EvalReport report = stage("aggregate", [&] {
    return make_report(config.dataset, config.scheme, predicted, labels_of(test_store), config.thresholds,
                       config.echo());
  });
  report.history = trained.history;

  for (const auto& e : report.history) {
    if (!std::isfinite(e.mean_loss)) throw Error(ErrorCode::kNonFinite, "stage train: loss diverged");
  }
  if (!config.output_dir.empty()) {
    stage("report", [&] {
      std::filesystem::create_directories(config.output_dir);
      std::ofstream(config.output_dir + "/report.txt", std::ios::binary) << render_text(report);
      std::ofstream(config.output_dir + "/report.kv", std::ios::binary) << render_key_values(report);
    });
  }
  return report;
}

}  // namespace sentiment
