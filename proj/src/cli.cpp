#include "sentiment/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sentiment/balance.hpp"
#include "sentiment/corpus.hpp"
#include "sentiment/embedding_store.hpp"
#include "sentiment/error.hpp"
#include "sentiment/eval.hpp"
#include "sentiment/head.hpp"
#include "sentiment/polarity.hpp"
#include "sentiment/tokenizer.hpp"

namespace sentiment {

namespace {

struct PredictedLabel {
  std::string id;
  int label = 0;
};

// id \t label, the label as a class index or a polarity name.
std::vector<PredictedLabel> read_labels(const std::string& path, Scheme scheme) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  std::vector<PredictedLabel> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kMalformedRecord, path + ":" + std::to_string(lineno) + ": expected id<TAB>label");
    }
    const std::string id = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    int index = -1;
    if (!value.empty() && value.find_first_not_of("0123456789") == std::string::npos) {
      index = label_at(scheme, std::stoi(value)).index;
    } else {
      index = make_label(scheme, parse_polarity(value)).index;
    }
    out.push_back({id, index});
  }
  return out;
}

void write_labels(const std::string& path, const EmbeddingStore& store, std::span<const int> predicted) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (std::size_t i = 0; i < store.size(); ++i) out << store[i].id << '\t' << predicted[i] << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

Parallelism parallelism_of(bool serial) { return serial ? Parallelism::kSerial : Parallelism::kOpenMP; }

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Sentiment pipeline: corpora, tokenization, classifier head, overall polarity"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Ingest a corpus into train/test review tables");
  std::string prep_dataset, prep_scheme, prep_in, prep_out, prep_layout = "delimited", prep_labels = "label";
  std::uint64_t prep_seed = 0;
  double prep_fraction = 0.2;
  prepare->add_option("--dataset", prep_dataset, "Dataset name, e.g. imdb-4")->required();
  prepare->add_option("--scheme", prep_scheme, "binary|three|four|five")->required();
  prepare->add_option("--in", prep_in, "Corpus file or directory")->required();
  prepare->add_option("--out", prep_out, "Output directory")->required();
  prepare->add_option("--seed", prep_seed, "Shuffle seed");
  prepare->add_option("--layout", prep_layout, "delimited|directory");
  prepare->add_option("--labels", prep_labels, "imdb-score|five-star|label");
  prepare->add_option("--test-fraction", prep_fraction, "Test share of records without a split");

  // encode
  auto* enc = app.add_subcommand("encode", "WordPiece-encode a review table");
  std::string enc_vocab, enc_in, enc_out, enc_scheme = "binary";
  int enc_max_len = 128;
  enc->add_option("--vocab", enc_vocab, "Vocabulary, one token per line")->required();
  enc->add_option("--max-len", enc_max_len, "Sequence length L");
  enc->add_option("--in", enc_in, "Review table")->required();
  enc->add_option("--out", enc_out, "Encoded table")->required();
  enc->add_option("--scheme", enc_scheme, "Scheme of the label column");

  // train
  auto* tr = app.add_subcommand("train", "Train the classifier head on an embedding store");
  std::string tr_preset, tr_store, tr_out, tr_input = "pooled";
  int tr_hidden = 64;
  int tr_epochs = -1;
  std::uint64_t tr_seed = 0;
  bool tr_serial = false;
  tr->add_option("--preset", tr_preset, "binary|fine-grained")->required();
  tr->add_option("--store", tr_store, "Training embedding store")->required();
  tr->add_option("--out", tr_out, "Params file")->required();
  tr->add_option("--hidden", tr_hidden, "LSTM hidden size per direction");
  tr->add_option("--seed", tr_seed, "Initialization and shuffle seed");
  tr->add_option("--epochs", tr_epochs, "Override the preset epoch count");
  tr->add_option("--input", tr_input, "pooled|tokens");
  tr->add_flag("--serial", tr_serial, "Use the serial kernels");

  // predict
  auto* pr = app.add_subcommand("predict", "Predict class indices for a store");
  std::string pr_params, pr_store, pr_out;
  int pr_max_steps = 0;
  pr->add_option("--params", pr_params, "Params file")->required();
  pr->add_option("--store", pr_store, "Embedding store")->required();
  pr->add_option("--out", pr_out, "labels.tsv")->required();
  pr->add_option("--max-steps", pr_max_steps, "Token rows used per record (0: all)");

  // aggregate
  auto* ag = app.add_subcommand("aggregate", "Overall polarity of a label file");
  std::string ag_scheme, ag_labels, ag_thresholds;
  ag->add_option("--scheme", ag_scheme, "binary|three|four|five")->required();
  ag->add_option("--labels", ag_labels, "labels.tsv")->required();
  ag->add_option("--thresholds", ag_thresholds, "neu=0.85,base=1.2,sub=1.5");

  // report
  auto* rp = app.add_subcommand("report", "Accuracy and overall polarity of predictions against gold labels");
  std::string rp_scheme, rp_pred, rp_gold, rp_dataset = "unnamed", rp_thresholds, rp_format = "text";
  rp->add_option("--scheme", rp_scheme, "binary|three|four|five")->required();
  rp->add_option("--predictions", rp_pred, "labels.tsv from predict")->required();
  rp->add_option("--gold", rp_gold, "Labeled embedding store")->required();
  rp->add_option("--dataset", rp_dataset, "Name shown in the report");
  rp->add_option("--thresholds", rp_thresholds, "neu=0.85,base=1.2,sub=1.5");
  rp->add_option("--format", rp_format, "text|kv");

  // run
  auto* rn = app.add_subcommand("run", "Full pipeline from a key=value config");
  std::string rn_config, rn_out, rn_format = "text";
  rn->add_option("--config", rn_config, "Config file")->required();
  rn->add_option("--out", rn_out, "Output directory (overrides output.dir)");
  rn->add_option("--format", rn_format, "text|kv");

  // balance
  auto* bl = app.add_subcommand("balance", "Oversample minority classes");
  std::string bl_method, bl_in, bl_out, bl_table, bl_scheme = "binary";
  std::uint64_t bl_seed = 0;
  int bl_k = 5;
  double bl_rate = 0.3;
  bool bl_serial = false;
  bl->add_option("--method", bl_method, "smote|nlpaug")->required();
  bl->add_option("--in", bl_in, "Store (smote) or review table (nlpaug)")->required();
  bl->add_option("--out", bl_out, "Output store or table")->required();
  bl->add_option("--seed", bl_seed, "Seed");
  bl->add_option("--k", bl_k, "SMOTE neighbors");
  bl->add_option("--rate", bl_rate, "Share of words replaced");
  bl->add_option("--table", bl_table, "Word vectors for nlpaug");
  bl->add_option("--scheme", bl_scheme, "Scheme of the review table");
  bl->add_flag("--serial", bl_serial, "Use the serial neighbor search");

  // synth
  auto* sy = app.add_subcommand("synth", "Write a store of separated Gaussian clusters");
  int sy_dim = 16, sy_classes = 2, sy_per_class = 100;
  double sy_separation = 10.0, sy_spread = 1.0;
  std::uint64_t sy_seed = 0;
  std::string sy_out, sy_format = "binary";
  sy->add_option("--dim", sy_dim, "Dimension");
  sy->add_option("--classes", sy_classes, "Number of classes");
  sy->add_option("--per-class", sy_per_class, "Records per class");
  sy->add_option("--separation", sy_separation, "Distance between adjacent means in spreads");
  sy->add_option("--spread", sy_spread, "Per-coordinate standard deviation");
  sy->add_option("--seed", sy_seed, "Seed");
  sy->add_option("--out", sy_out, "Store path")->required();
  sy->add_option("--format", sy_format, "binary|text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*prepare) {
      CorpusDescriptor d;
      d.name = prep_dataset;
      d.path = prep_in;
      d.layout = parse_layout(prep_layout);
      d.labels = parse_label_source(prep_labels);
      d.test_fraction = prep_fraction;
      const Scheme scheme = parse_scheme(prep_scheme);
      DatasetSplit split = ingest(d, scheme, prep_seed);
      const auto check = verify_published_counts(split);
      std::filesystem::create_directories(prep_out);
      write_review_table(prep_out + "/train.tsv", split.train);
      write_review_table(prep_out + "/test.tsv", split.test);
      KeyValues m;
      m["dataset"] = prep_dataset;
      m["scheme"] = std::string(scheme_name(scheme));
      m["seed"] = std::to_string(prep_seed);
      m["layout"] = prep_layout;
      m["labels"] = prep_labels;
      m["raw"] = std::to_string(split.stats.raw);
      m["ingested"] = std::to_string(split.stats.ingested);
      m["dropped"] = std::to_string(split.stats.dropped);
      m["rejected"] = std::to_string(split.stats.rejected);
      m["empty_removed"] = std::to_string(split.stats.empty_removed);
      m["published_counts"] = check == CountCheck::kMatched ? "matched" : "skipped";
      const auto tc = class_counts(split.train, scheme);
      const auto sc = class_counts(split.test, scheme);
      const auto cls = classes(scheme);
      for (std::size_t c = 0; c < cls.size(); ++c) {
        m["train." + std::string(polarity_name(cls[c]))] = std::to_string(tc.per_class[c]);
        m["test." + std::string(polarity_name(cls[c]))] = std::to_string(sc.per_class[c]);
      }
      m["train.total"] = std::to_string(tc.total());
      m["test.total"] = std::to_string(sc.total());
      write_key_values(prep_out + "/manifest.txt", m);
      for (const auto& [k, v] : m) std::cout << k << '=' << v << '\n';
    } else if (*enc) {
      const Vocab vocab = Vocab::load(enc_vocab);
      const Scheme scheme = parse_scheme(enc_scheme);
      const auto rows = read_review_table(enc_in);
      std::vector<std::string> ids;
      std::vector<EncodedExample> encoded;
      for (const auto& r : rows) {
        InputExample ex{r.text, "", std::nullopt};
        if (r.label >= 0) ex.label = label_at(scheme, r.label);
        ids.push_back(r.id);
        encoded.push_back(encode(ex, vocab, enc_max_len));
      }
      write_encoded_table(enc_out, ids, encoded);
      std::cout << "encoded=" << encoded.size() << '\n';
    } else if (*tr) {
      Hyperparams hyper = preset_by_name(tr_preset);
      hyper.seed = tr_seed;
      if (tr_epochs >= 0) hyper.epochs = tr_epochs;
      const EmbeddingStore store = load_store(tr_store);
      HeadConfig cfg;
      cfg.hidden = tr_hidden;
      cfg.input = parse_head_input(tr_input);
      cfg.parallelism = parallelism_of(tr_serial);
      const TrainResult result = train(cfg, store, hyper);
      save_params(result.params, cfg.input, tr_out);
      for (std::size_t e = 0; e < result.history.size(); ++e) {
        std::cout << "epoch=" << e + 1 << " loss=" << result.history[e].mean_loss
                  << " accuracy=" << format_percent(result.history[e].accuracy) << '\n';
      }
    } else if (*pr) {
      HeadInput input = HeadInput::kPooled;
      const HeadParams params = load_params(pr_params, &input);
      const EmbeddingStore store = load_store(pr_store);
      const auto predicted = predict(params, store, input, pr_max_steps);
      write_labels(pr_out, store, predicted);
      std::cout << "predicted=" << predicted.size() << '\n';
    } else if (*ag) {
      const Scheme scheme = parse_scheme(ag_scheme);
      const auto th = ag_thresholds.empty() ? PolarityThresholds{} : PolarityThresholds::parse(ag_thresholds);
      th.validate();
      ClassCounts counts{scheme, {}};
      for (const auto& l : read_labels(ag_labels, scheme)) counts.add(label_at(scheme, l.label));
      const auto verdict = overall_polarity(counts, th);
      std::cout << "verdict=" << polarity_name(verdict) << '\n';
      const auto cls = classes(scheme);
      for (std::size_t c = 0; c < cls.size(); ++c) {
        std::cout << "count." << polarity_name(cls[c]) << '=' << counts.per_class[c] << '\n';
      }
      std::cout << "total=" << counts.total() << '\n';
      std::cout << "thresholds=" << th.str() << '\n';
    } else if (*rp) {
      const Scheme scheme = parse_scheme(rp_scheme);
      const auto th = rp_thresholds.empty() ? PolarityThresholds{} : PolarityThresholds::parse(rp_thresholds);
      th.validate();
      const auto labels = read_labels(rp_pred, scheme);
      const EmbeddingStore gold = load_store(rp_gold);
      std::vector<int> predicted, truth;
      for (const auto& l : labels) {
        const auto* rec = gold.find(l.id);
        if (rec == nullptr) throw Error(ErrorCode::kMalformedRecord, "no gold record for id '" + l.id + "'");
        if (rec->label < 0) throw Error(ErrorCode::kMalformedRecord, "gold record '" + l.id + "' is unlabeled");
        predicted.push_back(l.label);
        truth.push_back(rec->label);
      }
      if (labels.size() != gold.size()) {
        throw Error(ErrorCode::kLengthMismatch, "predictions cover " + std::to_string(labels.size()) + " of " +
                                                    std::to_string(gold.size()) + " gold records");
      }
      const auto report = make_report(rp_dataset, scheme, predicted, truth, th);
      std::cout << (rp_format == "kv" ? render_key_values(report) : render_text(report));
    } else if (*rn) {
      ExperimentConfig config = parse_experiment_config(read_key_values(rn_config));
      if (!rn_out.empty()) config.output_dir = rn_out;
      const auto report = run_experiment(config);
      std::cout << (rn_format == "kv" ? render_key_values(report) : render_text(report));
    } else if (*bl) {
      if (bl_method == "smote") {
        const EmbeddingStore store = load_store(bl_in);
        const auto res = smote_resample(features_from_store(store), bl_k, std::nullopt, bl_seed,
                                        parallelism_of(bl_serial));
        write_store(store_from_features(res.features, store), bl_out);
        std::cout << "original=" << store.size() << "\nsynthetic=" << res.origins.size() << '\n';
      } else if (bl_method == "nlpaug") {
        if (bl_table.empty()) throw Error(ErrorCode::kConfig, "nlpaug needs --table");
        const Scheme scheme = parse_scheme(bl_scheme);
        const auto table = WordEmbeddingTable::load(bl_table);
        const auto reviews = to_reviews(read_review_table(bl_in), scheme);
        const auto added = augment_minority(reviews, scheme, table, bl_rate, bl_seed);
        const auto merged = merge_balanced(reviews, added);
        write_review_table(bl_out, merged.reviews);
        std::cout << "original=" << reviews.size() << "\nsynthetic=" << added.size() << '\n';
      } else {
        throw Error(ErrorCode::kConfig, "--method must be smote|nlpaug");
      }
    } else if (*sy) {
      const auto specs = separated_clusters(sy_seed, sy_dim, sy_classes, sy_per_class, sy_separation, sy_spread);
      const auto store = synthetic_store(sy_seed, sy_dim, specs);
      write_store(store, sy_out, sy_format == "text" ? StoreFormat::kText : StoreFormat::kBinary);
      std::cout << "records=" << store.size() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace sentiment
