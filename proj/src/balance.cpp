#include "sentiment/balance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sentiment/error.hpp"
#include "sentiment/kernels.hpp"
#include "sentiment/rng.hpp"

namespace sentiment {

void FeatureMatrix::append(std::span<const double> values, int label, bool is_synthetic) {
  if (values.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "feature row width differs from matrix width");
  }
  rows.insert(rows.end(), values.begin(), values.end());
  labels.push_back(label);
  synthetic.push_back(is_synthetic);
}

int FeatureMatrix::class_span() const {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

std::vector<std::int64_t> FeatureMatrix::class_sizes() const {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(class_span()), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

FeatureMatrix features_from_store(const EmbeddingStore& store) {
  FeatureMatrix fm;
  fm.dim = store.dim();
  fm.rows.reserve(store.size() * static_cast<std::size_t>(store.dim()));
  for (const auto& r : store.records()) {
    if (r.label < 0) throw Error(ErrorCode::kSchemeMismatch, "record " + r.id + " is unlabeled");
    const auto pooled = r.pooled(store.dim());
    std::vector<double> row(pooled.begin(), pooled.end());
    fm.append(row, r.label, false);
  }
  return fm;
}

EmbeddingStore store_from_features(const FeatureMatrix& features, const EmbeddingStore& original) {
  EmbeddingStore out(features.dim, StoreMode::kPooled, original.provenance());
  std::size_t next_original = 0;
  std::size_t next_synthetic = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    EmbeddingRecord rec;
    if (features.synthetic[i]) {
      rec.id = "smote-" + std::to_string(next_synthetic++);
    } else {
      if (next_original >= original.size()) {
        throw Error(ErrorCode::kCountMismatch, "more original rows than records in the source store");
      }
      rec.id = original[next_original++].id;
    }
    rec.label = features.labels[i];
    const auto row = features.row(i);
    rec.values.assign(row.begin(), row.end());
    out.add(std::move(rec));
  }
  return out;
}

SmoteResult smote_resample(const FeatureMatrix& features, int k, std::optional<std::int64_t> target,
                           std::uint64_t seed, Parallelism parallelism) {
  if (k < 1) throw Error(ErrorCode::kConfig, "SMOTE needs k >= 1");
  const auto sizes = features.class_sizes();
  const std::int64_t largest = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  const std::int64_t goal = target.value_or(largest);

  SmoteResult result;
  result.features = features;
  result.features.synthetic.assign(features.size(), false);
  const int dim = features.dim;

  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (goal < sizes[c]) {
      throw Error(ErrorCode::kInvalidTarget, "target " + std::to_string(goal) + " is below class " +
                                                 std::to_string(c) + " size " + std::to_string(sizes[c]));
    }
    const std::int64_t deficit = goal - sizes[c];
    if (deficit == 0) continue;
    if (sizes[c] < 2) {
      throw Error(ErrorCode::kInsufficientSamples,
                  "class " + std::to_string(c) + " has " + std::to_string(sizes[c]) +
                      " sample(s); SMOTE needs at least 2");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features.labels[i] == static_cast<int>(c)) members.push_back(i);
    }
    const auto neighbors = parallelism == Parallelism::kOpenMP
                               ? nearest_neighbors_parallel(features.rows, dim, members, k)
                               : nearest_neighbors_serial(features.rows, dim, members, k);
    Rng rng(seed + 0x632be59bd9b4e019ULL * (c + 1));
    std::vector<double> synth(static_cast<std::size_t>(dim));
    for (std::int64_t s = 0; s < deficit; ++s) {
      const std::size_t m = rng.below(members.size());
      const auto& nn = neighbors[m];
      const std::size_t pick = nn[rng.below(nn.size())];
      const double lambda = rng.uniform();
      const auto x = features.row(members[m]);
      const auto y = features.row(pick);
      for (std::size_t j = 0; j < synth.size(); ++j) synth[j] = x[j] + lambda * (y[j] - x[j]);
      result.features.append(synth, static_cast<int>(c), true);
      result.origins.push_back(SmoteOrigin{members[m], pick, lambda});
    }
  }
  return result;
}

WordEmbeddingTable WordEmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open word vectors " + path);
  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) {
      throw Error(ErrorCode::kMalformedRecord, path + ":" + std::to_string(line_no) + ": bad vector value");
    }
    words.push_back(std::move(word));
    vectors.push_back(std::move(v));
  }
  return from_entries(std::move(words), std::move(vectors));
}

WordEmbeddingTable WordEmbeddingTable::from_entries(std::vector<std::string> words,
                                                    std::vector<std::vector<double>> vectors) {
  if (words.empty()) throw Error(ErrorCode::kEmptyInput, "word embedding table is empty");
  if (words.size() != vectors.size()) throw Error(ErrorCode::kLengthMismatch, "words and vectors differ in count");
  WordEmbeddingTable t;
  t.dim_ = static_cast<int>(vectors.front().size());
  if (t.dim_ < 1) throw Error(ErrorCode::kDimensionMismatch, "word vectors must be non-empty");
  t.words_ = std::move(words);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != static_cast<std::size_t>(t.dim_)) {
      throw Error(ErrorCode::kDimensionMismatch, "word vector for '" + t.words_[i] + "' has the wrong width");
    }
    double n = 0.0;
    for (double v : vectors[i]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite word vector for " + t.words_[i]);
      n += v * v;
    }
    t.values_.insert(t.values_.end(), vectors[i].begin(), vectors[i].end());
    t.norms_.push_back(std::sqrt(n));
    if (!t.index_.emplace(t.words_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate word '" + t.words_[i] + "'");
    }
  }
  return t;
}

std::optional<std::size_t> WordEmbeddingTable::find(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> WordEmbeddingTable::nearest(std::size_t i) const {
  const auto a = vector(i);
  std::optional<std::size_t> best;
  double best_sim = -2.0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j == i) continue;
    const auto b = vector(j);
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
    const double denom = norms_[i] * norms_[j];
    const double sim = denom > 0.0 ? dot / denom : 0.0;
    if (sim > best_sim) {
      best_sim = sim;
      best = j;
    }
  }
  return best;
}

bool is_stopword(const std::string& w) {
  static const std::unordered_set<std::string> kStop = {
      "a",    "an",   "the",  "and",  "or",    "but",  "if",   "of",   "to",   "in",   "on",
      "at",   "by",   "for",  "with", "from",  "as",   "is",   "are",  "was",  "were", "be",
      "been", "am",   "it",   "its",  "this",  "that", "these", "those", "i",  "you",  "he",
      "she",  "we",   "they", "me",   "him",   "her",  "us",   "them", "my",   "your", "his",
      "our",  "their", "not", "no",   "so",    "than", "too",  "very", "just", "do",   "does",
      "did",  "has",  "have", "had",  "will",  "would", "can", "could", "there", "here", "what",
      "which", "who", "whom", "all",  "any",   "some", "such", "only", "own",  "same", "s",
      "t",    "about", "into", "over", "again", "then", "once", "up",  "down", "out",  "off"};
  return kStop.count(w) != 0;
}

namespace {

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

struct Piece {
  std::string text;
  bool is_space = false;
  std::size_t core_begin = 0;
  std::size_t core_end = 0;
};

std::vector<Piece> split_keep_space(const std::string& text) {
  std::vector<Piece> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    std::size_t j = i;
    while (j < text.size() && (std::isspace(static_cast<unsigned char>(text[j])) != 0) == space) ++j;
    Piece p;
    p.text = text.substr(i, j - i);
    p.is_space = space;
    if (!space) {
      std::size_t b = 0, e = p.text.size();
      while (b < e && is_ascii_punct(p.text[b])) ++b;
      while (e > b && is_ascii_punct(p.text[e - 1])) --e;
      p.core_begin = b;
      p.core_end = e;
    }
    pieces.push_back(std::move(p));
    i = j;
  }
  return pieces;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string augment_one(const std::string& text, const WordEmbeddingTable& table, double rate,
                        Rng& rng, std::unordered_map<std::size_t, std::optional<std::size_t>>& memo) {
  auto pieces = split_keep_space(text);
  std::vector<std::pair<std::size_t, std::size_t>> candidates;  // piece, table index
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (p.is_space || p.core_begin == p.core_end) continue;
    const std::string core = lowercase(p.text.substr(p.core_begin, p.core_end - p.core_begin));
    if (is_stopword(core)) continue;
    if (const auto w = table.find(core)) candidates.emplace_back(i, *w);
  }
  if (candidates.empty()) return text;
  const auto n = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(candidates.size()) - 1e-12));
  const auto order = rng.permutation(candidates.size());
  for (std::size_t r = 0; r < std::min(n, candidates.size()); ++r) {
    const auto [piece_idx, word_idx] = candidates[order[r]];
    auto it = memo.find(word_idx);
    if (it == memo.end()) it = memo.emplace(word_idx, table.nearest(word_idx)).first;
    if (!it->second) continue;
    auto& p = pieces[piece_idx];
    std::string repl = table.word(*it->second);
    if (std::isupper(static_cast<unsigned char>(p.text[p.core_begin])) && !repl.empty()) {
      repl[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0])));
    }
    p.text = p.text.substr(0, p.core_begin) + repl + p.text.substr(p.core_end);
  }
  std::string out;
  out.reserve(text.size());
  for (const auto& p : pieces) out += p.text;
  return out;
}

}  // namespace

AugmentationBatch augment_texts(std::span<const std::string> texts, const WordEmbeddingTable& table,
                                double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::kConfig, "replacement rate must lie in (0, 1]");
  if (table.size() == 0) throw Error(ErrorCode::kEmptyInput, "word embedding table is empty");
  AugmentationBatch batch;
  batch.inputs.assign(texts.begin(), texts.end());
  Rng rng(seed);
  std::unordered_map<std::size_t, std::optional<std::size_t>> memo;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    batch.outputs.push_back(augment_one(texts[i], table, rate, rng, memo));
    batch.mapping.push_back(i);
  }
  return batch;
}

std::vector<LabeledReview> augment_minority(std::span<const LabeledReview> reviews, Scheme scheme,
                                            const WordEmbeddingTable& table, double rate,
                                            std::uint64_t seed) {
  const auto counts = class_counts(reviews, scheme);
  std::int64_t largest = 0;
  for (int c = 0; c < arity(scheme); ++c) largest = std::max(largest, counts.per_class[static_cast<std::size_t>(c)]);

  Rng rng(seed);
  std::vector<std::string> inputs;
  std::vector<const LabeledReview*> sources;
  for (int c = 0; c < arity(scheme); ++c) {
    const std::int64_t have = counts.per_class[static_cast<std::size_t>(c)];
    if (have == 0 || have == largest) continue;
    std::vector<const LabeledReview*> members;
    for (const auto& r : reviews) {
      if (r.label.index == c) members.push_back(&r);
    }
    std::vector<std::size_t> order;
    for (std::int64_t s = 0; s < largest - have; ++s) {
      if (order.empty()) {
        order = rng.permutation(members.size());
        std::reverse(order.begin(), order.end());
      }
      sources.push_back(members[order.back()]);
      order.pop_back();
      inputs.push_back(sources.back()->text);
    }
  }
  const auto batch = augment_texts(inputs, table, rate, rng.next());
  std::vector<LabeledReview> additions;
  additions.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    additions.push_back(LabeledReview{"aug-" + std::to_string(i), batch.outputs[batch.mapping[i]],
                                      std::nullopt, sources[i]->label});
  }
  return additions;
}

FeatureMatrix merge_balanced(const FeatureMatrix& original, const FeatureMatrix& additions) {
  if (additions.size() > 0 && additions.dim != original.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "additions differ in width from the original features");
  }
  FeatureMatrix out = original;
  out.synthetic.resize(out.labels.size(), false);
  for (std::size_t i = 0; i < additions.size(); ++i) out.append(additions.row(i), additions.labels[i], true);
  return out;
}

BalancedReviews merge_balanced(std::span<const LabeledReview> original,
                               std::span<const LabeledReview> additions) {
  BalancedReviews out;
  out.reviews.assign(original.begin(), original.end());
  out.synthetic.assign(original.size(), false);
  const std::optional<Scheme> scheme =
      original.empty() ? std::nullopt : std::optional<Scheme>(original.front().label.scheme);
  for (const auto& a : additions) {
    if (scheme && a.label.scheme != *scheme) {
      throw Error(ErrorCode::kSchemeMismatch, "addition " + a.id + " uses a different scheme");
    }
    out.reviews.push_back(a);
    out.synthetic.push_back(true);
  }
  return out;
}

}  // namespace sentiment
