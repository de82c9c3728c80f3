#include "sentiment/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sentiment/error.hpp"
#include "sentiment/rng.hpp"

namespace fs = std::filesystem;

namespace sentiment {

namespace {

enum class SplitTag { kTrain, kTest, kUnassigned };

struct RawRecord {
  std::string id;
  SplitTag split = SplitTag::kUnassigned;
  std::optional<int> score;
  std::string label;  // empty when absent
  std::string text;
  std::string origin;  // file:line for diagnostics
};

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Length of a UTF-8 encoded whitespace code point starting at s[i], or 0.
std::size_t space_at(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= 0x09 && c <= 0x0d)) return 1;
  auto byte = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (c == 0xc2 && (byte(1) == 0x85 || byte(1) == 0xa0)) return 2;
  if (c == 0xe1 && byte(1) == 0x9a && byte(2) == 0x80) return 3;
  if (c == 0xe2 && byte(1) == 0x80 &&
      ((byte(2) >= 0x80 && byte(2) <= 0x8a) || byte(2) == 0xa8 || byte(2) == 0xa9 || byte(2) == 0xaf))
    return 3;
  if (c == 0xe2 && byte(1) == 0x81 && byte(2) == 0x9f) return 3;
  if (c == 0xe3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;
  return 0;
}

// Length of a whitespace code point ending just before s[end], or 0.
std::size_t space_before(std::string_view s, std::size_t end) {
  for (std::size_t len = 1; len <= 3 && len <= end; ++len) {
    if (space_at(s, end - len) == len) return len;
  }
  return 0;
}

std::vector<RawRecord> read_delimited(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open corpus file " + path);
  std::vector<RawRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string origin = path + ":" + std::to_string(line_no);
    std::array<std::string_view, 4> cols;
    std::string_view rest(line);
    for (auto& col : cols) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        throw Error(ErrorCode::kMalformedRecord,
                    origin + ": expected id, split, score, label and text columns");
      }
      col = rest.substr(0, tab);
      rest.remove_prefix(tab + 1);
    }
    RawRecord rec;
    rec.id = std::string(cols[0]);
    rec.origin = origin;
    if (rec.id.empty()) throw Error(ErrorCode::kMalformedRecord, origin + ": empty id");
    if (cols[1] == "train") {
      rec.split = SplitTag::kTrain;
    } else if (cols[1] == "test") {
      rec.split = SplitTag::kTest;
    } else if (cols[1] != "-") {
      throw Error(ErrorCode::kMalformedRecord, origin + ": split must be train|test|-");
    }
    if (cols[2] != "-") {
      rec.score = parse_int(cols[2]);
      if (!rec.score) throw Error(ErrorCode::kMalformedRecord, origin + ": bad score '" + std::string(cols[2]) + "'");
    }
    if (cols[3] != "-") rec.label = std::string(cols[3]);
    rec.text = unescape_field(rest);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RawRecord> read_directory(const std::string& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kMissingFile, "corpus directory not found: " + root);
  struct Entry {
    fs::path file;
    std::string id;
    SplitTag split;
    std::string label;
  };
  std::vector<Entry> entries;
  for (const auto& [split_name, tag] : {std::pair{"train", SplitTag::kTrain}, std::pair{"test", SplitTag::kTest}}) {
    for (const char* polarity : {"neg", "pos"}) {
      const fs::path dir = fs::path(root) / split_name / polarity;
      if (!fs::is_directory(dir)) continue;
      for (const auto& f : fs::directory_iterator(dir)) {
        if (!f.is_regular_file() || f.path().extension() != ".txt") continue;
        entries.push_back(Entry{f.path(), std::string(split_name) + "/" + polarity + "/" + f.path().stem().string(),
                                tag, polarity});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });

  std::vector<RawRecord> out(entries.size());
  bool failed = false;
  Error first_error(ErrorCode::kIo, "");
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < static_cast<long>(entries.size()); ++i) {
    const auto& e = entries[static_cast<std::size_t>(i)];
    auto& rec = out[static_cast<std::size_t>(i)];
    try {
      rec.id = e.id;
      rec.split = e.split;
      rec.label = e.label;
      rec.origin = e.file.string();
      const std::string stem = e.file.stem().string();
      const auto us = stem.rfind('_');
      if (us == std::string::npos) throw Error(ErrorCode::kMalformedRecord, rec.origin + ": file name lacks _<score>");
      rec.score = parse_int(std::string_view(stem).substr(us + 1));
      if (!rec.score) throw Error(ErrorCode::kMalformedRecord, rec.origin + ": bad score in file name");
      std::ifstream in(e.file, std::ios::binary);
      if (!in) throw Error(ErrorCode::kMissingFile, "cannot read " + rec.origin);
      std::ostringstream ss;
      ss << in.rdbuf();
      rec.text = ss.str();
    } catch (const Error& err) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = err;
        }
      }
    }
  }
  if (failed) throw first_error;
  return out;
}

ClassLabel label_from_column(const RawRecord& rec, Scheme scheme) {
  if (rec.label.empty()) {
    throw Error(ErrorCode::kMalformedRecord, rec.origin + ": record has neither score nor label");
  }
  if (const auto idx = parse_int(rec.label)) {
    try {
      return label_at(scheme, *idx);
    } catch (const Error& e) {
      throw Error(e.code(), rec.origin + ": " + e.what());
    }
  }
  try {
    return make_label(scheme, parse_polarity(rec.label));
  } catch (const Error& e) {
    throw Error(e.code(), rec.origin + ": " + e.what());
  }
}

// nullopt: the review is dropped. Throws for label-construction failures
// other than out-of-scale scores, which are reported through `rejected`.
std::optional<ClassLabel> build_label(const RawRecord& rec, LabelSource source, Scheme scheme,
                                      bool& rejected) {
  rejected = false;
  if (source == LabelSource::kLabelColumn || !rec.score) {
    if (source != LabelSource::kLabelColumn) {
      throw Error(ErrorCode::kMalformedRecord, rec.origin + ": score column required");
    }
    return label_from_column(rec, scheme);
  }
  const int score = *rec.score;
  try {
    if (source == LabelSource::kImdbScore) {
      if (scheme == Scheme::kFour && !rec.label.empty()) {
        // A binary parent label alongside the score: refine it by splitting.
        const auto parent = make_label(Scheme::kBinary, parse_polarity(rec.label));
        return binary_tree_split(parent, score);
      }
      return imdb_score_to_label(score, scheme);
    }
    return amazon_score_to_label(score, scheme);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidScore) {
      std::cerr << "notice: " << rec.origin << ": " << e.what() << "; record rejected\n";
      rejected = true;
      return std::nullopt;
    }
    throw Error(e.code(), rec.origin + ": " + e.what());
  }
}

void order(std::vector<LabeledReview>& part, Rng& rng) {
  std::sort(part.begin(), part.end(),
            [](const LabeledReview& a, const LabeledReview& b) { return a.id < b.id; });
  rng.shuffle(part);
}

std::string counts_str(const ClassCounts& c) {
  std::string s;
  for (int i = 0; i < arity(c.scheme); ++i) {
    if (i) s += ',';
    s += std::to_string(c.per_class[static_cast<std::size_t>(i)]);
  }
  return s;
}

}  // namespace

CorpusLayout parse_layout(std::string_view name) {
  if (name == "delimited") return CorpusLayout::kDelimited;
  if (name == "directory") return CorpusLayout::kDirectory;
  throw Error(ErrorCode::kConfig, "layout must be delimited|directory, got '" + std::string(name) + "'");
}

LabelSource parse_label_source(std::string_view name) {
  if (name == "imdb-score") return LabelSource::kImdbScore;
  if (name == "five-star") return LabelSource::kFiveStarScore;
  if (name == "label") return LabelSource::kLabelColumn;
  throw Error(ErrorCode::kConfig, "label source must be imdb-score|five-star|label, got '" + std::string(name) + "'");
}

std::string_view trim_unicode(std::string_view text) {
  std::size_t begin = 0;
  while (begin < text.size()) {
    const std::size_t n = space_at(text, begin);
    if (n == 0) break;
    begin += n;
  }
  std::size_t end = text.size();
  while (end > begin) {
    const std::size_t n = space_before(text, end);
    if (n == 0) break;
    end -= n;
  }
  return text.substr(begin, end - begin);
}

DatasetSplit ingest(const CorpusDescriptor& source, Scheme scheme, std::uint64_t seed) {
  if (!(source.test_fraction >= 0.0 && source.test_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "test fraction must lie in [0, 1]");
  }
  auto raw = source.layout == CorpusLayout::kDelimited ? read_delimited(source.path)
                                                       : read_directory(source.path);
  DatasetSplit split;
  split.name = source.name;
  split.scheme = scheme;
  split.stats.raw = static_cast<std::int64_t>(raw.size());

  std::vector<std::string> seen_ids;
  seen_ids.reserve(raw.size());
  std::vector<LabeledReview> unassigned;
  for (auto& rec : raw) {
    seen_ids.push_back(rec.id);
    const std::string_view cleaned = trim_unicode(rec.text);
    if (cleaned.empty()) {
      ++split.stats.empty_removed;
      continue;
    }
    bool rejected = false;
    const auto label = build_label(rec, source.labels, scheme, rejected);
    if (!label) {
      ++split.stats.dropped;
      if (rejected) ++split.stats.rejected;
      continue;
    }
    LabeledReview review;
    review.id = rec.id;
    review.text = std::string(cleaned);
    if (rec.score) {
      review.score = RawScore{*rec.score, source.labels == LabelSource::kFiveStarScore
                                              ? ScoreScale::kFiveStar
                                              : ScoreScale::kImdb};
    }
    review.label = *label;
    ++split.stats.ingested;
    switch (rec.split) {
      case SplitTag::kTrain: split.train.push_back(std::move(review)); break;
      case SplitTag::kTest: split.test.push_back(std::move(review)); break;
      case SplitTag::kUnassigned: unassigned.push_back(std::move(review)); break;
    }
  }
  std::sort(seen_ids.begin(), seen_ids.end());
  const auto dup = std::adjacent_find(seen_ids.begin(), seen_ids.end());
  if (dup != seen_ids.end()) throw Error(ErrorCode::kDuplicateId, "duplicate review id " + *dup);

  Rng rng(seed);
  if (!unassigned.empty()) {
    order(unassigned, rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(source.test_fraction * static_cast<double>(unassigned.size())));
    for (std::size_t i = 0; i < unassigned.size(); ++i) {
      (i < n_test ? split.test : split.train).push_back(std::move(unassigned[i]));
    }
  }
  order(split.train, rng);
  order(split.test, rng);
  split.expected = published_counts(source.name);
  return split;
}

ClassCounts class_counts(std::span<const LabeledReview> reviews, Scheme scheme) {
  ClassCounts counts{scheme, {}};
  for (const auto& r : reviews) counts.add(r.label);
  return counts;
}

std::optional<std::pair<ClassCounts, ClassCounts>> published_counts(std::string_view dataset) {
  std::string key(dataset);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  struct Row {
    const char* name;
    Scheme scheme;
    std::array<std::int64_t, 5> train;
    std::array<std::int64_t, 5> test;
  };
  // Class-index order: most negative first.
  static const Row kRows[] = {
      {"imdb-2", Scheme::kBinary, {12500, 12500}, {12500, 12500}},
      {"mr", Scheme::kBinary, {4265, 4264}, {1066, 1067}},
      {"sst-2", Scheme::kBinary, {4244, 4300}, {1116, 886}},
      {"amazon-2", Scheme::kBinary, {37056, 239660}, {9231, 59949}},
      {"imdb-3", Scheme::kThree, {14958, 4816, 18227}, {3739, 1204, 4556}},
      {"imdb-4", Scheme::kFour, {11767, 8234, 8530, 11471}, {2941, 2058, 2132, 2867}},
      {"sst-5", Scheme::kFive, {1208, 2512, 1794, 2489, 1482}, {302, 628, 448, 622, 370}},
      {"amazon-5", Scheme::kFive, {21863, 15168, 27767, 57688, 182000}, {5465, 3791, 6941, 14421, 45500}},
  };
  for (const auto& row : kRows) {
    if (key == row.name) {
      return std::pair{ClassCounts{row.scheme, row.train}, ClassCounts{row.scheme, row.test}};
    }
  }
  return std::nullopt;
}

CountCheck verify_published_counts(DatasetSplit& split) {
  if (!split.expected) split.expected = published_counts(split.name);
  if (!split.expected) {
    std::cerr << "notice: no published counts for dataset '" << split.name << "'; check skipped\n";
    return CountCheck::kSkipped;
  }
  const auto& [train_expected, test_expected] = *split.expected;
  if (train_expected.scheme != split.scheme) {
    throw Error(ErrorCode::kSchemeMismatch, "dataset " + split.name + " is published under the " +
                                                std::string(scheme_name(train_expected.scheme)) +
                                                " scheme");
  }
  const auto total = static_cast<std::int64_t>(split.train.size() + split.test.size());
  if (total != train_expected.total() + test_expected.total()) {
    std::cerr << "notice: " << split.name << " holds " << total
              << " reviews, not the full corpus; published count check skipped\n";
    return CountCheck::kSkipped;
  }
  const auto train_actual = class_counts(split.train, split.scheme);
  const auto test_actual = class_counts(split.test, split.scheme);
  if (!(train_actual == train_expected) || !(test_actual == test_expected)) {
    throw Error(ErrorCode::kCountMismatch,
                split.name + ": counts train[" + counts_str(train_actual) + "] test[" +
                    counts_str(test_actual) + "] differ from published train[" +
                    counts_str(train_expected) + "] test[" + counts_str(test_expected) + "]");
  }
  return CountCheck::kMatched;
}

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      const char n = text[i + 1];
      if (n == '\\' || n == 't' || n == 'n' || n == 'r') {
        out += n == '\\' ? '\\' : n == 't' ? '\t' : n == 'n' ? '\n' : '\r';
        ++i;
        continue;
      }
    }
    out += text[i];
  }
  return out;
}

void write_table_rows(const std::string& path, std::span<const TableRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const auto& r : rows) out << r.id << '\t' << r.label << '\t' << escape_field(r.text) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void write_review_table(const std::string& path, std::span<const LabeledReview> reviews) {
  std::vector<TableRow> rows;
  rows.reserve(reviews.size());
  for (const auto& r : reviews) rows.push_back(TableRow{r.id, r.label.index, r.text});
  write_table_rows(path, rows);
}

std::vector<TableRow> read_review_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open review table " + path);
  std::vector<TableRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::kMalformedRecord, path + ":" + std::to_string(line_no) +
                                                   ": expected id, label and text columns");
    }
    const auto label = parse_int(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    if (!label) {
      throw Error(ErrorCode::kMalformedRecord, path + ":" + std::to_string(line_no) + ": bad label index");
    }
    rows.push_back(TableRow{line.substr(0, t1), *label, unescape_field(std::string_view(line).substr(t2 + 1))});
  }
  return rows;
}

std::vector<LabeledReview> to_reviews(std::span<const TableRow> rows, Scheme scheme) {
  std::vector<LabeledReview> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(LabeledReview{r.id, r.text, std::nullopt, label_at(scheme, r.label)});
  return out;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim_unicode(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    kv[std::string(trim_unicode(t.substr(0, eq)))] = std::string(trim_unicode(t.substr(eq + 1)));
  }
  return kv;
}

}  // namespace sentiment
