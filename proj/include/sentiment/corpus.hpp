#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentiment/schemes.hpp"

namespace sentiment {

struct LabeledReview {
  std::string id;
  std::string text;
  std::optional<RawScore> score;
  ClassLabel label;
};

enum class CorpusLayout {
  // One review per line: id \t split \t score \t label \t text. split is
  // train|test|-, score and label may be "-".
  kDelimited,
  // <root>/{train,test}/{pos,neg}/<n>_<score>.txt, the IMDb distribution form.
  kDirectory,
};

enum class LabelSource {
  kImdbScore,      // label from a 1..10 score
  kFiveStarScore,  // label from a 1..5 score
  kLabelColumn,    // label column holds a polarity name or class index
};

CorpusLayout parse_layout(std::string_view name);
LabelSource parse_label_source(std::string_view name);

struct CorpusDescriptor {
  std::string name;  // e.g. "imdb-4"
  std::string path;
  CorpusLayout layout = CorpusLayout::kDelimited;
  LabelSource labels = LabelSource::kLabelColumn;
  double test_fraction = 0.2;  // only for records without a split column
};

struct IngestStats {
  std::int64_t raw = 0;
  std::int64_t ingested = 0;
  std::int64_t dropped = 0;        // Dropped outcomes plus rejected scores
  std::int64_t rejected = 0;       // subset of dropped: scores outside the scale
  std::int64_t empty_removed = 0;
};

struct DatasetSplit {
  std::string name;
  Scheme scheme = Scheme::kBinary;
  std::vector<LabeledReview> train;
  std::vector<LabeledReview> test;
  std::optional<std::pair<ClassCounts, ClassCounts>> expected;  // train, test
  IngestStats stats;
};

// Empty-after-trim reviews are removed, labels built from scores (or the
// label column), Dropped outcomes and out-of-scale scores are skipped, and
// each part is sorted by id then shuffled with `seed`.
DatasetSplit ingest(const CorpusDescriptor& source, Scheme scheme, std::uint64_t seed);

ClassCounts class_counts(std::span<const LabeledReview> reviews, Scheme scheme);

// Trims ASCII and Unicode whitespace (UTF-8) from both ends.
std::string_view trim_unicode(std::string_view text);

// Train and test per-class counts published for the named dataset variants
// (imdb-2, mr, sst-2, amazon-2, imdb-3, imdb-4, sst-5, amazon-5).
std::optional<std::pair<ClassCounts, ClassCounts>> published_counts(std::string_view dataset);

enum class CountCheck { kMatched, kSkipped };

// Compares a split with its published counts. Skipped (with a notice on
// stderr) when the dataset is unknown or the split is not the full corpus;
// throws kCountMismatch when a full corpus disagrees.
CountCheck verify_published_counts(DatasetSplit& split);

// Review table: id \t label index \t text, with \\ \t \n \r escaped.
struct TableRow {
  std::string id;
  int label = -1;
  std::string text;
};

std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

void write_review_table(const std::string& path, std::span<const LabeledReview> reviews);
void write_table_rows(const std::string& path, std::span<const TableRow> rows);
std::vector<TableRow> read_review_table(const std::string& path);
std::vector<LabeledReview> to_reviews(std::span<const TableRow> rows, Scheme scheme);

// Flat key=value text, sorted by key.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

}  // namespace sentiment
