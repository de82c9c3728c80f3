#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sentiment {

enum class StoreMode { kPooled, kTokens };

std::string_view store_mode_name(StoreMode mode);
StoreMode parse_store_mode(std::string_view name);

// One review's frozen-backbone output. Pooled records hold a single row
// (the [CLS] state); token records hold one row per unmasked token, row 0
// being [CLS].
struct EmbeddingRecord {
  std::string id;
  int label = -1;  // class index, -1 when unlabeled
  int rows = 1;
  std::vector<float> values;  // rows x dim, row-major

  std::span<const float> row(int r, int dim) const {
    return std::span<const float>(values).subspan(static_cast<std::size_t>(r * dim),
                                                  static_cast<std::size_t>(dim));
  }
  std::span<const float> pooled(int dim) const { return row(0, dim); }
  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(int dim, StoreMode mode, std::string provenance = {});

  // Validates dimension, finiteness and id uniqueness.
  void add(EmbeddingRecord record);

  int dim() const { return dim_; }
  StoreMode mode() const { return mode_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }
  const EmbeddingRecord* find(const std::string& id) const;

  // Largest label index + 1 (0 for an unlabeled or empty store).
  int label_span() const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.mode_ == b.mode_ && a.records_ == b.records_;
  }

 private:
  int dim_ = 0;
  StoreMode mode_ = StoreMode::kPooled;
  std::string provenance_;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class StoreFormat { kBinary, kText };

// Layout:
//   EMB v1 <d> <count> <pooled|tokens>[ text]\n
//   binary: <id> <label> <n>\n per record, BIN <bytes> <fnv1a64>\n, raw LE float32
//   text:   <id> <label> <n> <n*d decimals>\n per record
void write_store(const EmbeddingStore& store, const std::string& path,
                 StoreFormat format = StoreFormat::kBinary);
EmbeddingStore load_store(const std::string& path);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

struct RemoteConfig {
  std::string endpoint;  // http://host:port
  std::string path = "/v1/embed";
  int dim = 768;
  int retries = 3;
  int backoff_ms = 100;  // doubled after every failed attempt
  int timeout_s = 30;
  std::size_t batch_size = 32;
};

// Posts {"items":[{"id","text"}]} and expects {"items":[{"id","vector"}]}
// (optionally "tokens": [[...], ...]) in the same order. Either every id
// gets a record or an Error is thrown.
std::vector<EmbeddingRecord> fetch_remote(const RemoteConfig& config,
                                          std::span<const std::string> ids,
                                          std::span<const std::string> texts,
                                          StoreMode mode = StoreMode::kPooled);

struct ClassSpec {
  int count = 0;
  std::vector<double> mean;
  double spread = 1.0;  // per-coordinate standard deviation
};

// Gaussian clusters, class i labeled i, deterministic given seed.
EmbeddingStore synthetic_store(std::uint64_t seed, int dim, std::span<const ClassSpec> classes);

// Class means placed at multiples of `separation * spread` along a seeded
// random unit direction, centered on the origin.
std::vector<ClassSpec> separated_clusters(std::uint64_t seed, int dim, int classes, int per_class,
                                          double separation, double spread = 1.0);

}  // namespace sentiment
