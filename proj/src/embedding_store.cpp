#include "sentiment/embedding_store.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sentiment/error.hpp"
#include "sentiment/rng.hpp"

namespace sentiment {

static_assert(std::endian::native == std::endian::little,
              "store I/O writes host floats directly and assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "EMB";
constexpr std::string_view kVersion = "v1";

Error malformed(const std::string& path, std::size_t line, const std::string& what) {
  return Error(ErrorCode::kMalformedRecord, path + ":" + std::to_string(line) + ": " + what);
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (unsigned char c : id) {
    if (c <= ' ') return false;
  }
  return true;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view store_mode_name(StoreMode mode) {
  return mode == StoreMode::kPooled ? "pooled" : "tokens";
}

StoreMode parse_store_mode(std::string_view name) {
  if (name == "pooled") return StoreMode::kPooled;
  if (name == "tokens") return StoreMode::kTokens;
  throw Error(ErrorCode::kConfig, "store mode must be pooled|tokens, got '" + std::string(name) + "'");
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingStore::EmbeddingStore(int dim, StoreMode mode, std::string provenance)
    : dim_(dim), mode_(mode), provenance_(std::move(provenance)) {
  if (dim < 1) throw Error(ErrorCode::kConfig, "embedding dimension must be positive");
}

void EmbeddingStore::add(EmbeddingRecord record) {
  if (!valid_id(record.id)) {
    throw Error(ErrorCode::kMalformedRecord, "record id must be non-empty without whitespace");
  }
  if (record.rows < 1 || (mode_ == StoreMode::kPooled && record.rows != 1)) {
    throw Error(ErrorCode::kMalformedRecord,
                "record " + record.id + " has invalid row count " + std::to_string(record.rows));
  }
  if (record.values.size() != static_cast<std::size_t>(record.rows) * static_cast<std::size_t>(dim_)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "record " + record.id + " has " + std::to_string(record.values.size()) +
                    " values, expected " + std::to_string(record.rows) + " x " + std::to_string(dim_));
  }
  for (float v : record.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "record " + record.id + " has a non-finite value");
  }
  if (index_.count(record.id) != 0) {
    throw Error(ErrorCode::kDuplicateId, "duplicate record id " + record.id);
  }
  index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingStore::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

int EmbeddingStore::label_span() const {
  int k = 0;
  for (const auto& r : records_) k = std::max(k, r.label + 1);
  return k;
}

void write_store(const EmbeddingStore& store, const std::string& path, StoreFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << kMagic << ' ' << kVersion << ' ' << store.dim() << ' ' << store.size() << ' '
      << store_mode_name(store.mode());
  if (format == StoreFormat::kText) {
    out << " text\n";
    char buf[32];
    for (const auto& r : store.records()) {
      out << r.id << ' ' << r.label << ' ' << r.rows;
      for (float v : r.values) {
        std::snprintf(buf, sizeof(buf), " %.9g", static_cast<double>(v));
        out << buf;
      }
      out << '\n';
    }
  } else {
    out << '\n';
    std::size_t floats = 0;
    for (const auto& r : store.records()) {
      out << r.id << ' ' << r.label << ' ' << r.rows << '\n';
      floats += r.values.size();
    }
    std::vector<unsigned char> blob(floats * sizeof(float));
    std::size_t off = 0;
    for (const auto& r : store.records()) {
      std::memcpy(blob.data() + off, r.values.data(), r.values.size() * sizeof(float));
      off += r.values.size() * sizeof(float);
    }
    out << "BIN " << blob.size() << ' ' << hex64(fnv1a64(blob)) << '\n';
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

EmbeddingStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open embedding store " + path);

  std::string line;
  if (!std::getline(in, line)) throw malformed(path, 1, "missing header");
  std::istringstream hs(line);
  std::string magic, version, mode_name, variant;
  long long dim = 0, count = 0;
  if (!(hs >> magic >> version >> dim >> count >> mode_name) || magic != kMagic) {
    throw malformed(path, 1, "bad header '" + line + "'");
  }
  if (version != kVersion) throw malformed(path, 1, "unsupported version " + version);
  if (dim < 1 || count < 0) throw malformed(path, 1, "bad dimension or count");
  hs >> variant;
  const bool text = variant == "text";
  if (!variant.empty() && !text) throw malformed(path, 1, "unknown variant " + variant);

  EmbeddingStore store(static_cast<int>(dim), parse_store_mode(mode_name), path);
  const auto d = static_cast<std::size_t>(dim);

  if (text) {
    std::size_t line_no = 1;
    long long seen = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream rs(line);
      EmbeddingRecord rec;
      if (!(rs >> rec.id >> rec.label >> rec.rows)) throw malformed(path, line_no, "bad record prefix");
      std::string tok;
      while (rs >> tok) {
        char* end = nullptr;
        const float v = std::strtof(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') throw malformed(path, line_no, "bad value '" + tok + "'");
        rec.values.push_back(v);
      }
      if (rec.rows < 1) throw malformed(path, line_no, "bad row count");
      if (rec.values.size() != static_cast<std::size_t>(rec.rows) * d) {
        throw Error(ErrorCode::kDimensionMismatch,
                    path + ":" + std::to_string(line_no) + ": record " + rec.id + " has " +
                        std::to_string(rec.values.size()) + " values; header declares d=" +
                        std::to_string(dim) + " with " + std::to_string(rec.rows) + " row(s)");
      }
      store.add(std::move(rec));
      ++seen;
    }
    if (seen != count) {
      throw Error(ErrorCode::kCountMismatch, path + ": header declares " + std::to_string(count) +
                                                 " records, found " + std::to_string(seen));
    }
    return store;
  }

  std::vector<EmbeddingRecord> recs;
  recs.reserve(static_cast<std::size_t>(count));
  std::size_t floats = 0;
  for (long long i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::kCountMismatch, path + ": manifest ends after " + std::to_string(i) +
                                                 " of " + std::to_string(count) + " records");
    }
    std::istringstream rs(line);
    EmbeddingRecord rec;
    std::string extra;
    if (!(rs >> rec.id >> rec.label >> rec.rows) || (rs >> extra) || rec.rows < 1) {
      throw malformed(path, static_cast<std::size_t>(i) + 2, "bad manifest line '" + line + "'");
    }
    floats += static_cast<std::size_t>(rec.rows) * d;
    recs.push_back(std::move(rec));
  }
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kCountMismatch, path + ": missing BIN line (more records than declared?)");
  }
  std::istringstream bs(line);
  std::string tag, checksum;
  std::size_t bytes = 0;
  if (!(bs >> tag >> bytes >> checksum) || tag != "BIN") {
    throw Error(ErrorCode::kCountMismatch,
                path + ": expected BIN line after " + std::to_string(count) + " manifest records");
  }
  if (bytes != floats * sizeof(float)) {
    throw Error(ErrorCode::kDimensionMismatch,
                path + ": binary section holds " + std::to_string(bytes) + " bytes; header d=" +
                    std::to_string(dim) + " requires " + std::to_string(floats * sizeof(float)));
  }
  std::vector<unsigned char> blob(bytes);
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": binary section truncated");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": trailing bytes after binary section");
  }
  if (hex64(fnv1a64(blob)) != checksum) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": checksum mismatch");
  }
  std::size_t off = 0;
  for (auto& rec : recs) {
    rec.values.resize(static_cast<std::size_t>(rec.rows) * d);
    std::memcpy(rec.values.data(), blob.data() + off, rec.values.size() * sizeof(float));
    off += rec.values.size() * sizeof(float);
    store.add(std::move(rec));
  }
  return store;
}

namespace {

struct Transient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<EmbeddingRecord> post_batch(httplib::Client& client, const RemoteConfig& config,
                                        std::span<const std::string> ids,
                                        std::span<const std::string> texts, StoreMode mode) {
  nlohmann::json req;
  req["items"] = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    req["items"].push_back({{"id", ids[i]}, {"text", texts[i]}});
  }
  const auto res = client.Post(config.path, req.dump(), "application/json");
  if (!res) throw Transient("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw Transient("service returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kRemoteService, "service returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kRemoteService, std::string("unparseable response: ") + e.what());
  }
  if (!body.contains("items") || !body["items"].is_array() || body["items"].size() != ids.size()) {
    throw Error(ErrorCode::kRemoteService, "response item count does not match request");
  }
  const auto d = static_cast<std::size_t>(config.dim);
  std::vector<EmbeddingRecord> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& item = body["items"][i];
    if (!item.contains("id") || item["id"] != ids[i]) {
      throw Error(ErrorCode::kRemoteService, "response id order differs at position " + std::to_string(i));
    }
    EmbeddingRecord rec;
    rec.id = ids[i];
    if (mode == StoreMode::kTokens && item.contains("tokens")) {
      const auto& rows = item["tokens"];
      rec.rows = static_cast<int>(rows.size());
      for (const auto& row : rows) {
        if (row.size() != d) {
          throw Error(ErrorCode::kDimensionMismatch, "response token row has dimension " +
                                                         std::to_string(row.size()) + ", configured " +
                                                         std::to_string(d));
        }
        for (const auto& v : row) rec.values.push_back(v.get<float>());
      }
    } else {
      const auto& vec = item.at("vector");
      if (vec.size() != d) {
        throw Error(ErrorCode::kDimensionMismatch, "response vector for " + rec.id + " has dimension " +
                                                       std::to_string(vec.size()) + ", configured " +
                                                       std::to_string(d));
      }
      for (const auto& v : vec) rec.values.push_back(v.get<float>());
    }
    for (float v : rec.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite value for " + rec.id);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<EmbeddingRecord> fetch_remote(const RemoteConfig& config,
                                          std::span<const std::string> ids,
                                          std::span<const std::string> texts, StoreMode mode) {
  if (ids.size() != texts.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ids and texts differ in length");
  }
  if (config.endpoint.empty()) throw Error(ErrorCode::kConfig, "embedding.endpoint is not set");
  if (config.dim < 1 || config.retries < 0 || config.batch_size < 1) {
    throw Error(ErrorCode::kConfig, "invalid embedding client settings");
  }
  httplib::Client client(config.endpoint);
  client.set_connection_timeout(config.timeout_s, 0);
  client.set_read_timeout(config.timeout_s, 0);

  std::vector<EmbeddingRecord> all;
  all.reserve(ids.size());
  for (std::size_t start = 0; start < ids.size(); start += config.batch_size) {
    const std::size_t n = std::min(config.batch_size, ids.size() - start);
    int backoff = config.backoff_ms;
    for (int attempt = 0;; ++attempt) {
      try {
        auto batch = post_batch(client, config, ids.subspan(start, n), texts.subspan(start, n), mode);
        std::move(batch.begin(), batch.end(), std::back_inserter(all));
        break;
      } catch (const Transient& e) {
        if (attempt >= config.retries) {
          throw Error(ErrorCode::kRemoteService, std::string(e.what()) + " (gave up after " +
                                                     std::to_string(attempt + 1) + " attempts)");
        }
        std::cerr << "embedding service: " << e.what() << "; retrying in " << backoff << " ms\n";
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
    }
  }
  return all;
}

EmbeddingStore synthetic_store(std::uint64_t seed, int dim, std::span<const ClassSpec> classes) {
  if (dim < 1) throw Error(ErrorCode::kConfig, "dimension must be positive");
  EmbeddingStore store(dim, StoreMode::kPooled, "synthetic:" + std::to_string(seed));
  Rng rng(seed);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& spec = classes[c];
    if (spec.count <= 0) throw Error(ErrorCode::kConfig, "class counts must be positive");
    if (spec.mean.size() != static_cast<std::size_t>(dim)) {
      throw Error(ErrorCode::kDimensionMismatch, "class mean has wrong dimension");
    }
    if (!(spec.spread >= 0.0)) throw Error(ErrorCode::kConfig, "spread must be non-negative");
    for (int i = 0; i < spec.count; ++i) {
      EmbeddingRecord rec;
      rec.id = "syn-" + std::to_string(c) + "-" + std::to_string(i);
      rec.label = static_cast<int>(c);
      rec.values.resize(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) {
        const double noise = rng.normal();
        rec.values[static_cast<std::size_t>(j)] =
            static_cast<float>(spec.mean[static_cast<std::size_t>(j)] + spec.spread * noise);
      }
      store.add(std::move(rec));
    }
  }
  return store;
}

std::vector<ClassSpec> separated_clusters(std::uint64_t seed, int dim, int classes, int per_class,
                                          double separation, double spread) {
  if (dim < 1 || classes < 1) throw Error(ErrorCode::kConfig, "bad cluster layout");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> dir(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : dir) v /= norm;

  std::vector<ClassSpec> specs(static_cast<std::size_t>(classes));
  const double center = 0.5 * (classes - 1);
  for (int c = 0; c < classes; ++c) {
    auto& s = specs[static_cast<std::size_t>(c)];
    s.count = per_class;
    s.spread = spread;
    s.mean.resize(static_cast<std::size_t>(dim));
    const double offset = (c - center) * separation * spread;
    for (int j = 0; j < dim; ++j) s.mean[static_cast<std::size_t>(j)] = offset * dir[static_cast<std::size_t>(j)];
  }
  return specs;
}

}  // namespace sentiment
