#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "sentiment/embedding_store.hpp"
#include "sentiment/error.hpp"

using namespace sentiment;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sentiment_unit";
  fs::create_directories(dir);
  return (dir / name).string();
}

ErrorCode load_error(const std::string& path) {
  try {
    load_store(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("load succeeded");
  return ErrorCode::kIo;
}

EmbeddingStore sample_store() {
  EmbeddingStore s(3, StoreMode::kTokens, "unit");
  s.add({"a", 0, 1, {1.f, 2.f, 3.f}});
  s.add({"b_b", 1, 2, {0.1f, -0.2f, 1e-30f, 3.4e38f, -0.f, 7.f}});
  s.add({"c", -1, 1, {std::nextafter(1.f, 2.f), 0.f, -1.f}});
  return s;
}

// In-process stand-in for the embedding service.
class FakeService {
 public:
  FakeService(int dim, int failures) : dim_(dim), failures_(failures) {
    server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      if (failures_ > 0) {
        --failures_;
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json out;
      out["items"] = nlohmann::json::array();
      for (const auto& item : body["items"]) {
        const std::string text = item["text"];
        std::vector<float> v(static_cast<std::size_t>(dim_));
        for (int j = 0; j < dim_; ++j) v[static_cast<std::size_t>(j)] = static_cast<float>(text.size() + j);
        out["items"].push_back({{"id", item["id"]}, {"vector", v}});
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int calls() const { return calls_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int dim_;
  std::atomic<int> failures_;
  std::atomic<int> calls_{0};
};

}  // namespace

TEST_CASE("binary and text round trips are exact") {
  const auto s = sample_store();
  for (auto fmt : {StoreFormat::kBinary, StoreFormat::kText}) {
    const auto path = temp_path(fmt == StoreFormat::kBinary ? "rt.emb" : "rt.txt");
    write_store(s, path, fmt);
    const auto back = load_store(path);
    CHECK(back == s);
    CHECK(back.mode() == StoreMode::kTokens);
    CHECK(back.find("b_b")->rows == 2);
  }
}

TEST_CASE("empty store is valid") {
  const auto path = temp_path("empty.emb");
  write_store(EmbeddingStore(768, StoreMode::kPooled), path);
  const auto back = load_store(path);
  CHECK(back.size() == 0);
  CHECK(back.dim() == 768);
}

TEST_CASE("add validates records") {
  EmbeddingStore s(2, StoreMode::kPooled);
  s.add({"x", 0, 1, {1.f, 2.f}});
  CHECK_THROWS_AS(s.add({"x", 0, 1, {1.f, 2.f}}), Error);
  CHECK_THROWS_AS(s.add({"y", 0, 1, {1.f}}), Error);
  CHECK_THROWS_AS(s.add({"z", 0, 1, {1.f, std::numeric_limits<float>::quiet_NaN()}}), Error);
  CHECK_THROWS_AS(s.add({"w", 0, 2, {1.f, 2.f, 3.f, 4.f}}), Error);
  CHECK(s.label_span() == 1);
}

TEST_CASE("load rejects corrupt files") {
  {
    const auto path = temp_path("wide.txt");
    std::ofstream(path) << "EMB v1 768 1 pooled text\nr 0 1";
    std::ofstream out(path, std::ios::app);
    for (int i = 0; i < 512; ++i) out << " 0.5";
    out << "\n";
    out.close();
    CHECK(load_error(path) == ErrorCode::kDimensionMismatch);
  }
  {
    const auto path = temp_path("count.txt");
    std::ofstream(path) << "EMB v1 2 2 pooled text\nr 0 1 0.5 0.5\n";
    CHECK(load_error(path) == ErrorCode::kCountMismatch);
  }
  {
    const auto path = temp_path("nan.txt");
    std::ofstream(path) << "EMB v1 2 1 pooled text\nr 0 1 nan 0.5\n";
    CHECK(load_error(path) == ErrorCode::kNonFinite);
  }
  {
    const auto path = temp_path("flip.emb");
    write_store(sample_store(), path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(-3, std::ios::end);
    char c = 0;
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0x10);
    f.seekp(-3, std::ios::end);
    f.write(&c, 1);
    f.close();
    CHECK(load_error(path) == ErrorCode::kChecksumMismatch);
  }
  {
    const auto path = temp_path("trunc.emb");
    write_store(sample_store(), path);
    fs::resize_file(path, fs::file_size(path) - 4);
    CHECK(load_error(path) == ErrorCode::kChecksumMismatch);
  }
  CHECK(load_error(temp_path("missing.emb")) == ErrorCode::kMissingFile);
}

TEST_CASE("fnv1a64 known values") {
  CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
  const unsigned char a[] = {'a'};
  CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("synthetic stores") {
  std::vector<ClassSpec> spec{{10, {0, 0, 0, 0}, 1.0}, {10, {5, 5, 5, 5}, 1.0}};
  CHECK(synthetic_store(3, 4, spec) == synthetic_store(3, 4, spec));
  CHECK_FALSE(synthetic_store(3, 4, spec) == synthetic_store(4, 4, spec));
  spec[0].spread = spec[1].spread = 0.0;
  const auto flat = synthetic_store(3, 4, spec);
  for (const auto& r : flat.records()) {
    for (float v : r.values) CHECK(v == (r.label == 0 ? 0.f : 5.f));
  }
  spec[0].count = 0;
  CHECK_THROWS_AS(synthetic_store(3, 4, spec), Error);

  const auto clusters = separated_clusters(1, 16, 2, 5, 10.0, 1.0);
  double dist = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double d = clusters[1].mean[static_cast<std::size_t>(j)] - clusters[0].mean[static_cast<std::size_t>(j)];
    dist += d * d;
  }
  CHECK(std::sqrt(dist) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("remote fetch preserves order") {
  FakeService svc(4, 0);
  RemoteConfig cfg;
  cfg.endpoint = svc.endpoint();
  cfg.dim = 4;
  cfg.batch_size = 2;
  const std::vector<std::string> ids{"x", "y", "z"};
  const std::vector<std::string> texts{"a", "bb", "ccc"};
  const auto recs = fetch_remote(cfg, ids, texts);
  REQUIRE(recs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(recs[i].id == ids[i]);
    CHECK(recs[i].values[0] == static_cast<float>(texts[i].size()));
  }
  CHECK(svc.calls() == 2);
}

TEST_CASE("remote fetch retries transient failures") {
  FakeService svc(4, 1);
  RemoteConfig cfg;
  cfg.endpoint = svc.endpoint();
  cfg.dim = 4;
  cfg.retries = 2;
  cfg.backoff_ms = 1;
  const std::vector<std::string> ids{"x"}, texts{"a"};
  CHECK(fetch_remote(cfg, ids, texts).size() == 1);
  CHECK(svc.calls() == 2);

  FakeService down(4, 10);
  cfg.endpoint = down.endpoint();
  try {
    fetch_remote(cfg, ids, texts);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRemoteService);
  }
  CHECK(down.calls() == 3);
}

TEST_CASE("remote fetch rejects wrong dimension") {
  FakeService svc(512, 0);
  RemoteConfig cfg;
  cfg.endpoint = svc.endpoint();
  cfg.dim = 768;
  const std::vector<std::string> ids{"x"}, texts{"a"};
  try {
    fetch_remote(cfg, ids, texts);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}
