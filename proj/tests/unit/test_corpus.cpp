#include <doctest.h>

#include <filesystem>
#include <map>
#include <fstream>

#include "sentiment/corpus.hpp"
#include "sentiment/error.hpp"

using namespace sentiment;
namespace fs = std::filesystem;

namespace {

const std::string kData = TEST_DATA_DIR;

std::string temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sentiment_unit";
  fs::create_directories(dir);
  return (dir / name).string();
}

CorpusDescriptor imdb6() { return {"imdb-fixture", kData + "/imdb6.tsv", CorpusLayout::kDelimited, LabelSource::kImdbScore, 0.2}; }

}  // namespace

TEST_CASE("six record fixture under four classes") {
  const auto split = ingest(imdb6(), Scheme::kFour, 1);
  CHECK(split.train.size() == 5);
  CHECK(split.test.empty());
  CHECK(split.stats.raw == 6);
  CHECK(split.stats.rejected == 1);
  CHECK(split.stats.ingested + split.stats.dropped + split.stats.empty_removed == split.stats.raw);
  std::map<std::string, Polarity> by_id;
  for (const auto& r : split.train) by_id[r.id] = r.label.polarity();
  CHECK(by_id.at("r1") == Polarity::kHighlyNegative);
  CHECK(by_id.at("r2") == Polarity::kNegative);
  CHECK(by_id.at("r4") == Polarity::kPositive);
  CHECK(by_id.at("r5") == Polarity::kHighlyPositive);
  CHECK(by_id.at("r6") == Polarity::kHighlyPositive);
  CHECK(by_id.count("r3") == 0);
}

TEST_CASE("ingestion is deterministic") {
  CorpusDescriptor d{"amazon-fixture", kData + "/amazon40.tsv", CorpusLayout::kDelimited, LabelSource::kFiveStarScore, 0.25};
  const auto a = ingest(d, Scheme::kBinary, 9);
  const auto b = ingest(d, Scheme::kBinary, 9);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].id == b.train[i].id);
  CHECK(a.stats.empty_removed == 1);
  CHECK(a.stats.ingested + a.stats.dropped + a.stats.empty_removed == a.stats.raw);
  CHECK(a.stats.raw == 40);
  CHECK(a.train.size() + a.test.size() == static_cast<std::size_t>(a.stats.ingested));
  for (const auto& r : a.train) CHECK(r.score->value != 3);
  const auto five = ingest(d, Scheme::kFive, 9);
  CHECK(five.stats.dropped == 0);
}

TEST_CASE("directory layout") {
  CorpusDescriptor d{"imdb-dir", kData + "/imdb_dir", CorpusLayout::kDirectory, LabelSource::kImdbScore, 0.2};
  const auto s = ingest(d, Scheme::kFour, 3);
  CHECK(s.train.size() == 5);
  CHECK(s.test.size() == 2);
  CHECK(s.stats.empty_removed == 1);
  const auto c = class_counts(s.train, Scheme::kFour);
  CHECK(c.of(Polarity::kHighlyPositive) == 2);
  CHECK(c.of(Polarity::kPositive) == 1);
  CHECK(c.of(Polarity::kHighlyNegative) == 1);
  CHECK(c.of(Polarity::kNegative) == 1);
  const auto bin = ingest(d, Scheme::kBinary, 3);
  CHECK(class_counts(bin.train, Scheme::kBinary).of(Polarity::kPositive) == 3);
}

TEST_CASE("malformed and missing inputs") {
  const auto path = temp_path("bad.tsv");
  std::ofstream(path) << "x\ttrain\t7\n";
  CorpusDescriptor d{"bad", path, CorpusLayout::kDelimited, LabelSource::kImdbScore, 0.2};
  try {
    ingest(d, Scheme::kBinary, 0);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }
  d.path = temp_path("nope.tsv");
  CHECK_THROWS_AS(ingest(d, Scheme::kBinary, 0), Error);

  const auto dup = temp_path("dup.tsv");
  std::ofstream(dup) << "x\ttrain\t7\t-\tone\nx\ttest\t8\t-\ttwo\n";
  d.path = dup;
  CHECK_THROWS_AS(ingest(d, Scheme::kBinary, 0), Error);

  const auto nine = temp_path("nine.tsv");
  std::ofstream(nine) << "x\ttrain\t9\tneg\ttext\n";
  d.path = nine;
  CHECK_THROWS_AS(ingest(d, Scheme::kFour, 0), Error);
}

TEST_CASE("class counts of parts") {
  CHECK(class_counts({}, Scheme::kFive).total() == 0);
  std::vector<LabeledReview> v;
  for (int i = 0; i < 4; ++i) {
    v.push_back({std::to_string(i), "t", std::nullopt,
                 make_label(Scheme::kBinary, i == 0 ? Polarity::kNegative : Polarity::kPositive)});
  }
  const auto c = class_counts(v, Scheme::kBinary);
  CHECK(c.of(Polarity::kPositive) == 3);
  CHECK(c.of(Polarity::kNegative) == 1);
  CHECK_THROWS_AS(class_counts(v, Scheme::kThree), Error);
}

TEST_CASE("published counts") {
  const auto sst5 = published_counts("sst-5");
  REQUIRE(sst5.has_value());
  const auto& test = sst5->second;
  CHECK(test.of(Polarity::kHighlyPositive) == 370);
  CHECK(test.of(Polarity::kPositive) == 622);
  CHECK(test.of(Polarity::kNeutral) == 448);
  CHECK(test.of(Polarity::kNegative) == 628);
  CHECK(test.of(Polarity::kHighlyNegative) == 302);
  const auto amazon = published_counts("amazon-2");
  CHECK(amazon->first.of(Polarity::kPositive) == 239660);
  CHECK(amazon->first.of(Polarity::kNegative) == 37056);
  CHECK(published_counts("imdb-2")->second.total() == 25000);
  CHECK_FALSE(published_counts("unknown").has_value());

  auto split = ingest(imdb6(), Scheme::kFour, 1);
  split.name = "imdb-4";
  CHECK(verify_published_counts(split) == CountCheck::kSkipped);
}

TEST_CASE("unicode trimming") {
  CHECK(trim_unicode("  x  ") == "x");
  CHECK(trim_unicode("\xc2\xa0" "a b\xe3\x80\x80") == "a b");
  CHECK(trim_unicode("\xe2\x80\x83") == "");
  CHECK(trim_unicode("!!") == "!!");
}

TEST_CASE("review table round trip") {
  std::vector<LabeledReview> v{
      {"a", "tab\there\nnewline \\ slash", std::nullopt, label_at(Scheme::kThree, 1)},
      {"b", "plain", std::nullopt, label_at(Scheme::kThree, 2)}};
  const auto path = temp_path("table.tsv");
  write_review_table(path, v);
  const auto back = to_reviews(read_review_table(path), Scheme::kThree);
  REQUIRE(back.size() == 2);
  CHECK(back[0].text == v[0].text);
  CHECK(back[0].label == v[0].label);
  CHECK(unescape_field(escape_field("\r\t\n\\")) == "\r\t\n\\");
}

TEST_CASE("key value files") {
  const auto path = temp_path("kv.txt");
  write_key_values(path, {{"b", "2"}, {"a", "x=y"}});
  const auto kv = read_key_values(path);
  CHECK(kv.at("a") == "x=y");
  CHECK(kv.at("b") == "2");
  std::ofstream(path) << "# comment\n\nk = v \n";
  CHECK(read_key_values(path).at("k") == "v");
}
