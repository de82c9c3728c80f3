#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sentiment/error.hpp"
#include "sentiment/eval.hpp"

using namespace sentiment;

TEST_CASE("accuracy") {
  const std::vector<int> p{1, 0, 1, 1}, g{1, 0, 0, 1};
  CHECK(accuracy(p, g) == 75.0);
  CHECK(format_percent(accuracy(p, g)) == "75.00");
  CHECK(accuracy(g, g) == 100.0);
  std::vector<int> big(25000, 1), gold(25000, 1);
  for (int i = 0; i < 583; ++i) big[static_cast<std::size_t>(i)] = 0;
  CHECK(format_percent(accuracy(big, gold)) == "97.67");
  CHECK_THROWS_AS(accuracy(p, std::vector<int>{1}), Error);
  CHECK_THROWS_AS(accuracy({}, {}), Error);
}

TEST_CASE("confusion and report consistency") {
  const std::vector<int> p{0, 1, 2, 2, 1}, g{0, 1, 2, 1, 1};
  const auto r = make_report("toy", Scheme::kThree, p, g, {});
  CHECK(r.confusion.total() == 5);
  CHECK(r.confusion.at(1, 2) == 1);
  CHECK(r.confusion.gold_counts().per_class[1] == 3);
  CHECK(r.computed_op == overall_polarity(r.confusion.predicted_counts()));
  CHECK(r.original_op == overall_polarity(r.confusion.gold_counts()));
  CHECK(render_text(r).find("Original OP") != std::string::npos);
  CHECK(render_key_values(r).find("accuracy=80.00\n") != std::string::npos);
  CHECK_THROWS_AS(confusion(Scheme::kBinary, p, g), Error);
}

TEST_CASE("config parsing") {
  KeyValues kv{{"scheme", "three"}, {"seed", "4"}, {"train.epochs", "2"}, {"head.hidden", "3"}};
  const auto c = parse_experiment_config(kv);
  CHECK(c.scheme == Scheme::kThree);
  CHECK(c.hyper.seed == 4);
  CHECK(c.hyper.epochs == 2);
  CHECK(c.head.hidden == 3);
  kv["typo.key"] = "1";
  CHECK_THROWS_AS(parse_experiment_config(kv), Error);
  CHECK_THROWS_AS(parse_experiment_config({{"preset", "binary"}, {"scheme", "five"}}), Error);
  CHECK_THROWS_AS(parse_experiment_config({{"seed", "x"}}), Error);
  CHECK_THROWS_AS(parse_experiment_config({{"dataset.source", "stores"}}), Error);
  try {
    parse_experiment_config({{"train.epochs", "-1"}});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(exit_code(e.code()) == 1);
  }
}

TEST_CASE("synthetic experiment") {
  KeyValues kv{{"scheme", "binary"}, {"seed", "3"}, {"synthetic.per_class", "60"},
               {"synthetic.test_per_class", "20"}, {"head.hidden", "4"}, {"train.epochs", "4"}};
  const auto r = run_experiment(parse_experiment_config(kv));
  CHECK(r.history.size() == 4);
  CHECK(r.confusion.total() == 40);
  CHECK(r.original_op == Polarity::kNeutral);

  kv["train.epochs"] = "0";
  const auto untrained = run_experiment(parse_experiment_config(kv));
  CHECK(untrained.history.empty());
  CHECK(untrained.accuracy >= 0.0);
  CHECK(untrained.accuracy <= 100.0);
}

TEST_CASE("stage errors name the stage") {
  KeyValues kv{{"dataset.source", "stores"}, {"dataset.train_store", "/nonexistent/a.emb"},
               {"dataset.test_store", "/nonexistent/b.emb"}};
  try {
    run_experiment(parse_experiment_config(kv));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("stage prepare") != std::string::npos);
    CHECK(exit_code(e.code()) == 2);
  }
}
