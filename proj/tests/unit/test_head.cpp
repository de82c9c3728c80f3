#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "sentiment/error.hpp"
#include "sentiment/head.hpp"
#include "sentiment/rng.hpp"

using namespace sentiment;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straight-line evaluation of the cell equations, written independently of
// the library's internal layout helpers.
std::vector<double> reference_probs(const HeadParams& p, const std::vector<float>& x, int steps) {
  const int d = p.shape().input_dim, h = p.shape().hidden, K = p.shape().classes;
  std::vector<double> final_state(static_cast<std::size_t>(2 * h));
  for (int dir = 0; dir < 2; ++dir) {
    const auto D = dir == 0 ? Direction::kForward : Direction::kBackward;
    const auto wi = p.w_in(D), wr = p.w_rec(D), b = p.bias(D);
    std::vector<double> hs(static_cast<std::size_t>(h), 0.0), cs(static_cast<std::size_t>(h), 0.0);
    for (int s = 0; s < steps; ++s) {
      const int t = dir == 0 ? s : steps - 1 - s;
      std::vector<double> z(static_cast<std::size_t>(4 * h));
      for (int r = 0; r < 4 * h; ++r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int j = 0; j < d; ++j) acc += wi[static_cast<std::size_t>(r * d + j)] * x[static_cast<std::size_t>(t * d + j)];
        for (int j = 0; j < h; ++j) acc += wr[static_cast<std::size_t>(r * h + j)] * hs[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(r)] = acc;
      }
      for (int j = 0; j < h; ++j) {
        const double ig = sigmoid(z[static_cast<std::size_t>(j)]);
        const double fg = sigmoid(z[static_cast<std::size_t>(h + j)]);
        const double gg = std::tanh(z[static_cast<std::size_t>(2 * h + j)]);
        const double og = sigmoid(z[static_cast<std::size_t>(3 * h + j)]);
        cs[static_cast<std::size_t>(j)] = fg * cs[static_cast<std::size_t>(j)] + ig * gg;
        hs[static_cast<std::size_t>(j)] = og * std::tanh(cs[static_cast<std::size_t>(j)]);
      }
    }
    std::copy(hs.begin(), hs.end(), final_state.begin() + dir * h);
  }
  std::vector<double> logits(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    double acc = p.dense_b()[static_cast<std::size_t>(k)];
    for (int j = 0; j < 2 * h; ++j) acc += p.dense_w()[static_cast<std::size_t>(k * 2 * h + j)] * final_state[static_cast<std::size_t>(j)];
    logits[static_cast<std::size_t>(k)] = acc;
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& l : logits) sum += (l = std::exp(l - m));
  for (auto& l : logits) l /= sum;
  return logits;
}

HeadParams random_params(HeadShape shape, std::uint64_t seed) {
  HeadParams p(shape);
  Rng rng(seed);
  for (auto& v : p.mutable_data()) v = rng.uniform(-0.5, 0.5);
  return p;
}

std::vector<float> random_input(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = static_cast<float>(rng.normal());
  return x;
}

EmbeddingStore two_blobs(int per_class, std::uint64_t seed) {
  const auto spec = separated_clusters(seed, 4, 2, per_class, 10.0, 1.0);
  return synthetic_store(seed, 4, spec);
}

}  // namespace

TEST_CASE("zero parameters give uniform probabilities and zero state") {
  HeadParams p(HeadShape{8, 5, 5});
  const auto x = random_input(8, 1);
  const auto c = forward(p, SequenceView{x, 1, 8});
  for (double v : c.probs) CHECK(v == doctest::Approx(0.2));
  std::vector<float> zeros(24, 0.f);
  const auto z = forward(p, SequenceView{zeros, 3, 8});
  for (double v : z.final_hidden) CHECK(v == 0.0);
}

TEST_CASE("forward matches the reference evaluation") {
  for (int steps : {1, 3, 6}) {
    const auto p = random_params(HeadShape{8, 5, 5}, 10 + static_cast<std::uint64_t>(steps));
    const auto x = random_input(8 * steps, 20 + static_cast<std::uint64_t>(steps));
    const auto c = forward(p, SequenceView{x, steps, 8});
    const auto ref = reference_probs(p, x, steps);
    double sum = 0.0;
    for (int k = 0; k < 5; ++k) {
      CHECK(c.probs[static_cast<std::size_t>(k)] == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
      CHECK(c.probs[static_cast<std::size_t>(k)] >= 0.0);
      sum += c.probs[static_cast<std::size_t>(k)];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  HeadParams p(HeadShape{8, 5, 2});
  const auto x = random_input(4, 3);
  CHECK_THROWS_AS(forward(p, SequenceView{x, 1, 4}), Error);
}

TEST_CASE("loss values") {
  const std::vector<double> half{0.5, 0.5};
  CHECK(loss(half, 1, LossKind::kBinaryCrossEntropy) == doctest::Approx(0.693147).epsilon(1e-6));
  const std::vector<double> sure{0.0, 1.0, 0.0};
  CHECK(loss(sure, 1, LossKind::kCategoricalCrossEntropy) == 0.0);
  CHECK(loss(sure, 0, LossKind::kCategoricalCrossEntropy) == doctest::Approx(-std::log(1e-12)));
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p(4);
    double s = 0.0;
    for (auto& v : p) s += (v = rng.uniform(0.01, 1.0));
    for (auto& v : p) v /= s;
    const int y = static_cast<int>(rng.below(4));
    CHECK(loss(p, y, LossKind::kCategoricalCrossEntropy) == doctest::Approx(-std::log(p[static_cast<std::size_t>(y)])));
  }
  CHECK_THROWS_AS(loss(sure, 0, LossKind::kBinaryCrossEntropy), Error);
}

TEST_CASE("dense bias gradient is p minus one-hot") {
  const auto p = random_params(HeadShape{8, 5, 5}, 7);
  const auto x = random_input(24, 8);
  const auto c = forward(p, SequenceView{x, 3, 8});
  const auto g = backward(p, c, 2, LossKind::kCategoricalCrossEntropy);
  for (int k = 0; k < 5; ++k) {
    CHECK(g.dense_b()[static_cast<std::size_t>(k)] ==
          doctest::Approx(c.probs[static_cast<std::size_t>(k)] - (k == 2 ? 1.0 : 0.0)));
  }
}

TEST_CASE("gradient vanishes at the clamp floor") {
  HeadParams p(HeadShape{2, 2, 3});
  p.dense_b()[1] = 100.0;
  const std::vector<float> x{0.5f, -0.5f};
  const auto c = forward(p, SequenceView{x, 1, 2});
  const auto g = backward(p, c, 1, LossKind::kCategoricalCrossEntropy);
  for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("stale caches are refused") {
  auto p = random_params(HeadShape{4, 3, 2}, 1);
  const auto x = random_input(4, 2);
  const auto c = forward(p, SequenceView{x, 1, 4});
  p.dense_b()[0] += 1.0;
  CHECK_THROWS_AS(backward(p, c, 0, LossKind::kCategoricalCrossEntropy), Error);
  const auto other = random_params(HeadShape{4, 2, 2}, 1);
  CHECK_THROWS_AS(backward(other, c, 0, LossKind::kCategoricalCrossEntropy), Error);
}

TEST_CASE("adam first step and no-op") {
  Hyperparams hp;
  hp.learning_rate = 0.001;
  std::vector<double> w{1.0};
  const std::vector<double> g{0.5};
  AdamState st;
  adam_update(w, g, st, hp);
  CHECK(std::abs((w[0] - 1.0) - (-0.001)) < 1e-9);
  CHECK(st.t == 1);

  std::vector<double> w2{1.0, -2.0};
  const std::vector<double> zero{0.0, 0.0};
  AdamState st2;
  adam_update(w2, zero, st2, hp);
  CHECK(w2 == std::vector<double>{1.0, -2.0});
  CHECK(st2.t == 1);

  std::vector<double> bad{std::nan("")};
  AdamState st3;
  std::vector<double> w3{1.0};
  CHECK_THROWS_AS(adam_update(w3, bad, st3, hp), Error);
  CHECK(w3[0] == 1.0);
  CHECK(st3.t == 0);
}

TEST_CASE("presets") {
  const auto b = binary_preset();
  CHECK(b.batch_size == 32);
  CHECK(b.learning_rate == 3e-5);
  CHECK(b.epsilon == 1e-8);
  CHECK(b.max_seq_len == 128);
  CHECK(b.epochs == 10);
  CHECK(b.loss == LossKind::kBinaryCrossEntropy);
  const auto f = fine_grained_preset();
  CHECK(f.batch_size == 64);
  CHECK(f.learning_rate == 1e-4);
  CHECK(f.weight_decay == 1e-5);
  CHECK(f.max_seq_len == 256);
  CHECK(f.epochs == 15);
  CHECK(f.loss == LossKind::kCategoricalCrossEntropy);
  CHECK_THROWS_AS(preset_by_name("fast"), Error);
}

TEST_CASE("initialization ranges") {
  const HeadShape shape{16, 8, 3};
  const auto p = init_params(shape, 9);
  CHECK(p == init_params(shape, 9));
  for (auto D : {Direction::kForward, Direction::kBackward}) {
    for (double v : p.w_in(D)) CHECK(std::abs(v) <= 1.0 / std::sqrt(16.0));
    for (double v : p.w_rec(D)) CHECK(std::abs(v) <= 1.0 / std::sqrt(8.0));
    const auto b = p.bias(D);
    for (int j = 0; j < 32; ++j) CHECK(b[static_cast<std::size_t>(j)] == (j >= 8 && j < 16 ? 1.0 : 0.0));
  }
  for (double v : p.dense_w()) CHECK(std::abs(v) <= 1.0 / std::sqrt(16.0));
  for (double v : p.dense_b()) CHECK(v == 0.0);
}

TEST_CASE("training contract") {
  const auto store = two_blobs(40, 3);
  Hyperparams hp = fine_grained_preset();
  hp.epochs = 0;
  hp.seed = 5;
  HeadConfig cfg;
  cfg.hidden = 4;
  const auto none = train(cfg, store, hp);
  CHECK(none.history.empty());
  CHECK(none.params == init_params(HeadShape{4, 4, 2}, 5));

  hp.epochs = 3;
  const auto a = train(cfg, store, hp);
  const auto b = train(cfg, store, hp);
  CHECK(a.history.size() == 3);
  CHECK(a.history == b.history);
  CHECK(a.params == b.params);
  cfg.parallelism = Parallelism::kSerial;
  const auto s = train(cfg, store, hp);
  CHECK(s.history.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(s.history[e].mean_loss == doctest::Approx(a.history[e].mean_loss).epsilon(1e-12));
  }

  CHECK_THROWS_AS(train(cfg, EmbeddingStore(4, StoreMode::kPooled), hp), Error);
  cfg.classes = 1;
  CHECK_THROWS_AS(train(cfg, store, hp), Error);
}

TEST_CASE("prediction") {
  const auto store = two_blobs(5, 4);
  HeadParams zero(HeadShape{4, 3, 2});
  const auto labels = predict(zero, store);
  CHECK(labels.size() == store.size());
  for (int l : labels) CHECK(l == 0);

  EmbeddingStore one(4, StoreMode::kPooled);
  one.add({"only", 0, 1, {1, 2, 3, 4}});
  CHECK(predict(zero, one).size() == 1);

  auto p = random_params(HeadShape{4, 3, 3}, 11);
  const auto before = predict(p, store);
  for (auto& v : p.dense_w()) v *= 3.0;
  for (auto& v : p.dense_b()) v *= 3.0;
  CHECK(predict(p, store) == before);

  HeadParams wide(HeadShape{5, 3, 2});
  CHECK_THROWS_AS(predict(wide, store), Error);
}

TEST_CASE("params file round trip") {
  const auto p = random_params(HeadShape{6, 4, 3}, 2);
  const auto path = (std::filesystem::temp_directory_path() / "sentiment_head.params").string();
  save_params(p, HeadInput::kTokens, path);
  HeadInput input = HeadInput::kPooled;
  const auto back = load_params(path, &input);
  CHECK(input == HeadInput::kTokens);
  CHECK(back.shape() == p.shape());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(back.data()[i] == static_cast<double>(static_cast<float>(p.data()[i])));
  }
}

TEST_CASE("token sequences") {
  EmbeddingRecord r{"t", 0, 3, {1, 2, 3, 4, 5, 6}};
  const auto all = sequence_of(r, 2, HeadInput::kTokens);
  CHECK(all.steps == 3);
  const auto capped = sequence_of(r, 2, HeadInput::kTokens, 2);
  CHECK(capped.steps == 2);
  const auto pooled = sequence_of(r, 2, HeadInput::kPooled);
  CHECK(pooled.steps == 1);
  CHECK(pooled.values[1] == 2.f);
}
