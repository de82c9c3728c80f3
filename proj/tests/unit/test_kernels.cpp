#include <doctest.h>

#include "sentiment/embedding_store.hpp"
#include "sentiment/kernels.hpp"
#include "sentiment/rng.hpp"

using namespace sentiment;

TEST_CASE("serial and parallel batch gradients agree") {
  const auto spec = separated_clusters(2, 6, 3, 30, 4.0, 1.0);
  const auto store = synthetic_store(2, 6, spec);
  const auto params = init_params(HeadShape{6, 5, 3}, 4);
  std::vector<std::size_t> idx(store.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng(1).shuffle(idx);
  for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{64}, idx.size()}) {
    const std::span<const std::size_t> batch(idx.data(), n);
    HeadParams gs(params.shape()), gp(params.shape());
    const auto rs = batch_gradient_serial(params, store, batch, HeadInput::kPooled, 0,
                                          LossKind::kCategoricalCrossEntropy, gs);
    const auto rp = batch_gradient_parallel(params, store, batch, HeadInput::kPooled, 0,
                                            LossKind::kCategoricalCrossEntropy, gp);
    CHECK(rs.correct == rp.correct);
    CHECK(rs.loss_sum == doctest::Approx(rp.loss_sum).epsilon(1e-12));
    for (std::size_t i = 0; i < gs.size(); ++i) {
      CHECK(gs.data()[i] == doctest::Approx(gp.data()[i]).epsilon(1e-10));
    }
  }
  CHECK(predict_serial(params, store, HeadInput::kPooled, 0) ==
        predict_parallel(params, store, HeadInput::kPooled, 0));
}

TEST_CASE("neighbor search agrees and breaks ties low") {
  std::vector<double> rows{0, 0, 1, 0, -1, 0, 0, 2, 5, 5};
  std::vector<std::size_t> members{0, 1, 2, 3, 4};
  const auto s = nearest_neighbors_serial(rows, 2, members, 2);
  CHECK(s == nearest_neighbors_parallel(rows, 2, members, 2));
  CHECK(s[0] == std::vector<std::size_t>{1, 2});
  CHECK(s[4].size() == 2);

  Rng rng(3);
  std::vector<double> big(200 * 5);
  for (auto& v : big) v = rng.normal();
  std::vector<std::size_t> sub;
  for (std::size_t i = 0; i < 200; i += 3) sub.push_back(i);
  CHECK(nearest_neighbors_serial(big, 5, sub, 5) == nearest_neighbors_parallel(big, 5, sub, 5));
}
