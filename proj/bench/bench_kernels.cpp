// Serial reference kernels against their OpenMP versions.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "sentiment/embedding_store.hpp"
#include "sentiment/kernels.hpp"
#include "sentiment/rng.hpp"

using namespace sentiment;

namespace {

template <typename F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.2f %10.2f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads: %d, best of %d\n", omp_get_max_threads(), reps);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "openmp ms", "speedup");

  const int dim = 64;
  const auto store = synthetic_store(1, dim, separated_clusters(1, dim, 5, 400, 3.0));
  const auto params = init_params(HeadShape{dim, 32, 5}, 2);
  std::vector<std::size_t> all(store.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  HeadParams gs(params.shape()), gp(params.shape());
  auto zero = [](HeadParams& g) {
    auto d = g.mutable_data();
    std::fill(d.begin(), d.end(), 0.0);
  };
  const double grad_s = best_ms(reps, [&] {
    zero(gs);
    batch_gradient_serial(params, store, all, HeadInput::kPooled, 0, LossKind::kCategoricalCrossEntropy, gs);
  });
  const double grad_p = best_ms(reps, [&] {
    zero(gp);
    batch_gradient_parallel(params, store, all, HeadInput::kPooled, 0, LossKind::kCategoricalCrossEntropy, gp);
  });
  row("batch gradient (2000 x d64)", grad_s, grad_p);

  std::vector<int> ps, pp;
  const double pred_s = best_ms(reps, [&] { ps = predict_serial(params, store, HeadInput::kPooled, 0); });
  const double pred_p = best_ms(reps, [&] { pp = predict_parallel(params, store, HeadInput::kPooled, 0); });
  row("predict (2000 x d64)", pred_s, pred_p);

  Rng rng(3);
  const int n = 3000, nd = 32;
  std::vector<double> rows(static_cast<std::size_t>(n * nd));
  for (auto& v : rows) v = rng.normal();
  std::vector<std::size_t> members(static_cast<std::size_t>(n));
  std::iota(members.begin(), members.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> ns, np;
  const double knn_s = best_ms(reps, [&] { ns = nearest_neighbors_serial(rows, nd, members, 5); });
  const double knn_p = best_ms(reps, [&] { np = nearest_neighbors_parallel(rows, nd, members, 5); });
  row("5-NN (3000 x d32)", knn_s, knn_p);

  double max_diff = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(gs.data()[i] - gp.data()[i]));
  }
  std::printf("agreement: gradient max diff %.2e, predictions %s, neighbors %s\n", max_diff,
              ps == pp ? "equal" : "DIFFER", ns == np ? "equal" : "DIFFER");
  return ps == pp && ns == np ? 0 : 1;
}
