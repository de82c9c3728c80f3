#include "sentiment/kernels.hpp"

#include <algorithm>
#include <numeric>

#include "sentiment/error.hpp"

namespace sentiment {

namespace {

BatchResult accumulate(const HeadParams& params, const EmbeddingStore& store,
                       std::span<const std::size_t> indices, HeadInput input, int max_steps,
                       LossKind kind, HeadParams& grads) {
  BatchResult out;
  for (std::size_t i : indices) {
    const auto& rec = store[i];
    const auto cache = forward(params, sequence_of(rec, store.dim(), input, max_steps));
    out.loss_sum += loss(cache.probs, rec.label, kind);
    out.correct += argmax(cache.probs) == rec.label ? 1 : 0;
    backward(params, cache, rec.label, kind, grads);
  }
  return out;
}

std::vector<std::size_t> k_smallest(std::span<const double> rows, int dim,
                                    std::span<const std::size_t> members, std::size_t self, int k) {
  const auto d = static_cast<std::size_t>(dim);
  const double* a = rows.data() + self * d;
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(members.size());
  for (std::size_t m : members) {
    if (m == self) continue;
    const double* b = rows.data() + m * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = a[j] - b[j];
      s += diff * diff;
    }
    dist.emplace_back(s, m);
  }
  const auto take = std::min(dist.size(), static_cast<std::size_t>(k));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(take), dist.end());
  std::vector<std::size_t> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace

BatchResult batch_gradient_serial(const HeadParams& params, const EmbeddingStore& store,
                                  std::span<const std::size_t> indices, HeadInput input,
                                  int max_steps, LossKind kind, HeadParams& grads) {
  return accumulate(params, store, indices, input, max_steps, kind, grads);
}

BatchResult batch_gradient_parallel(const HeadParams& params, const EmbeddingStore& store,
                                    std::span<const std::size_t> indices, HeadInput input,
                                    int max_steps, LossKind kind, HeadParams& grads) {
  const std::size_t n = indices.size();
  const std::size_t chunks = std::min(n, kReductionChunks);
  if (chunks <= 1) return accumulate(params, store, indices, input, max_steps, kind, grads);

  std::vector<HeadParams> partial(chunks, HeadParams(params.shape()));
  std::vector<BatchResult> results(chunks);
  bool failed = false;
  Error first_error(ErrorCode::kIo, "");

#pragma omp parallel for schedule(static)
  for (long c = 0; c < static_cast<long>(chunks); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const std::size_t lo = cu * n / chunks;
    const std::size_t hi = (cu + 1) * n / chunks;
    try {
      results[cu] = accumulate(params, store, indices.subspan(lo, hi - lo), input, max_steps, kind,
                               partial[cu]);
    } catch (const Error& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = e;
        }
      }
    }
  }
  if (failed) throw first_error;

  BatchResult total;
  auto g = grads.mutable_data();
  for (std::size_t c = 0; c < chunks; ++c) {
    total.loss_sum += results[c].loss_sum;
    total.correct += results[c].correct;
    const auto p = partial[c].data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += p[i];
  }
  return total;
}

std::vector<int> predict_serial(const HeadParams& params, const EmbeddingStore& store,
                                HeadInput input, int max_steps) {
  std::vector<int> labels(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    labels[i] = argmax(forward(params, sequence_of(store[i], store.dim(), input, max_steps)).probs);
  }
  return labels;
}

std::vector<int> predict_parallel(const HeadParams& params, const EmbeddingStore& store,
                                  HeadInput input, int max_steps) {
  std::vector<int> labels(store.size());
  bool failed = false;
  Error first_error(ErrorCode::kIo, "");
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(store.size()); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    try {
      labels[iu] = argmax(forward(params, sequence_of(store[iu], store.dim(), input, max_steps)).probs);
    } catch (const Error& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = e;
        }
      }
    }
  }
  if (failed) throw first_error;
  return labels;
}

std::vector<std::vector<std::size_t>> nearest_neighbors_serial(std::span<const double> rows, int dim,
                                                               std::span<const std::size_t> members,
                                                               int k) {
  std::vector<std::vector<std::size_t>> out(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) out[i] = k_smallest(rows, dim, members, members[i], k);
  return out;
}

std::vector<std::vector<std::size_t>> nearest_neighbors_parallel(std::span<const double> rows,
                                                                 int dim,
                                                                 std::span<const std::size_t> members,
                                                                 int k) {
  std::vector<std::vector<std::size_t>> out(members.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < static_cast<long>(members.size()); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    out[iu] = k_smallest(rows, dim, members, members[iu], k);
  }
  return out;
}

}  // namespace sentiment
