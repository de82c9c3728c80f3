#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sentiment/head.hpp"

namespace sentiment {

// Hot loops of training and inference. Each has a plain serial version,
// kept as the reference, and an OpenMP version.

struct BatchResult {
  double loss_sum = 0.0;
  int correct = 0;
};

// Adds the summed (not averaged) gradient over store[indices] into grads.
BatchResult batch_gradient_serial(const HeadParams& params, const EmbeddingStore& store,
                                  std::span<const std::size_t> indices, HeadInput input,
                                  int max_steps, LossKind kind, HeadParams& grads);

// Same result as the serial kernel up to summation order. Examples are cut
// into a fixed number of contiguous chunks, each chunk summed in order, and
// the chunk partials added in chunk order, so the output does not depend on
// the thread count.
BatchResult batch_gradient_parallel(const HeadParams& params, const EmbeddingStore& store,
                                    std::span<const std::size_t> indices, HeadInput input,
                                    int max_steps, LossKind kind, HeadParams& grads);

inline constexpr std::size_t kReductionChunks = 8;

std::vector<int> predict_serial(const HeadParams& params, const EmbeddingStore& store,
                                HeadInput input, int max_steps);
std::vector<int> predict_parallel(const HeadParams& params, const EmbeddingStore& store,
                                  HeadInput input, int max_steps);

// Indices of the k nearest rows (squared Euclidean, ties to the lower index)
// among `members`, for every member, excluding the member itself.
// rows is n x dim row-major.
std::vector<std::vector<std::size_t>> nearest_neighbors_serial(std::span<const double> rows, int dim,
                                                               std::span<const std::size_t> members,
                                                               int k);
std::vector<std::vector<std::size_t>> nearest_neighbors_parallel(std::span<const double> rows,
                                                                 int dim,
                                                                 std::span<const std::size_t> members,
                                                                 int k);

}  // namespace sentiment
