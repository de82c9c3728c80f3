#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentiment/embedding_store.hpp"

namespace sentiment {

// BiLSTM over the backbone output, dense layer, softmax.

struct HeadShape {
  int input_dim = 0;  // d
  int hidden = 64;    // h, per direction
  int classes = 2;    // K
  friend bool operator==(const HeadShape&, const HeadShape&) = default;
};

enum class Direction : int { kForward = 0, kBackward = 1 };

// What the BiLSTM runs over: the pooled vector as a length-1 sequence, or
// the token rows of a tokens-mode store.
enum class HeadInput { kPooled, kTokens };
std::string_view head_input_name(HeadInput input);
HeadInput parse_head_input(std::string_view name);

// All trainable weights in one flat buffer so the optimizer can treat them
// uniformly. Per direction the four gates are stacked input, forget, cell,
// output: w_in is 4h x d, w_rec is 4h x h, bias is 4h. The dense layer is
// K x 2h with the forward final state in columns [0, h).
class HeadParams {
 public:
  HeadParams() = default;
  explicit HeadParams(HeadShape shape);

  const HeadShape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data();

  std::span<const double> w_in(Direction dir) const;
  std::span<const double> w_rec(Direction dir) const;
  std::span<const double> bias(Direction dir) const;
  std::span<const double> dense_w() const;
  std::span<const double> dense_b() const;

  std::span<double> w_in(Direction dir);
  std::span<double> w_rec(Direction dir);
  std::span<double> bias(Direction dir);
  std::span<double> dense_w();
  std::span<double> dense_b();

  // Changes on every mutable access; forward caches remember it.
  std::uint64_t generation() const { return generation_; }

  friend bool operator==(const HeadParams& a, const HeadParams& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t dir_offset(Direction dir) const;
  std::size_t dir_size() const;

  HeadShape shape_;
  std::vector<double> data_;
  std::uint64_t generation_ = 0;
};

// Row-major steps x dim view over backbone output.
struct SequenceView {
  std::span<const float> values;
  int steps = 1;
  int dim = 0;

  std::span<const float> step(int t) const {
    return values.subspan(static_cast<std::size_t>(t) * static_cast<std::size_t>(dim),
                          static_cast<std::size_t>(dim));
  }
};

SequenceView sequence_of(const EmbeddingRecord& record, int dim, HeadInput input,
                         int max_steps = 0);

struct ForwardCache {
  HeadShape shape;
  std::uint64_t generation = 0;
  int steps = 0;
  std::vector<double> inputs;                // steps x d, natural order
  std::vector<double> gates[2];              // per direction, processing order, steps x 4h (activated)
  std::vector<double> cells[2];              // steps x h
  std::vector<double> hiddens[2];            // steps x h
  std::vector<double> final_hidden;          // 2h
  std::vector<double> logits;                // K
  std::vector<double> probs;                 // K
};

ForwardCache forward(const HeadParams& params, SequenceView input);

enum class LossKind { kBinaryCrossEntropy, kCategoricalCrossEntropy };
std::string_view loss_kind_name(LossKind kind);

inline constexpr double kProbabilityFloor = 1e-12;

double loss(std::span<const double> probs, int label, LossKind kind);

// d loss / d logits for the clamped loss.
std::vector<double> loss_gradient(std::span<const double> probs, int label, LossKind kind);

// Adds the gradient of loss(forward(params, x), label) into grads.
void backward(const HeadParams& params, const ForwardCache& cache, int label, LossKind kind,
              HeadParams& grads);

// Fresh-gradient convenience form.
HeadParams backward(const HeadParams& params, const ForwardCache& cache, int label, LossKind kind);

enum class DecayMode { kL2, kLearningRate };

// Where epsilon enters the update: added to sqrt of the bias-corrected second
// moment (the usual textbook form) or to the raw sqrt(v) with the correction
// folded into the step size (the TensorFlow form).
enum class EpsilonPlacement { kCorrected, kHat };

struct Hyperparams {
  int batch_size = 32;
  double learning_rate = 3e-5;
  double epsilon = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  DecayMode decay_mode = DecayMode::kL2;
  EpsilonPlacement epsilon_placement = EpsilonPlacement::kCorrected;
  int max_seq_len = 128;
  int epochs = 10;
  LossKind loss = LossKind::kBinaryCrossEntropy;
  std::uint64_t seed = 0;

  void validate() const;
};

Hyperparams binary_preset();
Hyperparams fine_grained_preset();
Hyperparams preset_by_name(std::string_view name);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// One bias-corrected Adam update over flat buffers. The state is sized on
// first use. Throws kNonFinite (leaving everything untouched) when a
// gradient entry is NaN or infinite.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const Hyperparams& hyper);

void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state,
               const Hyperparams& hyper);

enum class Parallelism { kSerial, kOpenMP };

struct HeadConfig {
  int hidden = 64;
  int classes = 0;  // 0: infer from the store labels
  HeadInput input = HeadInput::kPooled;
  Parallelism parallelism = Parallelism::kOpenMP;
};

// Uniform in +-1/sqrt(fan_in) per matrix, zero biases, forget-gate bias 1.
HeadParams init_params(HeadShape shape, std::uint64_t seed);

struct EpochStats {
  double mean_loss = 0.0;
  double accuracy = 0.0;  // percent, from the in-epoch forward passes
  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainResult {
  HeadParams params;
  std::vector<EpochStats> history;
};

TrainResult train(const HeadConfig& config, const EmbeddingStore& store, const Hyperparams& hyper);

struct Evaluation {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const HeadParams& params, const EmbeddingStore& store, HeadInput input,
                    LossKind kind, int max_steps = 0);

// Argmax class per record, ties to the lower index.
std::vector<int> predict(const HeadParams& params, const EmbeddingStore& store,
                         HeadInput input = HeadInput::kPooled, int max_steps = 0,
                         Parallelism parallelism = Parallelism::kOpenMP);

int argmax(std::span<const double> probs);

// HEAD v1 <d> <h> <K> <pooled|tokens> <n>\n followed by n little-endian float32.
void save_params(const HeadParams& params, HeadInput input, const std::string& path);
HeadParams load_params(const std::string& path, HeadInput* input = nullptr);

}  // namespace sentiment
