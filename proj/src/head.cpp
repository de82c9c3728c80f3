#include "sentiment/head.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sentiment/error.hpp"
#include "sentiment/kernels.hpp"
#include "sentiment/rng.hpp"

namespace sentiment {

namespace {

constexpr int kGates = 4;  // input, forget, cell, output

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    sum += out[k];
  }
  for (auto& p : out) p /= sum;
}

void check_shape(const HeadShape& s) {
  if (s.input_dim < 1 || s.hidden < 1 || s.classes < 2) {
    throw Error(ErrorCode::kConfig, "head needs d >= 1, h >= 1 and K >= 2");
  }
}

// Runs one LSTM direction over the cached inputs.
void run_direction(const HeadParams& params, Direction dir, ForwardCache& cache) {
  const int d = cache.shape.input_dim;
  const int h = cache.shape.hidden;
  const int steps = cache.steps;
  const auto w_in = params.w_in(dir);
  const auto w_rec = params.w_rec(dir);
  const auto b = params.bias(dir);
  const int di = static_cast<int>(dir);
  auto& gates = cache.gates[di];
  auto& cells = cache.cells[di];
  auto& hiddens = cache.hiddens[di];
  gates.assign(idx(steps * kGates * h), 0.0);
  cells.assign(idx(steps * h), 0.0);
  hiddens.assign(idx(steps * h), 0.0);

  std::vector<double> z(idx(kGates * h));
  for (int s = 0; s < steps; ++s) {
    const int t = dir == Direction::kForward ? s : steps - 1 - s;
    const double* x = cache.inputs.data() + idx(t * d);
    const double* h_prev = s > 0 ? hiddens.data() + idx((s - 1) * h) : nullptr;
    const double* c_prev = s > 0 ? cells.data() + idx((s - 1) * h) : nullptr;
    for (int r = 0; r < kGates * h; ++r) {
      double acc = b[idx(r)];
      const double* wi = w_in.data() + idx(r * d);
      for (int j = 0; j < d; ++j) acc += wi[j] * x[j];
      if (h_prev) {
        const double* wr = w_rec.data() + idx(r * h);
        for (int j = 0; j < h; ++j) acc += wr[j] * h_prev[j];
      }
      z[idx(r)] = acc;
    }
    double* g = gates.data() + idx(s * kGates * h);
    for (int j = 0; j < h; ++j) {
      const double in_gate = sigmoid(z[idx(j)]);
      const double forget = sigmoid(z[idx(h + j)]);
      const double cand = std::tanh(z[idx(2 * h + j)]);
      const double out_gate = sigmoid(z[idx(3 * h + j)]);
      g[j] = in_gate;
      g[h + j] = forget;
      g[2 * h + j] = cand;
      g[3 * h + j] = out_gate;
      const double c = (c_prev ? forget * c_prev[j] : 0.0) + in_gate * cand;
      cells[idx(s * h + j)] = c;
      hiddens[idx(s * h + j)] = out_gate * std::tanh(c);
    }
  }
}

// Backpropagates d loss / d final hidden state through one direction.
void backprop_direction(const HeadParams& params, Direction dir, const ForwardCache& cache,
                        std::span<const double> d_final, HeadParams& grads) {
  const int d = cache.shape.input_dim;
  const int h = cache.shape.hidden;
  const int steps = cache.steps;
  const int di = static_cast<int>(dir);
  const auto w_rec = params.w_rec(dir);
  auto gw_in = grads.w_in(dir);
  auto gw_rec = grads.w_rec(dir);
  auto gb = grads.bias(dir);
  const auto& gates = cache.gates[di];
  const auto& cells = cache.cells[di];
  const auto& hiddens = cache.hiddens[di];

  std::vector<double> dh(d_final.begin(), d_final.end());
  std::vector<double> dc(idx(h), 0.0);
  std::vector<double> dz(idx(kGates * h));
  for (int s = steps - 1; s >= 0; --s) {
    const int t = dir == Direction::kForward ? s : steps - 1 - s;
    const double* x = cache.inputs.data() + idx(t * d);
    const double* g = gates.data() + idx(s * kGates * h);
    const double* c = cells.data() + idx(s * h);
    const double* c_prev = s > 0 ? cells.data() + idx((s - 1) * h) : nullptr;
    const double* h_prev = s > 0 ? hiddens.data() + idx((s - 1) * h) : nullptr;
    for (int j = 0; j < h; ++j) {
      const double in_gate = g[j];
      const double forget = g[h + j];
      const double cand = g[2 * h + j];
      const double out_gate = g[3 * h + j];
      const double tc = std::tanh(c[j]);
      const double d_out = dh[idx(j)] * tc;
      const double dcj = dc[idx(j)] + dh[idx(j)] * out_gate * (1.0 - tc * tc);
      dz[idx(j)] = dcj * cand * in_gate * (1.0 - in_gate);
      dz[idx(h + j)] = c_prev ? dcj * c_prev[j] * forget * (1.0 - forget) : 0.0;
      dz[idx(2 * h + j)] = dcj * in_gate * (1.0 - cand * cand);
      dz[idx(3 * h + j)] = d_out * out_gate * (1.0 - out_gate);
      dc[idx(j)] = dcj * forget;
    }
    for (int r = 0; r < kGates * h; ++r) {
      const double dzr = dz[idx(r)];
      gb[idx(r)] += dzr;
      double* gwi = gw_in.data() + idx(r * d);
      for (int j = 0; j < d; ++j) gwi[j] += dzr * x[j];
      if (h_prev) {
        double* gwr = gw_rec.data() + idx(r * h);
        for (int j = 0; j < h; ++j) gwr[j] += dzr * h_prev[j];
      }
    }
    if (s > 0) {
      std::fill(dh.begin(), dh.end(), 0.0);
      for (int r = 0; r < kGates * h; ++r) {
        const double dzr = dz[idx(r)];
        const double* wr = w_rec.data() + idx(r * h);
        for (int j = 0; j < h; ++j) dh[idx(j)] += wr[j] * dzr;
      }
    }
  }
}

bool saturated(double p) { return p < kProbabilityFloor || p > 1.0 - kProbabilityFloor; }

}  // namespace

std::string_view head_input_name(HeadInput input) {
  return input == HeadInput::kPooled ? "pooled" : "tokens";
}

HeadInput parse_head_input(std::string_view name) {
  if (name == "pooled") return HeadInput::kPooled;
  if (name == "tokens") return HeadInput::kTokens;
  throw Error(ErrorCode::kConfig, "head.input must be pooled|tokens, got '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind kind) {
  return kind == LossKind::kBinaryCrossEntropy ? "binary-ce" : "categorical-ce";
}

HeadParams::HeadParams(HeadShape shape) : shape_(shape) {
  check_shape(shape);
  data_.assign(2 * dir_size() + idx(shape.classes * 2 * shape.hidden + shape.classes), 0.0);
}

std::size_t HeadParams::dir_size() const {
  const int h = shape_.hidden;
  return idx(kGates * h * shape_.input_dim + kGates * h * h + kGates * h);
}

std::size_t HeadParams::dir_offset(Direction dir) const {
  return static_cast<std::size_t>(dir) * dir_size();
}

std::span<double> HeadParams::mutable_data() {
  ++generation_;
  return data_;
}

std::span<const double> HeadParams::w_in(Direction dir) const {
  return std::span<const double>(data_).subspan(dir_offset(dir),
                                                idx(kGates * shape_.hidden * shape_.input_dim));
}
std::span<const double> HeadParams::w_rec(Direction dir) const {
  return std::span<const double>(data_).subspan(
      dir_offset(dir) + idx(kGates * shape_.hidden * shape_.input_dim),
      idx(kGates * shape_.hidden * shape_.hidden));
}
std::span<const double> HeadParams::bias(Direction dir) const {
  const int h = shape_.hidden;
  return std::span<const double>(data_).subspan(
      dir_offset(dir) + idx(kGates * h * shape_.input_dim + kGates * h * h), idx(kGates * h));
}
std::span<const double> HeadParams::dense_w() const {
  return std::span<const double>(data_).subspan(2 * dir_size(),
                                                idx(shape_.classes * 2 * shape_.hidden));
}
std::span<const double> HeadParams::dense_b() const {
  return std::span<const double>(data_).subspan(
      2 * dir_size() + idx(shape_.classes * 2 * shape_.hidden), idx(shape_.classes));
}

std::span<double> HeadParams::w_in(Direction dir) {
  ++generation_;
  const auto s = std::as_const(*this).w_in(dir);
  return {data_.data() + (s.data() - data_.data()), s.size()};
}
std::span<double> HeadParams::w_rec(Direction dir) {
  ++generation_;
  const auto s = std::as_const(*this).w_rec(dir);
  return {data_.data() + (s.data() - data_.data()), s.size()};
}
std::span<double> HeadParams::bias(Direction dir) {
  ++generation_;
  const auto s = std::as_const(*this).bias(dir);
  return {data_.data() + (s.data() - data_.data()), s.size()};
}
std::span<double> HeadParams::dense_w() {
  ++generation_;
  const auto s = std::as_const(*this).dense_w();
  return {data_.data() + (s.data() - data_.data()), s.size()};
}
std::span<double> HeadParams::dense_b() {
  ++generation_;
  const auto s = std::as_const(*this).dense_b();
  return {data_.data() + (s.data() - data_.data()), s.size()};
}

SequenceView sequence_of(const EmbeddingRecord& record, int dim, HeadInput input, int max_steps) {
  int steps = input == HeadInput::kPooled ? 1 : record.rows;
  if (max_steps > 0) steps = std::min(steps, max_steps);
  return SequenceView{std::span<const float>(record.values).first(idx(steps * dim)), steps, dim};
}

ForwardCache forward(const HeadParams& params, SequenceView input) {
  const HeadShape& shape = params.shape();
  if (input.dim != shape.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "input dimension " + std::to_string(input.dim) +
                                                   " does not match head dimension " +
                                                   std::to_string(shape.input_dim));
  }
  if (input.steps < 1 || input.values.size() != idx(input.steps * input.dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "input sequence is empty or ragged");
  }
  ForwardCache cache;
  cache.shape = shape;
  cache.generation = params.generation();
  cache.steps = input.steps;
  cache.inputs.assign(input.values.begin(), input.values.end());
  run_direction(params, Direction::kForward, cache);
  run_direction(params, Direction::kBackward, cache);

  const int h = shape.hidden;
  const int last = cache.steps - 1;
  cache.final_hidden.resize(idx(2 * h));
  std::copy_n(cache.hiddens[0].begin() + last * h, h, cache.final_hidden.begin());
  std::copy_n(cache.hiddens[1].begin() + last * h, h, cache.final_hidden.begin() + h);

  const auto w = params.dense_w();
  const auto b = params.dense_b();
  cache.logits.resize(idx(shape.classes));
  for (int k = 0; k < shape.classes; ++k) {
    double acc = b[idx(k)];
    for (int j = 0; j < 2 * h; ++j) acc += w[idx(k * 2 * h + j)] * cache.final_hidden[idx(j)];
    cache.logits[idx(k)] = acc;
  }
  cache.probs.resize(idx(shape.classes));
  softmax(cache.logits, cache.probs);
  return cache;
}

double loss(std::span<const double> probs, int label, LossKind kind) {
  if (label < 0 || idx(label) >= probs.size()) {
    throw Error(ErrorCode::kSchemeMismatch, "label outside the probability vector");
  }
  if (kind == LossKind::kBinaryCrossEntropy) {
    if (probs.size() != 2) {
      throw Error(ErrorCode::kConfig, "binary cross-entropy needs exactly two classes");
    }
    const double p_pos = std::clamp(probs[1], kProbabilityFloor, 1.0);
    const double p_neg = std::clamp(1.0 - probs[1], kProbabilityFloor, 1.0);
    return label == 1 ? -std::log(p_pos) : -std::log(p_neg);
  }
  return -std::log(std::clamp(probs[idx(label)], kProbabilityFloor, 1.0));
}

std::vector<double> loss_gradient(std::span<const double> probs, int label, LossKind kind) {
  std::vector<double> g(probs.size(), 0.0);
  if (kind == LossKind::kBinaryCrossEntropy) {
    if (probs.size() != 2) {
      throw Error(ErrorCode::kConfig, "binary cross-entropy needs exactly two classes");
    }
    // Loss on p(positive) = softmax(z)[1]; d/dz1 = p1 - y, d/dz0 = -(p1 - y).
    if (saturated(probs[1])) return g;
    const double r = probs[1] - (label == 1 ? 1.0 : 0.0);
    g[0] = -r;
    g[1] = r;
    return g;
  }
  if (saturated(probs[idx(label)])) return g;
  for (std::size_t k = 0; k < probs.size(); ++k) g[k] = probs[k];
  g[idx(label)] -= 1.0;
  return g;
}

void backward(const HeadParams& params, const ForwardCache& cache, int label, LossKind kind,
              HeadParams& grads) {
  const HeadShape& shape = params.shape();
  if (!(cache.shape == shape) || !(grads.shape() == shape)) {
    throw Error(ErrorCode::kStaleCache, "cache or gradient shape differs from the parameters");
  }
  if (cache.generation != params.generation()) {
    throw Error(ErrorCode::kStaleCache, "parameters changed since the forward pass");
  }
  const int h = shape.hidden;
  if (cache.steps < 1 || cache.probs.size() != idx(shape.classes) ||
      cache.final_hidden.size() != idx(2 * h) ||
      cache.inputs.size() != idx(cache.steps * shape.input_dim) ||
      cache.hiddens[0].size() != idx(cache.steps * h) || cache.hiddens[1].size() != idx(cache.steps * h)) {
    throw Error(ErrorCode::kStaleCache, "forward cache is incomplete");
  }
  const auto dlogits = loss_gradient(cache.probs, label, kind);
  const auto w = params.dense_w();
  auto gw = grads.dense_w();
  auto gb = grads.dense_b();
  std::vector<double> d_hidden(idx(2 * h), 0.0);
  for (int k = 0; k < shape.classes; ++k) {
    const double dk = dlogits[idx(k)];
    gb[idx(k)] += dk;
    for (int j = 0; j < 2 * h; ++j) {
      gw[idx(k * 2 * h + j)] += dk * cache.final_hidden[idx(j)];
      d_hidden[idx(j)] += w[idx(k * 2 * h + j)] * dk;
    }
  }
  const std::span<const double> dh(d_hidden);
  backprop_direction(params, Direction::kForward, cache, dh.first(idx(h)), grads);
  backprop_direction(params, Direction::kBackward, cache, dh.subspan(idx(h)), grads);
}

HeadParams backward(const HeadParams& params, const ForwardCache& cache, int label, LossKind kind) {
  HeadParams grads(params.shape());
  backward(params, cache, label, kind, grads);
  return grads;
}

void Hyperparams::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning rate must be positive");
  if (epochs < 0) throw Error(ErrorCode::kConfig, "epochs must be non-negative");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kConfig, "epsilon must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::kConfig, "Adam betas must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::kConfig, "decay must be non-negative");
  if (max_seq_len < 2) throw Error(ErrorCode::kConfig, "max sequence length must be at least 2");
}

Hyperparams binary_preset() {
  Hyperparams hp;
  hp.batch_size = 32;
  hp.learning_rate = 3e-5;
  hp.epsilon = 1e-8;
  hp.weight_decay = 0.0;
  hp.max_seq_len = 128;
  hp.epochs = 10;
  hp.loss = LossKind::kBinaryCrossEntropy;
  return hp;
}

Hyperparams fine_grained_preset() {
  Hyperparams hp;
  hp.batch_size = 64;
  hp.learning_rate = 1e-4;
  hp.epsilon = 1e-8;
  hp.weight_decay = 1e-5;
  hp.max_seq_len = 256;
  hp.epochs = 15;
  hp.loss = LossKind::kCategoricalCrossEntropy;
  return hp;
}

Hyperparams preset_by_name(std::string_view name) {
  if (name == "binary") return binary_preset();
  if (name == "fine-grained") return fine_grained_preset();
  throw Error(ErrorCode::kConfig, "preset must be binary|fine-grained, got '" + std::string(name) + "'");
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const Hyperparams& hyper) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient and parameter sizes differ");
  }
  if (state.t < 0) throw Error(ErrorCode::kConfig, "Adam step counter is negative");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      std::ostringstream os;
      os << "non-finite gradient at parameter " << i << " (value " << grads[i] << ", step "
         << state.t + 1 << ")";
      throw Error(ErrorCode::kNonFinite, os.str());
    }
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "Adam state does not match the parameters");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double corr1 = 1.0 - std::pow(b1, t);
  const double corr2 = 1.0 - std::pow(b2, t);
  double lr = hyper.learning_rate;
  double l2 = 0.0;
  if (hyper.decay_mode == DecayMode::kL2) {
    l2 = hyper.weight_decay;
  } else {
    lr /= 1.0 + hyper.weight_decay * (t - 1.0);
  }

  if (hyper.epsilon_placement == EpsilonPlacement::kCorrected) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i] + l2 * params[i];
      state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
      state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
      const double m_hat = state.m[i] / corr1;
      const double v_hat = state.v[i] / corr2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  } else {
    const double step = lr * std::sqrt(corr2) / corr1;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i] + l2 * params[i];
      state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
      state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
      params[i] -= step * state.m[i] / (std::sqrt(state.v[i]) + hyper.epsilon);
    }
  }
}

void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state,
               const Hyperparams& hyper) {
  if (!(params.shape() == grads.shape())) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient shape differs from parameters");
  }
  adam_update(params.mutable_data(), grads.data(), state, hyper);
}

HeadParams init_params(HeadShape shape, std::uint64_t seed) {
  HeadParams params(shape);
  Rng rng(seed);
  auto fill = [&](std::span<double> w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : w) v = rng.uniform(-bound, bound);
  };
  for (Direction dir : {Direction::kForward, Direction::kBackward}) {
    fill(params.w_in(dir), shape.input_dim);
    fill(params.w_rec(dir), shape.hidden);
    auto b = params.bias(dir);
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(b.begin() + shape.hidden, b.begin() + 2 * shape.hidden, 1.0);
  }
  fill(params.dense_w(), 2 * shape.hidden);
  return params;
}

TrainResult train(const HeadConfig& config, const EmbeddingStore& store, const Hyperparams& hyper) {
  hyper.validate();
  if (store.empty()) throw Error(ErrorCode::kEmptyInput, "cannot train on an empty store");
  const int classes = config.classes > 0 ? config.classes : std::max(2, store.label_span());
  for (const auto& r : store.records()) {
    if (r.label < 0 || r.label >= classes) {
      throw Error(ErrorCode::kSchemeMismatch, "record " + r.id + " has class index " +
                                                  std::to_string(r.label) + " outside K=" +
                                                  std::to_string(classes));
    }
  }
  if (hyper.loss == LossKind::kBinaryCrossEntropy && classes != 2) {
    throw Error(ErrorCode::kConfig, "binary cross-entropy needs K=2");
  }
  const HeadShape shape{store.dim(), config.hidden, classes};
  TrainResult result{init_params(shape, hyper.seed), {}};
  Rng shuffle_rng(hyper.seed + 1);
  AdamState state;
  HeadParams grads(shape);
  const int max_steps = config.input == HeadInput::kTokens ? hyper.max_seq_len : 0;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto order = shuffle_rng.permutation(store.size());
    double loss_sum = 0.0;
    long correct = 0;
    for (std::size_t start = 0; start < order.size(); start += idx(hyper.batch_size)) {
      const std::size_t n = std::min(idx(hyper.batch_size), order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, n);
      auto g = grads.mutable_data();
      std::fill(g.begin(), g.end(), 0.0);
      const BatchResult br =
          config.parallelism == Parallelism::kOpenMP
              ? batch_gradient_parallel(result.params, store, batch, config.input, max_steps,
                                        hyper.loss, grads)
              : batch_gradient_serial(result.params, store, batch, config.input, max_steps,
                                      hyper.loss, grads);
      loss_sum += br.loss_sum;
      correct += br.correct;
      const double scale = 1.0 / static_cast<double>(n);
      for (auto& v : grads.mutable_data()) v *= scale;
      adam_step(result.params, grads, state, hyper);
    }
    const double n_total = static_cast<double>(store.size());
    result.history.push_back(EpochStats{loss_sum / n_total, 100.0 * static_cast<double>(correct) / n_total});
  }
  return result;
}

int argmax(std::span<const double> probs) {
  int best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[idx(best)]) best = static_cast<int>(k);
  }
  return best;
}

Evaluation evaluate(const HeadParams& params, const EmbeddingStore& store, HeadInput input,
                    LossKind kind, int max_steps) {
  if (store.empty()) throw Error(ErrorCode::kEmptyInput, "cannot evaluate on an empty store");
  double loss_sum = 0.0;
  long correct = 0;
  for (const auto& r : store.records()) {
    const auto cache = forward(params, sequence_of(r, store.dim(), input, max_steps));
    loss_sum += loss(cache.probs, r.label, kind);
    correct += argmax(cache.probs) == r.label ? 1 : 0;
  }
  const double n = static_cast<double>(store.size());
  return Evaluation{loss_sum / n, 100.0 * static_cast<double>(correct) / n};
}

std::vector<int> predict(const HeadParams& params, const EmbeddingStore& store, HeadInput input,
                         int max_steps, Parallelism parallelism) {
  if (store.dim() != params.shape().input_dim && !store.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "store dimension " + std::to_string(store.dim()) +
                                                   " does not match head dimension " +
                                                   std::to_string(params.shape().input_dim));
  }
  return parallelism == Parallelism::kOpenMP ? predict_parallel(params, store, input, max_steps)
                                             : predict_serial(params, store, input, max_steps);
}

void save_params(const HeadParams& params, HeadInput input, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const auto& s = params.shape();
  out << "HEAD v1 " << s.input_dim << ' ' << s.hidden << ' ' << s.classes << ' '
      << head_input_name(input) << ' ' << params.size() << '\n';
  std::vector<float> buf(params.data().begin(), params.data().end());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

HeadParams load_params(const std::string& path, HeadInput* input) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open params file " + path);
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string magic, version, input_name;
  HeadShape shape;
  std::size_t n = 0;
  if (!(hs >> magic >> version >> shape.input_dim >> shape.hidden >> shape.classes >> input_name >> n) ||
      magic != "HEAD") {
    throw Error(ErrorCode::kMalformedRecord, path + ": bad params header");
  }
  if (version != "v1") throw Error(ErrorCode::kMalformedRecord, path + ": unsupported version " + version);
  HeadParams params(shape);
  if (n != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch, path + ": parameter count does not match shapes");
  }
  std::vector<float> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float)) {
    throw Error(ErrorCode::kMalformedRecord, path + ": truncated parameter data");
  }
  auto data = params.mutable_data();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(buf[i])) throw Error(ErrorCode::kNonFinite, path + ": non-finite parameter");
    data[i] = buf[i];
  }
  if (input) *input = parse_head_input(input_name);
  return params;
}

}  // namespace sentiment
