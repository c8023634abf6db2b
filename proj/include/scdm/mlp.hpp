#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdm/csv.hpp"
#include "scdm/rng.hpp"

namespace scdm {

// Fully connected network: tanh on hidden layers, linear output layer.
// Parameters live in one flat array; per layer, W (out x in, row-major)
// followed by b (out).
class Mlp {
 public:
  // Activations recorded by a forward pass; act[0] is the input, act[l] the
  // output of layer l (post-tanh for hidden layers).
  struct Tape {
    std::vector<std::vector<double>> act;
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least input and output sizes");
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("layer sizes must be positive");
      offsets_.push_back(count);
      count += static_cast<std::size_t>(sizes_[l] * sizes_[l + 1] + sizes_[l + 1]);
    }
    params_.assign(count, 0.0);
  }

  // Glorot-uniform weights, zero biases.
  void init_glorot(Rng& rng) {
    for (std::size_t l = 0; l < layers(); ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      const double limit = std::sqrt(6.0 / (in + out));
      double* w = params_.data() + offsets_[l];
      for (int k = 0; k < in * out; ++k) w[k] = rng.uniform(-limit, limit);
      for (int k = 0; k < out; ++k) w[in * out + k] = 0.0;
    }
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::size_t layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  void forward(std::span<const double> in, Tape& tape) const {
    if (static_cast<int>(in.size()) != input_size())
      throw std::invalid_argument("MLP input has " + std::to_string(in.size()) + " values, expected " +
                                  std::to_string(input_size()));
    tape.act.resize(sizes_.size());
    tape.act[0].assign(in.begin(), in.end());
    for (std::size_t l = 0; l < layers(); ++l) {
      const int n_in = sizes_[l], n_out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + n_in * n_out;
      const std::vector<double>& x = tape.act[l];
      std::vector<double>& y = tape.act[l + 1];
      y.resize(static_cast<std::size_t>(n_out));
      const bool hidden = l + 1 < layers();
      for (int o = 0; o < n_out; ++o) {
        double acc = b[o];
        const double* row = w + o * n_in;
        for (int i = 0; i < n_in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = hidden ? std::tanh(acc) : acc;
      }
    }
  }

  std::vector<double> forward(std::span<const double> in) const {
    Tape tape;
    forward(in, tape);
    return tape.act.back();
  }

  // Reverse-mode pass: accumulates d(loss)/d(params) into grad given
  // d(loss)/d(output) for the input recorded on the tape.
  void backward(const Tape& tape, std::span<const double> grad_out, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
    if (static_cast<int>(grad_out.size()) != output_size())
      throw std::invalid_argument("output gradient has the wrong size");
    std::vector<double> delta(grad_out.begin(), grad_out.end());
    std::vector<double> prev;
    for (std::size_t l = layers(); l-- > 0;) {
      const int n_in = sizes_[l], n_out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + n_in * n_out;
      const std::vector<double>& x = tape.act[l];
      for (int o = 0; o < n_out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        gb[o] += d;
        double* grow = gw + o * n_in;
        for (int i = 0; i < n_in; ++i) grow[i] += d * x[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      prev.assign(static_cast<std::size_t>(n_in), 0.0);
      for (int o = 0; o < n_out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        const double* row = w + o * n_in;
        for (int i = 0; i < n_in; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
      }
      // x = tanh(pre) for every layer below the output
      for (int i = 0; i < n_in; ++i) {
        const double a = x[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] *= 1.0 - a * a;
      }
      delta.swap(prev);
    }
  }

  bool all_finite() const {
    for (double p : params_)
      if (!std::isfinite(p)) return false;
    return true;
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// Adam with bias correction.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw std::invalid_argument("Adam: gradient/parameter shape mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("Adam: state/parameter shape mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grads[k];
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grads[k] * grads[k];
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    params[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

// Text checkpoint:
//   scdm-checkpoint 1
//   kind <score|decoder>
//   layers <k> <s_0> ... <s_{k-1}>
//   params <count>
//   one %.17g value per line
inline constexpr int kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const std::string& kind, const Mlp& net) {
  os << "scdm-checkpoint " << kCheckpointVersion << '\n';
  os << "kind " << kind << '\n';
  os << "layers " << net.layer_sizes().size();
  for (int s : net.layer_sizes()) os << ' ' << s;
  os << "\nparams " << net.param_count() << '\n';
  for (double p : net.params()) os << fmt_real(p) << '\n';
}

struct Checkpoint {
  std::string kind;
  Mlp net;
};

inline Checkpoint read_checkpoint(std::istream& is) {
  std::string tag, key;
  int version = 0;
  if (!(is >> tag >> version) || tag != "scdm-checkpoint")
    throw std::runtime_error("not an scdm checkpoint");
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  if (!(is >> key >> ck.kind) || key != "kind") throw std::runtime_error("checkpoint: missing kind");
  std::size_t n_layers = 0;
  if (!(is >> key >> n_layers) || key != "layers") throw std::runtime_error("checkpoint: missing layers");
  std::vector<int> sizes(n_layers);
  for (int& s : sizes)
    if (!(is >> s)) throw std::runtime_error("checkpoint: truncated layer sizes");
  std::size_t count = 0;
  if (!(is >> key >> count) || key != "params") throw std::runtime_error("checkpoint: missing params");
  ck.net = Mlp(sizes);
  if (count != ck.net.param_count()) throw std::runtime_error("checkpoint: parameter count mismatch");
  for (double& p : ck.net.params()) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("checkpoint: truncated parameters");
    p = std::stod(tok);
  }
  return ck;
}

}  // namespace scdm
