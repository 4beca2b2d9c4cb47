#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "optml/csv.hpp"
#include "optml/network.hpp"
#include "optml/rng.hpp"

namespace optml {

// ---------------------------------------------------------------------------
// Adam optimizer. First and second moment estimates per parameter with
// bias correction:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  long step = 0;
  Network first_moment;
  Network second_moment;
};

inline AdamState make_adam_state(const Network& net) {
  return AdamState{0, zeros_like(net), zeros_like(net)};
}

namespace detail {

template <typename Net>
std::vector<Matrix*> parameter_pointers(Net& net) {
  std::vector<Matrix*> out;
  visit_parameter_blocks(net, [&](Matrix& m) { out.push_back(&m); });
  return out;
}

inline std::vector<const Matrix*> parameter_pointers(const Network& net) {
  std::vector<const Matrix*> out;
  visit_parameter_blocks(net, [&](const Matrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace detail

inline void adam_step(AdamState& state, Network& params, const Network& grads,
                      const AdamConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ParameterError("learning_rate: must be > 0");
  state.step += 1;
  const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto theta = detail::parameter_pointers(params);
  auto g = detail::parameter_pointers(grads);
  auto m = detail::parameter_pointers(state.first_moment);
  auto v = detail::parameter_pointers(state.second_moment);
  for (std::size_t b = 0; b < theta.size(); ++b) {
    auto& tv = theta[b]->values();
    const auto& gv = g[b]->values();
    auto& mv = m[b]->values();
    auto& vv = v[b]->values();
    for (std::size_t i = 0; i < tv.size(); ++i) {
      const double gi = gv[i];
      if (!std::isfinite(gi)) throw NumericError("non-finite gradient in adam step");
      mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * gi;
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = mv[i] / b1t;
      const double v_hat = vv[i] / b2t;
      tv[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Early stopping on validation loss: a new best needs an improvement of
// more than min_delta; training stops after `patience` consecutive epochs
// without one.

class EarlyStopper {
 public:
  EarlyStopper(std::size_t patience, double min_delta)
      : patience_(patience), min_delta_(min_delta) {}

  // Returns true when this epoch sets a new best (snapshot now).
  bool observe(double val_loss) {
    if (val_loss < best_ - min_delta_) {
      best_ = val_loss;
      epochs_since_best_ = 0;
      return true;
    }
    ++epochs_since_best_;
    return false;
  }

  bool should_stop() const { return epochs_since_best_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_best_ = 0;
};

// Sequence runs scale epochs inversely with training-set size:
// floor(200,000,000 / train_count), never below one epoch.
inline std::size_t epoch_budget(std::size_t train_count) {
  if (train_count == 0) throw ParameterError("train_count: must be > 0");
  return std::max<std::size_t>(1, 200000000ULL / train_count);
}

inline double default_learning_rate(Architecture a) {
  return a == Architecture::mlp ? 0.0001 : 0.001;
}

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 2000;
  std::size_t patience = 2000;
  double min_delta = 1e-7;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t shuffle_seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  bool is_best = false;
};

struct TrainResult {
  Network model;  // best-on-validation snapshot
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_mse = std::numeric_limits<double>::infinity();
  std::size_t epochs_run = 0;
};

namespace detail {

inline Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx, std::size_t begin,
                          std::size_t end) {
  Matrix out(end - begin, x.cols());
  for (std::size_t r = begin; r < end; ++r) {
    const double* src = x.row_ptr(idx[r]);
    double* dst = out.row_ptr(r - begin);
    for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = src[j];
  }
  return out;
}

}  // namespace detail

// Minibatch Adam with per-epoch reshuffling and best-on-validation model
// selection. Fully deterministic for a fixed config: init comes from the
// network seed, batch order from shuffle_seed.
inline TrainResult train(const NetworkConfig& net_config, const TrainConfig& cfg,
                         const Matrix& train_x, const std::vector<double>& train_y,
                         const Matrix& val_x, const std::vector<double>& val_y) {
  if (train_x.rows() == 0 || train_x.rows() != train_y.size()) {
    throw ParameterError("train set: " + std::to_string(train_x.rows()) + " rows vs " +
                         std::to_string(train_y.size()) + " targets");
  }
  if (val_x.rows() == 0 || val_x.rows() != val_y.size()) {
    throw ParameterError("validation set: " + std::to_string(val_x.rows()) + " rows vs " +
                         std::to_string(val_y.size()) + " targets");
  }
  if (cfg.batch_size == 0) throw ParameterError("batch_size: must be > 0");
  if (cfg.max_epochs == 0) throw ParameterError("max_epochs: must be > 0");
  if (!(cfg.learning_rate > 0.0)) throw ParameterError("learning_rate: must be > 0");

  Network net = build_network(net_config);
  AdamState adam = make_adam_state(net);
  const AdamConfig adam_cfg{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
  EarlyStopper stopper(cfg.patience, cfg.min_delta);
  Rng shuffle_rng(cfg.shuffle_seed);

  TrainResult result;
  result.model = net;
  const std::size_t n = train_x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double squared_error_sum = 0.0;
    for (std::size_t begin = 0, batch_index = 0; begin < n; begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      Matrix bx = detail::gather_rows(train_x, order, begin, end);
      std::vector<double> by(end - begin);
      for (std::size_t r = begin; r < end; ++r) by[r - begin] = train_y[order[r]];
      try {
        BackwardResult step = backward(net, bx, by);
        adam_step(adam, net, step.gradients, adam_cfg);
        squared_error_sum += step.loss * static_cast<double>(end - begin);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
    }
    const double train_mse = squared_error_sum / static_cast<double>(n);
    double val_mse;
    try {
      val_mse = mse_loss(forward(net, val_x), val_y);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ", validation: " + e.what());
    }
    if (!std::isfinite(val_mse)) {
      throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    }
    const bool is_best = stopper.observe(val_mse);
    if (is_best) {
      result.model = net;
      result.best_epoch = epoch;
      result.best_val_mse = val_mse;
    }
    result.history.push_back({epoch, train_mse, val_mse, is_best});
    result.epochs_run = epoch;
    if (stopper.should_stop()) break;
  }
  return result;
}

inline std::string history_to_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_mse,val_mse,is_best\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_mse) + "," +
           format_double(r.val_mse) + "," + (r.is_best ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace optml
