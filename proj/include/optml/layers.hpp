#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "optml/matrix.hpp"

namespace optml {

enum class Activation { relu, identity };

// ---------------------------------------------------------------------------
// Fully connected layer: output = f(input * W^T + b).

struct DenseLayer {
  Matrix weight;  // out x in
  Matrix bias;    // 1 x out
  Activation activation = Activation::identity;
};

struct DenseCache {
  Matrix input;
  Matrix pre_activation;
  Matrix output;
};

inline DenseCache dense_forward(const DenseLayer& layer, const Matrix& input) {
  DenseCache cache;
  cache.input = input;
  cache.pre_activation = add_row_broadcast(multiply_transposed_b(input, layer.weight), layer.bias);
  cache.output = layer.activation == Activation::relu ? relu(cache.pre_activation)
                                                      : cache.pre_activation;
  return cache;
}

// Accumulates parameter gradients into grad and returns the gradient with
// respect to the layer input.
inline Matrix dense_backward(const DenseLayer& layer, const DenseCache& cache,
                             const Matrix& d_output, DenseLayer& grad) {
  Matrix d_pre = d_output;
  if (layer.activation == Activation::relu) {
    for (std::size_t i = 0; i < d_pre.size(); ++i) {
      if (cache.pre_activation.values()[i] <= 0.0) d_pre.values()[i] = 0.0;
    }
  }
  add_in_place(grad.weight, multiply_transposed_a(d_pre, cache.input));
  add_in_place(grad.bias, column_sums(d_pre));
  return multiply(d_pre, layer.weight);
}

// ---------------------------------------------------------------------------
// LSTM cell. Gates read the concatenation [h_prev, x]; all four gate
// transforms carry a bias.

struct LstmLayer {
  Matrix w_forget, w_input, w_candidate, w_output;  // hidden x (hidden + in)
  Matrix b_forget, b_input, b_candidate, b_output;  // 1 x hidden
};

struct LstmStepCache {
  Matrix concat;                                           // [h_prev, x]
  Matrix forget_gate, input_gate, candidate, output_gate;  // n x hidden
  Matrix cell_prev, cell, cell_tanh, hidden;
};

inline LstmStepCache lstm_step(const LstmLayer& layer, const Matrix& x, const Matrix& h_prev,
                               const Matrix& c_prev) {
  LstmStepCache s;
  s.concat = concat_cols(h_prev, x);
  s.cell_prev = c_prev;
  s.forget_gate =
      sigmoid(add_row_broadcast(multiply_transposed_b(s.concat, layer.w_forget), layer.b_forget));
  s.input_gate =
      sigmoid(add_row_broadcast(multiply_transposed_b(s.concat, layer.w_input), layer.b_input));
  s.candidate = tanh_activation(
      add_row_broadcast(multiply_transposed_b(s.concat, layer.w_candidate), layer.b_candidate));
  s.output_gate =
      sigmoid(add_row_broadcast(multiply_transposed_b(s.concat, layer.w_output), layer.b_output));
  s.cell = add(hadamard(s.forget_gate, c_prev), hadamard(s.input_gate, s.candidate));
  s.cell_tanh = tanh_activation(s.cell);
  s.hidden = hadamard(s.output_gate, s.cell_tanh);
  return s;
}

// Backward through one timestep. d_hidden carries the gradient flowing into
// h_t (from the layer above and from t+1); d_cell_next the gradient into
// C_t from t+1. Writes d_x, d_h_prev, d_c_prev; accumulates into grad.
inline void lstm_step_backward(const LstmLayer& layer, const LstmStepCache& s,
                               const Matrix& d_hidden, const Matrix& d_cell_next, LstmLayer& grad,
                               Matrix& d_x, Matrix& d_h_prev, Matrix& d_c_prev) {
  const std::size_t hidden = s.hidden.cols();
  Matrix d_out_gate = hadamard(d_hidden, s.cell_tanh);
  Matrix d_cell = d_cell_next;
  for (std::size_t i = 0; i < d_cell.size(); ++i) {
    const double th = s.cell_tanh.values()[i];
    d_cell.values()[i] += d_hidden.values()[i] * s.output_gate.values()[i] * (1.0 - th * th);
  }
  Matrix d_forget = hadamard(d_cell, s.cell_prev);
  Matrix d_input = hadamard(d_cell, s.candidate);
  Matrix d_candidate = hadamard(d_cell, s.input_gate);
  d_c_prev = hadamard(d_cell, s.forget_gate);

  auto sigmoid_pre = [](Matrix& d, const Matrix& gate) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double g = gate.values()[i];
      d.values()[i] *= g * (1.0 - g);
    }
  };
  sigmoid_pre(d_forget, s.forget_gate);
  sigmoid_pre(d_input, s.input_gate);
  sigmoid_pre(d_out_gate, s.output_gate);
  for (std::size_t i = 0; i < d_candidate.size(); ++i) {
    const double c = s.candidate.values()[i];
    d_candidate.values()[i] *= 1.0 - c * c;
  }

  add_in_place(grad.w_forget, multiply_transposed_a(d_forget, s.concat));
  add_in_place(grad.w_input, multiply_transposed_a(d_input, s.concat));
  add_in_place(grad.w_candidate, multiply_transposed_a(d_candidate, s.concat));
  add_in_place(grad.w_output, multiply_transposed_a(d_out_gate, s.concat));
  add_in_place(grad.b_forget, column_sums(d_forget));
  add_in_place(grad.b_input, column_sums(d_input));
  add_in_place(grad.b_candidate, column_sums(d_candidate));
  add_in_place(grad.b_output, column_sums(d_out_gate));

  Matrix d_concat = multiply(d_forget, layer.w_forget);
  add_in_place(d_concat, multiply(d_input, layer.w_input));
  add_in_place(d_concat, multiply(d_candidate, layer.w_candidate));
  add_in_place(d_concat, multiply(d_out_gate, layer.w_output));
  d_h_prev = slice_cols(d_concat, 0, hidden);
  d_x = slice_cols(d_concat, hidden, d_concat.cols());
}

// ---------------------------------------------------------------------------
// GRU cell. Matches the bias-free displayed form: all three transforms are
// pure matrix products of the concatenated state.

struct GruLayer {
  Matrix w_update, w_reset, w_candidate;  // hidden x (hidden + in)
};

struct GruStepCache {
  Matrix concat;                    // [h_prev, x]
  Matrix update_gate, reset_gate;   // n x hidden
  Matrix concat_reset;              // [r ⊙ h_prev, x]
  Matrix candidate, hidden_prev, hidden;
};

inline GruStepCache gru_step(const GruLayer& layer, const Matrix& x, const Matrix& h_prev) {
  GruStepCache s;
  s.hidden_prev = h_prev;
  s.concat = concat_cols(h_prev, x);
  s.update_gate = sigmoid(multiply_transposed_b(s.concat, layer.w_update));
  s.reset_gate = sigmoid(multiply_transposed_b(s.concat, layer.w_reset));
  s.concat_reset = concat_cols(hadamard(s.reset_gate, h_prev), x);
  s.candidate = tanh_activation(multiply_transposed_b(s.concat_reset, layer.w_candidate));
  // h = (1 - z) ⊙ h_prev + z ⊙ h~
  s.hidden = s.hidden_prev;
  for (std::size_t i = 0; i < s.hidden.size(); ++i) {
    const double z = s.update_gate.values()[i];
    s.hidden.values()[i] =
        (1.0 - z) * s.hidden_prev.values()[i] + z * s.candidate.values()[i];
  }
  return s;
}

inline void gru_step_backward(const GruLayer& layer, const GruStepCache& s, const Matrix& d_hidden,
                              GruLayer& grad, Matrix& d_x, Matrix& d_h_prev) {
  const std::size_t hidden = s.hidden.cols();
  Matrix d_update = d_hidden;
  Matrix d_candidate = d_hidden;
  d_h_prev = d_hidden;
  for (std::size_t i = 0; i < d_hidden.size(); ++i) {
    const double z = s.update_gate.values()[i];
    d_update.values()[i] =
        d_hidden.values()[i] * (s.candidate.values()[i] - s.hidden_prev.values()[i]);
    d_candidate.values()[i] = d_hidden.values()[i] * z;
    d_h_prev.values()[i] = d_hidden.values()[i] * (1.0 - z);
  }
  for (std::size_t i = 0; i < d_candidate.size(); ++i) {
    const double c = s.candidate.values()[i];
    d_candidate.values()[i] *= 1.0 - c * c;
  }
  add_in_place(grad.w_candidate, multiply_transposed_a(d_candidate, s.concat_reset));
  Matrix d_concat_reset = multiply(d_candidate, layer.w_candidate);
  Matrix d_reset_h = slice_cols(d_concat_reset, 0, hidden);
  Matrix d_x_candidate = slice_cols(d_concat_reset, hidden, d_concat_reset.cols());

  Matrix d_reset = hadamard(d_reset_h, s.hidden_prev);
  add_in_place(d_h_prev, hadamard(d_reset_h, s.reset_gate));

  for (std::size_t i = 0; i < d_update.size(); ++i) {
    const double z = s.update_gate.values()[i];
    d_update.values()[i] *= z * (1.0 - z);
  }
  for (std::size_t i = 0; i < d_reset.size(); ++i) {
    const double r = s.reset_gate.values()[i];
    d_reset.values()[i] *= r * (1.0 - r);
  }
  add_in_place(grad.w_update, multiply_transposed_a(d_update, s.concat));
  add_in_place(grad.w_reset, multiply_transposed_a(d_reset, s.concat));

  Matrix d_concat = multiply(d_update, layer.w_update);
  add_in_place(d_concat, multiply(d_reset, layer.w_reset));
  add_in_place(d_h_prev, slice_cols(d_concat, 0, hidden));
  d_x = add(slice_cols(d_concat, hidden, d_concat.cols()), d_x_candidate);
}

// ---------------------------------------------------------------------------
// Single-head scaled dot-product self-attention over the timestep axis.
// Each sample attends over its own T hidden states:
//   Q = F W_q^T, K = F W_k^T, V = F W_v^T, O = softmax(Q K^T / sqrt(d_k)) V.

struct SelfAttentionLayer {
  Matrix w_query, w_key, w_value;  // d_k x d_h
};

struct AttentionCache {
  // One entry per sample; each matrix has T rows.
  std::vector<Matrix> features;  // T x d_h
  std::vector<Matrix> query, key, value;  // T x d_k
  std::vector<Matrix> weights;  // T x T, rows sum to 1
  std::vector<Matrix> output;   // T x d_k
};

// sequence[t] is the n x d_h hidden batch at timestep t.
inline AttentionCache attention_forward(const SelfAttentionLayer& layer,
                                        const std::vector<Matrix>& sequence) {
  const std::size_t timesteps = sequence.size();
  const std::size_t n = sequence[0].rows();
  const std::size_t d_h = sequence[0].cols();
  const double scaling = 1.0 / std::sqrt(static_cast<double>(layer.w_query.rows()));
  AttentionCache cache;
  cache.features.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Matrix f(timesteps, d_h);
    for (std::size_t t = 0; t < timesteps; ++t) {
      const double* src = sequence[t].row_ptr(s);
      double* dst = f.row_ptr(t);
      for (std::size_t j = 0; j < d_h; ++j) dst[j] = src[j];
    }
    Matrix q = multiply_transposed_b(f, layer.w_query);
    Matrix k = multiply_transposed_b(f, layer.w_key);
    Matrix v = multiply_transposed_b(f, layer.w_value);
    Matrix w = softmax_rows(scale(multiply_transposed_b(q, k), scaling));
    cache.output.push_back(multiply(w, v));
    cache.features.push_back(std::move(f));
    cache.query.push_back(std::move(q));
    cache.key.push_back(std::move(k));
    cache.value.push_back(std::move(v));
    cache.weights.push_back(std::move(w));
  }
  return cache;
}

// d_output[s] is the gradient into sample s's T x d_k attention output.
// Returns the per-timestep gradient into the input sequence.
inline std::vector<Matrix> attention_backward(const SelfAttentionLayer& layer,
                                              const AttentionCache& cache,
                                              const std::vector<Matrix>& d_output,
                                              std::size_t timesteps, std::size_t d_h,
                                              SelfAttentionLayer& grad) {
  const std::size_t n = cache.features.size();
  const double scaling = 1.0 / std::sqrt(static_cast<double>(layer.w_query.rows()));
  std::vector<Matrix> d_sequence(timesteps, Matrix(n, d_h));
  for (std::size_t s = 0; s < n; ++s) {
    const Matrix& w = cache.weights[s];
    Matrix d_weights = multiply_transposed_b(d_output[s], cache.value[s]);  // T x T
    Matrix d_value = multiply_transposed_a(w, d_output[s]);                 // T x d_k
    // Softmax backward per row: dS = (dW - <dW, W>) ⊙ W, then the score
    // scaling factor.
    Matrix d_scores = d_weights;
    for (std::size_t r = 0; r < d_scores.rows(); ++r) {
      const double* wr = w.row_ptr(r);
      double* dr = d_scores.row_ptr(r);
      double dot = 0.0;
      for (std::size_t j = 0; j < d_scores.cols(); ++j) dot += dr[j] * wr[j];
      for (std::size_t j = 0; j < d_scores.cols(); ++j) dr[j] = (dr[j] - dot) * wr[j];
    }
    d_scores = scale(d_scores, scaling);
    Matrix d_query = multiply(d_scores, cache.key[s]);
    Matrix d_key = multiply_transposed_a(d_scores, cache.query[s]);
    add_in_place(grad.w_query, multiply_transposed_a(d_query, cache.features[s]));
    add_in_place(grad.w_key, multiply_transposed_a(d_key, cache.features[s]));
    add_in_place(grad.w_value, multiply_transposed_a(d_value, cache.features[s]));
    Matrix d_features = multiply(d_query, layer.w_query);
    add_in_place(d_features, multiply(d_key, layer.w_key));
    add_in_place(d_features, multiply(d_value, layer.w_value));
    for (std::size_t t = 0; t < timesteps; ++t) {
      const double* src = d_features.row_ptr(t);
      double* dst = d_sequence[t].row_ptr(s);
      for (std::size_t j = 0; j < d_h; ++j) dst[j] = src[j];
    }
  }
  return d_sequence;
}

}  // namespace optml
