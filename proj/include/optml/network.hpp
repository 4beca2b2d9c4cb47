#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optml/errors.hpp"
#include "optml/layers.hpp"
#include "optml/matrix.hpp"
#include "optml/rng.hpp"

namespace optml {

enum class Architecture { mlp, lstm, sa_lstm, sa_gru };
enum class AttentionPool { last, mean };

inline std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::mlp: return "mlp";
    case Architecture::lstm: return "lstm";
    case Architecture::sa_lstm: return "sa_lstm";
    case Architecture::sa_gru: return "sa_gru";
  }
  return "?";
}

inline Architecture architecture_from_name(const std::string& s) {
  if (s == "mlp") return Architecture::mlp;
  if (s == "lstm") return Architecture::lstm;
  if (s == "sa_lstm") return Architecture::sa_lstm;
  if (s == "sa_gru") return Architecture::sa_gru;
  throw ParameterError("unknown architecture '" + s + "' (expected mlp|lstm|sa_lstm|sa_gru)");
}

struct NetworkConfig {
  Architecture architecture = Architecture::mlp;
  std::size_t input_width = 6;
  std::size_t timesteps = 1;      // 1 for mlp, window length for recurrent nets
  std::size_t hidden_width = 64;
  std::size_t depth = 2;          // hidden dense layers (mlp) or stacked recurrent layers
  std::size_t attention_dim = 0;  // d_k; 0 means hidden_width
  AttentionPool pool = AttentionPool::last;
  Activation mlp_activation = Activation::relu;
  std::uint64_t seed = 0;
};

inline bool is_recurrent(Architecture a) { return a != Architecture::mlp; }
inline bool has_attention(Architecture a) {
  return a == Architecture::sa_lstm || a == Architecture::sa_gru;
}

inline void validate(const NetworkConfig& c) {
  if (c.input_width < 1) throw ParameterError("input_width: must be >= 1");
  if (c.hidden_width < 1) throw ParameterError("hidden_width: must be >= 1");
  if (c.depth < 1) throw ParameterError("depth: must be >= 1");
  if (c.timesteps < 1) throw ParameterError("timesteps: must be >= 1");
  if (c.architecture == Architecture::mlp && c.timesteps != 1) {
    throw ParameterError("timesteps: mlp requires timesteps == 1, got " +
                         std::to_string(c.timesteps));
  }
  if (is_recurrent(c.architecture) && c.input_width % c.timesteps != 0) {
    throw ParameterError("input_width: " + std::to_string(c.input_width) +
                         " not divisible by timesteps " + std::to_string(c.timesteps));
  }
}

inline std::size_t attention_dim(const NetworkConfig& c) {
  return c.attention_dim == 0 ? c.hidden_width : c.attention_dim;
}

// Report/filename tag: MLP, LSTM_6F, SA_GRU_21F, ...
inline std::string model_tag(const NetworkConfig& c) {
  std::string arch = architecture_name(c.architecture);
  for (auto& ch : arch) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (c.architecture == Architecture::mlp && c.input_width == 6) return "MLP";
  return arch + "_" + std::to_string(c.input_width) + "F";
}

struct Network {
  NetworkConfig config;
  std::vector<DenseLayer> dense_layers;  // mlp hidden stack
  std::vector<LstmLayer> lstm_layers;
  std::vector<GruLayer> gru_layers;
  SelfAttentionLayer attention;
  DenseLayer output_layer;
};

// Enumerates every parameter block in declaration order. Serialization,
// Adam state, flattening, and counting all ride on this single order.
template <typename Net, typename F>
void visit_parameter_blocks(Net& net, F&& f) {
  for (auto& layer : net.dense_layers) {
    f(layer.weight);
    f(layer.bias);
  }
  for (auto& layer : net.lstm_layers) {
    f(layer.w_forget);
    f(layer.w_input);
    f(layer.w_candidate);
    f(layer.w_output);
    f(layer.b_forget);
    f(layer.b_input);
    f(layer.b_candidate);
    f(layer.b_output);
  }
  for (auto& layer : net.gru_layers) {
    f(layer.w_update);
    f(layer.w_reset);
    f(layer.w_candidate);
  }
  if (has_attention(net.config.architecture)) {
    f(net.attention.w_query);
    f(net.attention.w_key);
    f(net.attention.w_value);
  }
  f(net.output_layer.weight);
  f(net.output_layer.bias);
}

inline std::size_t parameter_count(const Network& net) {
  std::size_t n = 0;
  visit_parameter_blocks(net, [&](const Matrix& m) { n += m.size(); });
  return n;
}

inline std::vector<double> flatten_parameters(const Network& net) {
  std::vector<double> out;
  out.reserve(parameter_count(net));
  visit_parameter_blocks(net, [&](const Matrix& m) {
    out.insert(out.end(), m.values().begin(), m.values().end());
  });
  return out;
}

inline void set_parameters(Network& net, const std::vector<double>& flat) {
  std::size_t pos = 0;
  visit_parameter_blocks(net, [&](Matrix& m) {
    if (pos + m.size() > flat.size()) throw ShapeError("set_parameters: vector too short");
    std::copy(flat.begin() + pos, flat.begin() + pos + m.size(), m.values().begin());
    pos += m.size();
  });
  if (pos != flat.size()) {
    throw ShapeError("set_parameters: expected " + std::to_string(pos) + " values, got " +
                     std::to_string(flat.size()));
  }
}

namespace detail {

inline Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                     Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

inline std::size_t per_step_width(const NetworkConfig& c) { return c.input_width / c.timesteps; }

}  // namespace detail

// Seeded Glorot-uniform weights, zero biases. The same seed always yields
// bit-identical parameters.
inline Network build_network(const NetworkConfig& config) {
  validate(config);
  Network net;
  net.config = config;
  Rng rng(config.seed);
  const std::size_t h = config.hidden_width;
  if (config.architecture == Architecture::mlp) {
    std::size_t in = config.input_width;
    for (std::size_t i = 0; i < config.depth; ++i) {
      DenseLayer layer;
      layer.weight = detail::glorot(h, in, in, h, rng);
      layer.bias = Matrix(1, h);
      layer.activation = config.mlp_activation;
      net.dense_layers.push_back(std::move(layer));
      in = h;
    }
  } else {
    std::size_t in = detail::per_step_width(config);
    for (std::size_t i = 0; i < config.depth; ++i) {
      const std::size_t cat = h + in;
      if (config.architecture == Architecture::lstm ||
          config.architecture == Architecture::sa_lstm) {
        LstmLayer layer;
        layer.w_forget = detail::glorot(h, cat, cat, h, rng);
        layer.w_input = detail::glorot(h, cat, cat, h, rng);
        layer.w_candidate = detail::glorot(h, cat, cat, h, rng);
        layer.w_output = detail::glorot(h, cat, cat, h, rng);
        layer.b_forget = Matrix(1, h);
        layer.b_input = Matrix(1, h);
        layer.b_candidate = Matrix(1, h);
        layer.b_output = Matrix(1, h);
        net.lstm_layers.push_back(std::move(layer));
      } else {
        GruLayer layer;
        layer.w_update = detail::glorot(h, cat, cat, h, rng);
        layer.w_reset = detail::glorot(h, cat, cat, h, rng);
        layer.w_candidate = detail::glorot(h, cat, cat, h, rng);
        net.gru_layers.push_back(std::move(layer));
      }
      in = h;
    }
    if (has_attention(config.architecture)) {
      const std::size_t dk = attention_dim(config);
      net.attention.w_query = detail::glorot(dk, h, h, dk, rng);
      net.attention.w_key = detail::glorot(dk, h, h, dk, rng);
      net.attention.w_value = detail::glorot(dk, h, h, dk, rng);
    }
  }
  const std::size_t pooled = config.architecture == Architecture::mlp ? h
                             : has_attention(config.architecture)     ? attention_dim(config)
                                                                      : h;
  net.output_layer.weight = detail::glorot(1, pooled, pooled, 1, rng);
  net.output_layer.bias = Matrix(1, 1);
  net.output_layer.activation = Activation::identity;
  return net;
}

// Same shapes as net, all parameters zero. Gradient accumulator.
inline Network zeros_like(const Network& net) {
  Network g = net;
  visit_parameter_blocks(g, [](Matrix& m) { std::fill(m.values().begin(), m.values().end(), 0.0); });
  return g;
}

struct ForwardCaches {
  std::vector<DenseCache> dense;
  std::vector<std::vector<LstmStepCache>> lstm;  // [layer][t]
  std::vector<std::vector<GruStepCache>> gru;    // [layer][t]
  std::vector<Matrix> top_sequence;              // per-timestep top hidden batches
  AttentionCache attention;
  Matrix pooled;  // n x pooled input to the output layer
  DenseCache output;
};

namespace detail {

inline void require_finite(const Matrix& m, const std::string& where) {
  if (!m.all_finite()) throw NumericError("non-finite activation in " + where);
}

// Timestep t (0 = oldest) lives in feature block timesteps-1-t: block 0
// of the flat layout is the most recent observation.
inline Matrix timestep_block(const Matrix& batch, const NetworkConfig& c, std::size_t t) {
  const std::size_t ps = per_step_width(c);
  const std::size_t block = c.timesteps - 1 - t;
  return slice_cols(batch, block * ps, (block + 1) * ps);
}

}  // namespace detail

inline ForwardCaches forward_with_caches(const Network& net, const Matrix& batch) {
  const NetworkConfig& c = net.config;
  if (batch.cols() != c.input_width) {
    throw ShapeError("forward: batch " + batch.shape_string() + " vs input_width " +
                     std::to_string(c.input_width));
  }
  if (batch.rows() == 0) throw ShapeError("forward: empty batch");
  ForwardCaches caches;
  const std::size_t n = batch.rows();
  if (c.architecture == Architecture::mlp) {
    Matrix x = batch;
    for (std::size_t i = 0; i < net.dense_layers.size(); ++i) {
      caches.dense.push_back(dense_forward(net.dense_layers[i], x));
      x = caches.dense.back().output;
      detail::require_finite(x, "dense layer " + std::to_string(i));
    }
    caches.pooled = x;
  } else {
    std::vector<Matrix> seq(c.timesteps);
    for (std::size_t t = 0; t < c.timesteps; ++t) seq[t] = detail::timestep_block(batch, c, t);
    const bool lstm_kind =
        c.architecture == Architecture::lstm || c.architecture == Architecture::sa_lstm;
    const std::size_t depth = c.depth;
    if (lstm_kind) caches.lstm.resize(depth);
    else caches.gru.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      Matrix h(n, c.hidden_width);
      Matrix cell(n, c.hidden_width);
      std::vector<Matrix> next(c.timesteps);
      for (std::size_t t = 0; t < c.timesteps; ++t) {
        if (lstm_kind) {
          caches.lstm[l].push_back(lstm_step(net.lstm_layers[l], seq[t], h, cell));
          h = caches.lstm[l].back().hidden;
          cell = caches.lstm[l].back().cell;
        } else {
          caches.gru[l].push_back(gru_step(net.gru_layers[l], seq[t], h));
          h = caches.gru[l].back().hidden;
        }
        next[t] = h;
      }
      detail::require_finite(next.back(), (lstm_kind ? std::string("lstm layer ") : std::string("gru layer ")) + std::to_string(l));
      seq = std::move(next);
    }
    caches.top_sequence = seq;
    if (has_attention(c.architecture)) {
      caches.attention = attention_forward(net.attention, caches.top_sequence);
      const std::size_t dk = attention_dim(c);
      Matrix pooled(n, dk);
      for (std::size_t s = 0; s < n; ++s) {
        const Matrix& o = caches.attention.output[s];
        double* dst = pooled.row_ptr(s);
        if (c.pool == AttentionPool::last) {
          const double* src = o.row_ptr(o.rows() - 1);
          for (std::size_t j = 0; j < dk; ++j) dst[j] = src[j];
        } else {
          for (std::size_t j = 0; j < dk; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < o.rows(); ++t) acc += o(t, j);
            dst[j] = acc / static_cast<double>(o.rows());
          }
        }
      }
      detail::require_finite(pooled, "self-attention layer");
      caches.pooled = std::move(pooled);
    } else {
      caches.pooled = caches.top_sequence.back();
    }
  }
  caches.output = dense_forward(net.output_layer, caches.pooled);
  detail::require_finite(caches.output.output, "output layer");
  return caches;
}

inline std::vector<double> predictions_from(const ForwardCaches& caches) {
  const Matrix& out = caches.output.output;
  std::vector<double> p(out.rows());
  for (std::size_t i = 0; i < out.rows(); ++i) p[i] = out(i, 0);
  return p;
}

inline std::vector<double> forward(const Network& net, const Matrix& batch) {
  return predictions_from(forward_with_caches(net, batch));
}

inline double mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError("mse: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(target.size()) + " targets");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> predictions;
  Network gradients;
};

// Mean-squared-error backward pass over one batch. Gradients are averaged
// over the batch (they inherit the 1/n of the loss), so duplicating every
// sample leaves them unchanged.
inline BackwardResult backward(const Network& net, const Matrix& batch,
                               const std::vector<double>& targets) {
  const NetworkConfig& c = net.config;
  ForwardCaches caches = forward_with_caches(net, batch);
  BackwardResult result;
  result.predictions = predictions_from(caches);
  result.loss = mse_loss(result.predictions, targets);
  result.gradients = zeros_like(net);
  Network& grad = result.gradients;

  const std::size_t n = batch.rows();
  Matrix d_pred(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    d_pred(i, 0) = 2.0 * (result.predictions[i] - targets[i]) / static_cast<double>(n);
  }
  Matrix d_pooled = dense_backward(net.output_layer, caches.output, d_pred, grad.output_layer);

  if (c.architecture == Architecture::mlp) {
    Matrix d = d_pooled;
    for (std::size_t i = net.dense_layers.size(); i-- > 0;) {
      d = dense_backward(net.dense_layers[i], caches.dense[i], d, grad.dense_layers[i]);
    }
    return result;
  }

  // Gradient flowing into the top recurrent layer's per-timestep outputs.
  std::vector<Matrix> d_seq(c.timesteps, Matrix(n, c.hidden_width));
  if (has_attention(c.architecture)) {
    const std::size_t dk = attention_dim(c);
    std::vector<Matrix> d_att(n);
    for (std::size_t s = 0; s < n; ++s) {
      Matrix d_o(c.timesteps, dk);
      const double* src = d_pooled.row_ptr(s);
      if (c.pool == AttentionPool::last) {
        double* dst = d_o.row_ptr(c.timesteps - 1);
        for (std::size_t j = 0; j < dk; ++j) dst[j] = src[j];
      } else {
        for (std::size_t t = 0; t < c.timesteps; ++t) {
          double* dst = d_o.row_ptr(t);
          for (std::size_t j = 0; j < dk; ++j) dst[j] = src[j] / static_cast<double>(c.timesteps);
        }
      }
      d_att[s] = std::move(d_o);
    }
    d_seq = attention_backward(net.attention, caches.attention, d_att, c.timesteps,
                               c.hidden_width, grad.attention);
  } else {
    d_seq.back() = d_pooled;
  }

  const bool lstm_kind =
      c.architecture == Architecture::lstm || c.architecture == Architecture::sa_lstm;
  for (std::size_t l = c.depth; l-- > 0;) {
    const std::size_t below_width = l == 0 ? detail::per_step_width(c) : c.hidden_width;
    std::vector<Matrix> d_below(c.timesteps, Matrix(n, below_width));
    Matrix d_h_carry(n, c.hidden_width);
    Matrix d_c_carry(n, c.hidden_width);
    for (std::size_t t = c.timesteps; t-- > 0;) {
      Matrix d_h = add(d_seq[t], d_h_carry);
      Matrix d_x, d_h_prev, d_c_prev;
      if (lstm_kind) {
        lstm_step_backward(net.lstm_layers[l], caches.lstm[l][t], d_h, d_c_carry,
                           grad.lstm_layers[l], d_x, d_h_prev, d_c_prev);
        d_c_carry = std::move(d_c_prev);
      } else {
        gru_step_backward(net.gru_layers[l], caches.gru[l][t], d_h, grad.gru_layers[l], d_x,
                          d_h_prev);
      }
      d_below[t] = std::move(d_x);
      d_h_carry = std::move(d_h_prev);
    }
    d_seq = std::move(d_below);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format: versioned JSON with a config header followed by layer
// blocks in declaration order. Doubles are written in shortest round-trip
// decimal form, so load(save(m)) restores bit-identical parameters.

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace detail

inline std::string serialize_model(const Network& net) {
  nlohmann::json j;
  j["format"] = "optml-model";
  j["version"] = 1;
  j["config"] = {{"architecture", architecture_name(net.config.architecture)},
                 {"input_width", net.config.input_width},
                 {"timesteps", net.config.timesteps},
                 {"hidden_width", net.config.hidden_width},
                 {"depth", net.config.depth},
                 {"attention_dim", net.config.attention_dim},
                 {"pool", net.config.pool == AttentionPool::last ? "last" : "mean"},
                 {"mlp_activation",
                  net.config.mlp_activation == Activation::relu ? "relu" : "identity"},
                 {"seed", net.config.seed}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.dense_layers) {
    layers.push_back({{"kind", "dense"},
                      {"activation", l.activation == Activation::relu ? "relu" : "identity"},
                      {"weight", detail::matrix_to_json(l.weight)},
                      {"bias", detail::matrix_to_json(l.bias)}});
  }
  for (const auto& l : net.lstm_layers) {
    layers.push_back({{"kind", "lstm"},
                      {"w_forget", detail::matrix_to_json(l.w_forget)},
                      {"w_input", detail::matrix_to_json(l.w_input)},
                      {"w_candidate", detail::matrix_to_json(l.w_candidate)},
                      {"w_output", detail::matrix_to_json(l.w_output)},
                      {"b_forget", detail::matrix_to_json(l.b_forget)},
                      {"b_input", detail::matrix_to_json(l.b_input)},
                      {"b_candidate", detail::matrix_to_json(l.b_candidate)},
                      {"b_output", detail::matrix_to_json(l.b_output)}});
  }
  for (const auto& l : net.gru_layers) {
    layers.push_back({{"kind", "gru"},
                      {"w_update", detail::matrix_to_json(l.w_update)},
                      {"w_reset", detail::matrix_to_json(l.w_reset)},
                      {"w_candidate", detail::matrix_to_json(l.w_candidate)}});
  }
  if (has_attention(net.config.architecture)) {
    layers.push_back({{"kind", "self_attention"},
                      {"w_query", detail::matrix_to_json(net.attention.w_query)},
                      {"w_key", detail::matrix_to_json(net.attention.w_key)},
                      {"w_value", detail::matrix_to_json(net.attention.w_value)}});
  }
  layers.push_back(
      {{"kind", "dense"},
       {"activation", net.output_layer.activation == Activation::relu ? "relu" : "identity"},
       {"weight", detail::matrix_to_json(net.output_layer.weight)},
       {"bias", detail::matrix_to_json(net.output_layer.bias)}});
  j["layers"] = std::move(layers);
  return j.dump();
}

inline Network deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "optml-model") {
      throw DataError("model checkpoint: unknown format tag");
    }
    if (j.at("version").get<int>() != 1) {
      throw DataError("model checkpoint: unsupported version " + j.at("version").dump());
    }
    const auto& jc = j.at("config");
    NetworkConfig config;
    config.architecture = architecture_from_name(jc.at("architecture").get<std::string>());
    config.input_width = jc.at("input_width").get<std::size_t>();
    config.timesteps = jc.at("timesteps").get<std::size_t>();
    config.hidden_width = jc.at("hidden_width").get<std::size_t>();
    config.depth = jc.at("depth").get<std::size_t>();
    config.attention_dim = jc.at("attention_dim").get<std::size_t>();
    config.pool =
        jc.at("pool").get<std::string>() == "mean" ? AttentionPool::mean : AttentionPool::last;
    config.mlp_activation = jc.at("mlp_activation").get<std::string>() == "identity"
                                ? Activation::identity
                                : Activation::relu;
    config.seed = jc.at("seed").get<std::uint64_t>();
    Network net = build_network(config);
    // Overwrite the seeded parameters with the stored blocks, verifying
    // counts and shapes along the way.
    const auto& jl = j.at("layers");
    std::size_t idx = 0;
    auto next = [&](const char* kind) -> const nlohmann::json& {
      if (idx >= jl.size()) throw DataError("model checkpoint: missing layer block");
      const auto& block = jl.at(idx++);
      if (block.at("kind").get<std::string>() != kind) {
        throw DataError("model checkpoint: expected layer kind '" + std::string(kind) +
                        "', got '" + block.at("kind").get<std::string>() + "'");
      }
      return block;
    };
    auto load_into = [&](Matrix& dst, const nlohmann::json& src, const char* name) {
      Matrix m = detail::matrix_from_json(src);
      if (!m.same_shape(dst)) {
        throw DataError("model checkpoint: block '" + std::string(name) + "' has shape " +
                        m.shape_string() + ", config implies " + dst.shape_string());
      }
      dst = std::move(m);
    };
    for (auto& l : net.dense_layers) {
      const auto& b = next("dense");
      load_into(l.weight, b.at("weight"), "weight");
      load_into(l.bias, b.at("bias"), "bias");
    }
    for (auto& l : net.lstm_layers) {
      const auto& b = next("lstm");
      load_into(l.w_forget, b.at("w_forget"), "w_forget");
      load_into(l.w_input, b.at("w_input"), "w_input");
      load_into(l.w_candidate, b.at("w_candidate"), "w_candidate");
      load_into(l.w_output, b.at("w_output"), "w_output");
      load_into(l.b_forget, b.at("b_forget"), "b_forget");
      load_into(l.b_input, b.at("b_input"), "b_input");
      load_into(l.b_candidate, b.at("b_candidate"), "b_candidate");
      load_into(l.b_output, b.at("b_output"), "b_output");
    }
    for (auto& l : net.gru_layers) {
      const auto& b = next("gru");
      load_into(l.w_update, b.at("w_update"), "w_update");
      load_into(l.w_reset, b.at("w_reset"), "w_reset");
      load_into(l.w_candidate, b.at("w_candidate"), "w_candidate");
    }
    if (has_attention(config.architecture)) {
      const auto& b = next("self_attention");
      load_into(net.attention.w_query, b.at("w_query"), "w_query");
      load_into(net.attention.w_key, b.at("w_key"), "w_key");
      load_into(net.attention.w_value, b.at("w_value"), "w_value");
    }
    const auto& b = next("dense");
    load_into(net.output_layer.weight, b.at("weight"), "weight");
    load_into(net.output_layer.bias, b.at("bias"), "bias");
    if (idx != jl.size()) throw DataError("model checkpoint: trailing layer blocks");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model checkpoint: ") + e.what());
  }
}

}  // namespace optml
