#include "optml/layers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "optml/network.hpp"

using namespace optml;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

// Central-difference check of the full parameter gradient of the batch MSE
// loss, architecture-independent: everything rides on flatten/set.
void check_network_gradients(const NetworkConfig& config, std::uint64_t data_seed) {
  Network net = build_network(config);
  std::mt19937_64 rng(data_seed);
  Matrix batch = random_matrix(4, config.input_width, rng);
  std::vector<double> targets(4);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& t : targets) t = dist(rng);

  BackwardResult result = backward(net, batch, targets);
  std::vector<double> analytic = flatten_parameters(result.gradients);

  Network probe = net;
  auto objective = [&](const Matrix& theta) {
    set_parameters(probe, theta.values());
    return mse_loss(forward(probe, batch), targets);
  };
  Matrix flat(1, analytic.size(), flatten_parameters(net));
  Matrix numeric = finite_difference_gradient(objective, flat, 1e-5);

  ASSERT_EQ(numeric.size(), analytic.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i];
    const double n = numeric.values()[i];
    const double tol = 1e-6 + 1e-4 * std::max(std::fabs(a), std::fabs(n));
    ASSERT_NEAR(a, n, tol) << "parameter " << i << " of " << analytic.size();
  }
}

NetworkConfig small_config(Architecture arch) {
  NetworkConfig c;
  c.architecture = arch;
  c.hidden_width = 8;
  c.depth = 2;
  c.seed = 99;
  if (arch == Architecture::mlp) {
    c.input_width = 6;
    c.timesteps = 1;
  } else {
    c.input_width = 21;
    c.timesteps = 3;
  }
  return c;
}

}  // namespace

TEST(Dense, ForwardHandValues) {
  DenseLayer layer;
  layer.weight = Matrix{{1.0, 2.0}, {-1.0, 0.5}};  // out 2 x in 2
  layer.bias = Matrix{{0.5, -0.5}};
  layer.activation = Activation::relu;
  Matrix input{{1.0, 1.0}};
  DenseCache cache = dense_forward(layer, input);
  // pre = [1+2+0.5, -1+0.5-0.5] = [3.5, -1]; relu -> [3.5, 0]
  EXPECT_DOUBLE_EQ(cache.pre_activation(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(cache.pre_activation(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(cache.output(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(cache.output(0, 1), 0.0);
}

TEST(Lstm, ZeroParametersDampState) {
  // All-zero weights and biases: every gate is 1/2 and the candidate is 0,
  // so c_t = c_{t-1}/2 and h_t = tanh(c_t)/2.
  LstmLayer layer;
  layer.w_forget = layer.w_input = layer.w_candidate = layer.w_output = Matrix(1, 2);
  layer.b_forget = layer.b_input = layer.b_candidate = layer.b_output = Matrix(1, 1);
  Matrix x{{0.7}};
  Matrix h0{{0.3}};
  Matrix c0{{0.8}};
  LstmStepCache s = lstm_step(layer, x, h0, c0);
  EXPECT_NEAR(s.cell(0, 0), 0.4, 1e-15);
  EXPECT_NEAR(s.hidden(0, 0), 0.5 * std::tanh(0.4), 1e-15);
}

TEST(Lstm, ScalarStepMatchesExplicitFormula) {
  LstmLayer layer;
  layer.w_forget = Matrix{{0.1, -0.2}};
  layer.w_input = Matrix{{0.3, 0.4}};
  layer.w_candidate = Matrix{{-0.5, 0.6}};
  layer.w_output = Matrix{{0.7, -0.8}};
  layer.b_forget = Matrix{{0.05}};
  layer.b_input = Matrix{{-0.1}};
  layer.b_candidate = Matrix{{0.2}};
  layer.b_output = Matrix{{0.0}};
  const double h0 = 0.4, c0 = -0.3, x = 0.9;
  Matrix xm{{x}}, hm{{h0}}, cm{{c0}};
  LstmStepCache s = lstm_step(layer, xm, hm, cm);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double f = sig(0.1 * h0 - 0.2 * x + 0.05);
  const double i = sig(0.3 * h0 + 0.4 * x - 0.1);
  const double g = std::tanh(-0.5 * h0 + 0.6 * x + 0.2);
  const double o = sig(0.7 * h0 - 0.8 * x);
  const double c = f * c0 + i * g;
  EXPECT_NEAR(s.forget_gate(0, 0), f, 1e-15);
  EXPECT_NEAR(s.input_gate(0, 0), i, 1e-15);
  EXPECT_NEAR(s.candidate(0, 0), g, 1e-15);
  EXPECT_NEAR(s.output_gate(0, 0), o, 1e-15);
  EXPECT_NEAR(s.cell(0, 0), c, 1e-15);
  EXPECT_NEAR(s.hidden(0, 0), o * std::tanh(c), 1e-15);
}

TEST(Gru, ZeroWeightsHalveState) {
  // z = r = 1/2, candidate = 0: h_t = h_{t-1}/2.
  GruLayer layer;
  layer.w_update = layer.w_reset = layer.w_candidate = Matrix(1, 2);
  Matrix x{{0.7}};
  Matrix h0{{0.6}};
  GruStepCache s = gru_step(layer, x, h0);
  EXPECT_NEAR(s.update_gate(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(s.reset_gate(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(s.hidden(0, 0), 0.3, 1e-15);
}

TEST(Gru, ScalarStepMatchesExplicitFormula) {
  GruLayer layer;
  layer.w_update = Matrix{{0.2, -0.3}};
  layer.w_reset = Matrix{{-0.4, 0.5}};
  layer.w_candidate = Matrix{{0.6, -0.7}};
  const double h0 = -0.5, x = 0.8;
  GruStepCache s = gru_step(layer, Matrix{{x}}, Matrix{{h0}});
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double z = sig(0.2 * h0 - 0.3 * x);
  const double r = sig(-0.4 * h0 + 0.5 * x);
  const double g = std::tanh(0.6 * (r * h0) - 0.7 * x);
  EXPECT_NEAR(s.update_gate(0, 0), z, 1e-15);
  EXPECT_NEAR(s.reset_gate(0, 0), r, 1e-15);
  EXPECT_NEAR(s.candidate(0, 0), g, 1e-15);
  EXPECT_NEAR(s.hidden(0, 0), (1.0 - z) * h0 + z * g, 1e-15);
}

TEST(Attention, UniformWeightsWhenScoresAreConstant) {
  // Zero query projection makes every score zero, so each row of the
  // attention weights is uniform and the output averages the values.
  SelfAttentionLayer layer;
  layer.w_query = Matrix(2, 2);
  layer.w_key = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  layer.w_value = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  std::vector<Matrix> sequence = {Matrix{{1.0, 2.0}}, Matrix{{3.0, 4.0}}, Matrix{{5.0, 6.0}}};
  AttentionCache cache = attention_forward(layer, sequence);
  ASSERT_EQ(cache.weights.size(), 1u);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(cache.weights[0](r, c), 1.0 / 3.0, 1e-15);
  }
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_NEAR(cache.output[0](r, 0), 3.0, 1e-15);
    EXPECT_NEAR(cache.output[0](r, 1), 4.0, 1e-15);
  }
}

TEST(Attention, RowsSumToOne) {
  std::mt19937_64 rng(5);
  SelfAttentionLayer layer;
  layer.w_query = random_matrix(4, 8, rng);
  layer.w_key = random_matrix(4, 8, rng);
  layer.w_value = random_matrix(4, 8, rng);
  std::vector<Matrix> sequence = {random_matrix(3, 8, rng), random_matrix(3, 8, rng),
                                  random_matrix(3, 8, rng)};
  AttentionCache cache = attention_forward(layer, sequence);
  for (const auto& w : cache.weights) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < w.cols(); ++c) sum += w(r, c);
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Gradients, Mlp) { check_network_gradients(small_config(Architecture::mlp), 11); }

TEST(Gradients, Lstm) { check_network_gradients(small_config(Architecture::lstm), 12); }

TEST(Gradients, SaLstm) { check_network_gradients(small_config(Architecture::sa_lstm), 13); }

TEST(Gradients, SaGru) { check_network_gradients(small_config(Architecture::sa_gru), 14); }

TEST(Gradients, SaGruMeanPool) {
  NetworkConfig c = small_config(Architecture::sa_gru);
  c.pool = AttentionPool::mean;
  check_network_gradients(c, 15);
}

TEST(Gradients, SaLstmReducedAttentionDim) {
  NetworkConfig c = small_config(Architecture::sa_lstm);
  c.attention_dim = 4;
  check_network_gradients(c, 16);
}

TEST(Gradients, EighteenFeatureWindow) {
  NetworkConfig c = small_config(Architecture::lstm);
  c.input_width = 18;
  check_network_gradients(c, 17);
}
