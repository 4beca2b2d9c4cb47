#include "optml/network.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace optml;

namespace {

Matrix random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

NetworkConfig sequence_config(Architecture arch) {
  NetworkConfig c;
  c.architecture = arch;
  c.input_width = 21;
  c.timesteps = 3;
  c.hidden_width = 8;
  c.depth = 2;
  c.seed = 21;
  return c;
}

// Shape-level parameter count, written out independently of the network's
// own bookkeeping.
std::size_t expected_parameter_count(const NetworkConfig& c) {
  const std::size_t h = c.hidden_width;
  std::size_t total = 0;
  std::size_t pooled = h;
  if (c.architecture == Architecture::mlp) {
    std::size_t in = c.input_width;
    for (std::size_t i = 0; i < c.depth; ++i) {
      total += h * in + h;
      in = h;
    }
  } else {
    std::size_t in = c.input_width / c.timesteps;
    for (std::size_t i = 0; i < c.depth; ++i) {
      const std::size_t cat = h + in;
      if (c.architecture == Architecture::sa_gru) total += 3 * h * cat;
      else total += 4 * h * cat + 4 * h;
      in = h;
    }
    if (has_attention(c.architecture)) {
      const std::size_t dk = c.attention_dim == 0 ? h : c.attention_dim;
      total += 3 * dk * h;
      pooled = dk;
    }
  }
  total += pooled + 1;
  return total;
}

}  // namespace

TEST(Network, ValidateRejectsBadConfigs) {
  NetworkConfig c;
  c.architecture = Architecture::mlp;
  c.timesteps = 3;
  EXPECT_THROW(validate(c), ParameterError);
  c = sequence_config(Architecture::lstm);
  c.input_width = 20;  // not divisible by 3
  EXPECT_THROW(validate(c), ParameterError);
  c = sequence_config(Architecture::sa_gru);
  c.depth = 0;
  EXPECT_THROW(validate(c), ParameterError);
}

TEST(Network, ModelTags) {
  NetworkConfig c;
  c.architecture = Architecture::mlp;
  c.input_width = 6;
  EXPECT_EQ(model_tag(c), "MLP");
  c = sequence_config(Architecture::sa_gru);
  EXPECT_EQ(model_tag(c), "SA_GRU_21F");
  c = sequence_config(Architecture::lstm);
  c.input_width = 18;
  EXPECT_EQ(model_tag(c), "LSTM_18F");
  c = sequence_config(Architecture::sa_lstm);
  c.input_width = 6;
  c.timesteps = 1;
  EXPECT_EQ(model_tag(c), "SA_LSTM_6F");
}

TEST(Network, ParameterCountMatchesShapeFormula) {
  for (Architecture arch :
       {Architecture::mlp, Architecture::lstm, Architecture::sa_lstm, Architecture::sa_gru}) {
    NetworkConfig c = arch == Architecture::mlp
                          ? NetworkConfig{}
                          : sequence_config(arch);
    Network net = build_network(c);
    EXPECT_EQ(parameter_count(net), expected_parameter_count(c)) << architecture_name(arch);
    EXPECT_EQ(flatten_parameters(net).size(), expected_parameter_count(c));
  }
  NetworkConfig c = sequence_config(Architecture::sa_gru);
  c.attention_dim = 5;
  Network net = build_network(c);
  EXPECT_EQ(parameter_count(net), expected_parameter_count(c));
}

TEST(Network, SeededBuildIsDeterministicAndBiasesAreZero) {
  NetworkConfig c = sequence_config(Architecture::sa_lstm);
  Network a = build_network(c);
  Network b = build_network(c);
  EXPECT_EQ(flatten_parameters(a), flatten_parameters(b));
  c.seed = 22;
  Network other = build_network(c);
  EXPECT_NE(flatten_parameters(a), flatten_parameters(other));
  for (const auto& layer : a.lstm_layers) {
    for (double v : layer.b_forget.values()) EXPECT_EQ(v, 0.0);
    for (double v : layer.b_candidate.values()) EXPECT_EQ(v, 0.0);
  }
  for (double v : a.output_layer.bias.values()) EXPECT_EQ(v, 0.0);
}

TEST(Network, GlorotBoundsRespected) {
  NetworkConfig c;
  c.architecture = Architecture::mlp;
  c.input_width = 6;
  c.hidden_width = 64;
  c.depth = 2;
  c.seed = 3;
  Network net = build_network(c);
  const double bound0 = std::sqrt(6.0 / (6 + 64));
  for (double v : net.dense_layers[0].weight.values()) {
    EXPECT_LE(std::fabs(v), bound0);
  }
  const double bound1 = std::sqrt(6.0 / (64 + 64));
  for (double v : net.dense_layers[1].weight.values()) {
    EXPECT_LE(std::fabs(v), bound1);
  }
}

TEST(Network, SetParametersRoundTrip) {
  Network net = build_network(sequence_config(Architecture::sa_gru));
  std::vector<double> flat = flatten_parameters(net);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = static_cast<double>(i) * 0.001;
  set_parameters(net, flat);
  EXPECT_EQ(flatten_parameters(net), flat);
  flat.pop_back();
  EXPECT_THROW(set_parameters(net, flat), ShapeError);
}

TEST(Network, ForwardIsDeterministicAndBatchConsistent) {
  for (Architecture arch :
       {Architecture::mlp, Architecture::lstm, Architecture::sa_lstm, Architecture::sa_gru}) {
    NetworkConfig c = sequence_config(arch);
    if (arch == Architecture::mlp) {
      c.input_width = 6;
      c.timesteps = 1;
    }
    Network net = build_network(c);
    Matrix batch = random_batch(5, c.input_width, 77);
    std::vector<double> all = forward(net, batch);
    std::vector<double> again = forward(net, batch);
    EXPECT_EQ(all, again) << architecture_name(arch);
    // Each row alone produces the identical prediction: no cross-batch
    // leakage anywhere in the stack.
    for (std::size_t r = 0; r < 5; ++r) {
      Matrix row(1, c.input_width);
      for (std::size_t j = 0; j < c.input_width; ++j) row(0, j) = batch(r, j);
      std::vector<double> one = forward(net, row);
      ASSERT_EQ(one.size(), 1u);
      EXPECT_NEAR(one[0], all[r], 1e-12) << architecture_name(arch) << " row " << r;
    }
  }
}

TEST(Network, ZeroParametersGiveZeroOutput) {
  NetworkConfig c = sequence_config(Architecture::sa_gru);
  Network net = build_network(c);
  set_parameters(net, std::vector<double>(parameter_count(net), 0.0));
  Matrix batch = random_batch(3, 21, 5);
  for (double p : forward(net, batch)) EXPECT_EQ(p, 0.0);
}

TEST(Network, TimestepBlockOrderMatters) {
  // The three per-step blocks are consumed oldest-to-newest; swapping the
  // newest and oldest blocks must change a recurrent model's output.
  NetworkConfig c = sequence_config(Architecture::lstm);
  Network net = build_network(c);
  Matrix batch = random_batch(1, 21, 9);
  Matrix swapped = batch;
  for (std::size_t j = 0; j < 7; ++j) {
    std::swap(swapped(0, j), swapped(0, 14 + j));
  }
  EXPECT_NE(forward(net, batch)[0], forward(net, swapped)[0]);
}

TEST(Network, ForwardShapeChecks) {
  Network net = build_network(sequence_config(Architecture::lstm));
  EXPECT_THROW(forward(net, Matrix(2, 20)), ShapeError);
  EXPECT_THROW(forward(net, Matrix(0, 21)), ShapeError);
}

TEST(Network, NonFiniteActivationNamesTheLayer) {
  NetworkConfig c;
  c.architecture = Architecture::mlp;
  c.input_width = 2;
  c.hidden_width = 2;
  c.depth = 1;
  Network net = build_network(c);
  std::vector<double> flat = flatten_parameters(net);
  flat[0] = std::numeric_limits<double>::infinity();
  set_parameters(net, flat);
  try {
    forward(net, Matrix{{1.0, 1.0}});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("dense layer 0"), std::string::npos);
  }
}

TEST(Network, MseLossHandValue) {
  EXPECT_DOUBLE_EQ(mse_loss({1.0, 2.0}, {2.0, 2.0}), 0.5);
  EXPECT_THROW(mse_loss({1.0}, {1.0, 2.0}), ShapeError);
  EXPECT_THROW(mse_loss({}, {}), ShapeError);
}

TEST(Network, DuplicatedBatchKeepsGradients) {
  // Loss gradients are batch means, so feeding every sample twice must
  // reproduce the same gradient vector.
  NetworkConfig c = sequence_config(Architecture::sa_gru);
  Network net = build_network(c);
  Matrix batch = random_batch(3, 21, 31);
  std::vector<double> targets = {0.2, -0.1, 0.5};
  Matrix doubled(6, 21);
  std::vector<double> targets2(6);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t j = 0; j < 21; ++j) doubled(r, j) = batch(r % 3, j);
    targets2[r] = targets[r % 3];
  }
  BackwardResult g1 = backward(net, batch, targets);
  BackwardResult g2 = backward(net, doubled, targets2);
  std::vector<double> f1 = flatten_parameters(g1.gradients);
  std::vector<double> f2 = flatten_parameters(g2.gradients);
  ASSERT_EQ(f1.size(), f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i) EXPECT_NEAR(f1[i], f2[i], 1e-12);
}

TEST(Network, SerializationRoundTripIsBitExact) {
  for (Architecture arch :
       {Architecture::mlp, Architecture::lstm, Architecture::sa_lstm, Architecture::sa_gru}) {
    NetworkConfig c = sequence_config(arch);
    if (arch == Architecture::mlp) {
      c.input_width = 6;
      c.timesteps = 1;
    }
    Network net = build_network(c);
    const std::string text = serialize_model(net);
    Network loaded = deserialize_model(text);
    EXPECT_EQ(flatten_parameters(net), flatten_parameters(loaded)) << architecture_name(arch);
    EXPECT_EQ(serialize_model(loaded), text) << architecture_name(arch);
    Matrix batch = random_batch(4, c.input_width, 55);
    EXPECT_EQ(forward(net, batch), forward(loaded, batch)) << architecture_name(arch);
  }
}

TEST(Network, DeserializeRejectsCorruptCheckpoints) {
  Network net = build_network(sequence_config(Architecture::sa_gru));
  const std::string good = serialize_model(net);
  EXPECT_THROW(deserialize_model("not json"), DataError);
  EXPECT_THROW(deserialize_model("{}"), DataError);
  std::string wrong_format = good;
  wrong_format.replace(wrong_format.find("optml-model"), 11, "something!!");
  EXPECT_THROW(deserialize_model(wrong_format), DataError);
  // Swap a layer kind: gru block claimed as lstm.
  std::string wrong_kind = good;
  wrong_kind.replace(wrong_kind.find("\"gru\""), 5, "\"rnn\"");
  EXPECT_THROW(deserialize_model(wrong_kind), DataError);
}
