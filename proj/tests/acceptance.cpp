// End-to-end acceptance checks for the pricing library, the training stack,
// the explainer, and the CLI. Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails. Tolerances and runtime
// budgets are pinned here on purpose: loosening them is a code change that
// has to survive review, not a flag.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optml/binomial.hpp"
#include "optml/data.hpp"
#include "optml/matrix.hpp"
#include "optml/metrics.hpp"
#include "optml/network.hpp"
#include "optml/rng.hpp"
#include "optml/shapley.hpp"
#include "optml/synthetic.hpp"
#include "optml/training.hpp"
#include "oracles.hpp"

using namespace optml;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

int g_failures = 0;

void report(int id, const std::string& label, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, label.c_str(),
              detail.empty() ? "" : " - ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run_criterion(int id, const std::string& label,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("unexpected exception: ") + e.what();
    ok = false;
  }
  report(id, label, ok, detail);
}

// ---------------------------------------------------------------------------
// Shared helpers

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

// f(x) = w.x + b as a network: identity hidden layer, then the weights.
Network linear_network(const std::vector<double>& w, double b) {
  NetworkConfig cfg;
  cfg.architecture = Architecture::mlp;
  cfg.input_width = w.size();
  cfg.hidden_width = w.size();
  cfg.depth = 1;
  cfg.mlp_activation = Activation::identity;
  Network net = build_network(cfg);
  std::vector<double> flat;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) flat.push_back(i == j ? 1.0 : 0.0);
  }
  flat.insert(flat.end(), w.size(), 0.0);
  flat.insert(flat.end(), w.begin(), w.end());
  flat.push_back(b);
  set_parameters(net, flat);
  return net;
}

// Additive-plus-pairwise coalition game with a closed-form solution
// phi_i = w_i + sum_j q_ij / 2.
struct QuadraticGame {
  std::vector<double> w;
  std::vector<std::vector<double>> q;

  double operator()(std::uint64_t mask) const {
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(mask & (1ULL << i))) continue;
      v += w[i];
      for (std::size_t j = i + 1; j < w.size(); ++j) {
        if (mask & (1ULL << j)) v += q[i][j];
      }
    }
    return v;
  }

  double shapley(std::size_t i) const {
    double phi = w[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (j != i) phi += 0.5 * q[i][j];
    }
    return phi;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: tree converges to the closed form on a European call.

bool criterion1(std::string& detail) {
  TreeParams p;
  p.spot = 100.0;
  p.strike = 100.0;
  p.rate = 0.05;
  p.sigma = 0.2;
  p.steps = 252;
  p.dt = 1.0 / 252.0;
  p.kind = OptionKind::call;
  p.style = ExerciseStyle::european;
  const auto start = Clock::now();
  const double tree = price(p);
  const double elapsed = seconds_since(start);
  const double closed = oracles::black_scholes_call(100, 100, 0.05, 0.2, 1.0);
  const double gap = std::fabs(tree - closed);
  detail = "tree " + fmt(tree) + " vs closed form " + fmt(closed) + ", gap " + fmt(gap) + ", " +
           fmt(elapsed * 1e3, "%.2f") + " ms";
  return gap <= 0.05 && elapsed < 0.010;
}

// ---------------------------------------------------------------------------
// Criterion 2: American dominates European; calls coincide without dividends.

bool criterion2(std::string& detail) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u_price(20.0, 200.0);
  std::uniform_real_distribution<double> u_rate(0.0, 0.10);
  std::uniform_real_distribution<double> u_sigma(0.05, 0.6);
  std::uniform_int_distribution<int> u_days(1, 365);
  const auto start = Clock::now();
  double max_call_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    TreeParams p;
    p.spot = u_price(rng);
    p.strike = u_price(rng);
    p.rate = u_rate(rng);
    p.sigma = u_sigma(rng);
    p.steps = u_days(rng);
    p.dt = 1.0 / 252.0;
    for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
      p.kind = kind;
      p.style = ExerciseStyle::american;
      const double am = price(p);
      p.style = ExerciseStyle::european;
      const double eu = price(p);
      const double intrinsic =
          kind == OptionKind::call ? std::max(p.spot - p.strike, 0.0) : std::max(p.strike - p.spot, 0.0);
      if (am < eu - 1e-9) {
        detail = "draw " + std::to_string(i) + ": american " + fmt(am) + " below european " + fmt(eu);
        return false;
      }
      if (am < intrinsic - 1e-9) {
        detail = "draw " + std::to_string(i) + ": american " + fmt(am) + " below intrinsic " +
                 fmt(intrinsic);
        return false;
      }
      if (kind == OptionKind::call) max_call_gap = std::max(max_call_gap, std::fabs(am - eu));
    }
  }
  const double elapsed = seconds_since(start);
  detail = "200 draws, max |american - european| call gap " + fmt(max_call_gap, "%.3g") + ", " +
           fmt(elapsed, "%.2f") + " s";
  return max_call_gap <= 1e-9 && elapsed < 1.0;
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic gradients match central finite differences.

bool criterion3(std::string& detail) {
  const auto start = Clock::now();
  std::size_t total_params = 0;
  double worst = 0.0;
  std::string worst_arch;
  for (Architecture arch :
       {Architecture::mlp, Architecture::lstm, Architecture::sa_lstm, Architecture::sa_gru}) {
    NetworkConfig c;
    c.architecture = arch;
    c.hidden_width = 8;
    c.depth = 2;
    c.seed = 99 + static_cast<std::uint64_t>(arch);
    if (arch == Architecture::mlp) {
      c.input_width = 6;
      c.timesteps = 1;
    } else {
      c.input_width = 21;
      c.timesteps = 3;
    }
    Network net = build_network(c);
    std::mt19937_64 rng(31 + static_cast<std::uint64_t>(arch));
    Matrix batch = random_matrix(4, c.input_width, rng);
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
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double a = analytic[i];
      const double n = numeric.values()[i];
      const double err = std::fabs(a - n);
      const double tol = 1e-6 + 1e-4 * std::max(std::fabs(a), std::fabs(n));
      const double rel = err / std::max(1e-6, std::max(std::fabs(a), std::fabs(n)));
      if (rel > worst) {
        worst = rel;
        worst_arch = architecture_name(arch);
      }
      if (err > tol) {
        detail = architecture_name(arch) + " parameter " + std::to_string(i) + ": analytic " +
                 fmt(a, "%.3g") + " vs numeric " + fmt(n, "%.3g");
        return false;
      }
    }
    total_params += analytic.size();
  }
  const double elapsed = seconds_since(start);
  detail = std::to_string(total_params) + " parameters over 4 architectures, worst rel err " +
           fmt(worst, "%.2g") + " (" + worst_arch + "), " + fmt(elapsed, "%.1f") + " s";
  return elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// Criterion 4: first Adam step with constant gradient 3 moves every
// parameter to -learning_rate within 1e-9.

bool criterion4(std::string& detail) {
  NetworkConfig c;
  c.architecture = Architecture::mlp;
  c.input_width = 2;
  c.hidden_width = 3;
  c.depth = 1;
  Network net = build_network(c);
  set_parameters(net, std::vector<double>(parameter_count(net), 0.0));
  Network grads = zeros_like(net);
  visit_parameter_blocks(grads, [](Matrix& m) {
    for (double& v : m.values()) v = 3.0;
  });
  AdamState state = make_adam_state(net);
  AdamConfig cfg;
  cfg.learning_rate = 0.001;
  adam_step(state, net, grads, cfg);
  double worst = 0.0;
  visit_parameter_blocks(net, [&](Matrix& m) {
    for (double v : m.values()) worst = std::max(worst, std::fabs(v - (-0.001)));
  });
  detail = "max |theta_1 + 0.001| = " + fmt(worst, "%.3g") + " over " +
           std::to_string(parameter_count(net)) + " parameters";
  return worst <= 1e-9 && state.step == 1;
}

// ---------------------------------------------------------------------------
// Criterion 5: Shapley axioms in exact mode; sampled mode covers the exact
// values within its own error bars.

bool criterion5(std::string& detail) {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::size_t covered = 0, total = 0;
  for (int g = 0; g < 50; ++g) {
    const std::size_t n = 3 + static_cast<std::size_t>(g % 10);  // 3..12 features
    QuadraticGame game;
    game.w.resize(n);
    game.q.assign(n, std::vector<double>(n, 0.0));
    for (auto& w : game.w) w = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) game.q[i][j] = game.q[j][i] = u(rng);
    }
    // Feature n-1 is a dummy; features 0 and 1 are interchangeable.
    game.w[n - 1] = 0.0;
    for (std::size_t j = 0; j < n; ++j) game.q[n - 1][j] = game.q[j][n - 1] = 0.0;
    game.w[1] = game.w[0];
    for (std::size_t j = 2; j < n; ++j) {
      game.q[1][j] = game.q[j][1] = game.q[0][j];
    }

    auto v = [&](std::uint64_t mask) { return game(mask); };
    ShapleyValues exact = exact_shapley(v, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += exact.phi[i];
      if (std::fabs(exact.phi[i] - game.shapley(i)) > 1e-9) {
        detail = "game " + std::to_string(g) + ": exact phi off closed form";
        return false;
      }
    }
    if (std::fabs(sum - (exact.full_value - exact.base_value)) > 1e-9) {
      detail = "game " + std::to_string(g) + ": efficiency violated, sum " + fmt(sum);
      return false;
    }
    if (std::fabs(exact.phi[n - 1]) > 1e-9) {
      detail = "game " + std::to_string(g) + ": dummy feature got " + fmt(exact.phi[n - 1], "%.3g");
      return false;
    }
    if (std::fabs(exact.phi[0] - exact.phi[1]) > 1e-9) {
      detail = "game " + std::to_string(g) + ": symmetric features differ";
      return false;
    }

    ShapleyValues sampled = sampled_shapley(v, n, 2000, 5000 + static_cast<std::uint64_t>(g));
    for (std::size_t i = 0; i < n; ++i) {
      ++total;
      if (std::fabs(sampled.phi[i] - exact.phi[i]) <= 3.0 * sampled.standard_error[i] + 1e-12) {
        ++covered;
      }
    }
  }
  const double elapsed = seconds_since(start);
  const double coverage = 100.0 * static_cast<double>(covered) / static_cast<double>(total);
  detail = "50 games, axioms exact to 1e-9; sampled coverage " + std::to_string(covered) + "/" +
           std::to_string(total) + " = " + fmt(coverage, "%.1f") + "% within 3 stderr, " +
           fmt(elapsed, "%.1f") + " s";
  return coverage >= 95.0 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// Criterion 6: attributions of a linear model against a single background
// row have the closed form w_j * (x_j - b_j) in both modes.

bool criterion6(std::string& detail) {
  const std::vector<double> w = {1.5, -2.0, 0.25, 0.0, 3.0};
  const double bias = 0.7;
  Network net = linear_network(w, bias);
  Matrix background(1, 5, {0.2, 0.4, 0.1, 0.9, 0.5});
  Matrix instance(1, 5, {1.0, 0.0, 0.6, 0.3, 0.7});
  std::vector<std::string> names;
  for (int i = 0; i < 5; ++i) names.push_back("f" + std::to_string(i));

  double worst = 0.0;
  for (ShapleyMode mode : {ShapleyMode::exact, ShapleyMode::sampled}) {
    ExplainOptions options;
    options.mode = mode;
    options.n_permutations = 20;
    options.seed = 3;
    ShapleyReport rep = explain_instances(net, instance, background, 0.0, 1.0, names, options);
    for (std::size_t j = 0; j < 5; ++j) {
      const double expected = w[j] * (instance(0, j) - background(0, j));
      const double err = std::fabs(rep.per_instance_phi[0][j] - expected);
      worst = std::max(worst, err);
      if (err > 1e-9) {
        detail = std::string(mode == ShapleyMode::exact ? "exact" : "sampled") + " mode feature " +
                 std::to_string(j) + " off closed form by " + fmt(err, "%.3g");
        return false;
      }
    }
  }
  detail = "both modes, max |phi - w_j(x_j - b_j)| = " + fmt(worst, "%.3g");
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 7: bucket partition, sample invariants, normalization round trip.

bool criterion7(std::string& detail) {
  SyntheticConfig c;
  c.seed = 7;
  c.trading_days = 150;
  c.s0 = 400.0;
  c.drift = 0.0;
  c.sigma = 0.02;  // slow underlying so contracts persist
  c.strike_offsets = {-0.35, -0.2, -0.05, 0.0, 0.05, 0.2, 0.35};
  c.expiry_targets = {5, 20, 60, 120, 250};
  c.expiry_stride = 7;
  c.half_spread = 0.02;
  c.vol_noise = 0.01;
  SyntheticMarket market = generate_market(c);
  EnrichResult enriched = enrich(market.quotes, market.rates, market.vols);
  const auto all_samples = build_sequences(enriched.records);
  PrepareOptions options;
  options.seed = 17;
  auto buckets = prepare_buckets(enriched.records, options);

  std::size_t bucketed = 0;
  for (const auto& [name, ds] : buckets) {
    bucketed += ds.samples.size();
    for (const auto& s : ds.samples) {
      if (bucket_name(bucket_assign(s)) != name) {
        detail = "sample in " + name + " classifies as " + bucket_name(bucket_assign(s));
        return false;
      }
      if (s.features[0] != 0.0) {
        detail = "anchor call price leaked into features in " + name;
        return false;
      }
      if (s.features[2] != s.strike || s.features[9] != s.strike || s.features[16] != s.strike) {
        detail = "contract strike differs across timesteps in " + name;
        return false;
      }
      if (!(s.features[4] < s.features[11] && s.features[11] < s.features[18])) {
        detail = "quote dates not strictly increasing across the window in " + name;
        return false;
      }
      if (s.features[4] < 1.0) {
        detail = "non-positive days to maturity in " + name;
        return false;
      }
    }
    // Normalization round trip on every row of this bucket.
    for (const auto& s : ds.samples) {
      const double t = denormalize_target(normalize_target(s.target, ds.stats), ds.stats);
      if (std::fabs(t - s.target) > 1e-12 * std::max(1.0, std::fabs(s.target))) {
        detail = "target round trip off by " + fmt(std::fabs(t - s.target), "%.3g") + " in " + name;
        return false;
      }
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double lo = ds.stats.feature_min[f];
        const double hi = ds.stats.feature_max[f];
        const double back = lo + normalize_value(s.features[f], lo, hi) * (hi - lo);
        const double expected = hi == lo ? lo : s.features[f];
        if (std::fabs(back - expected) > 1e-12 * std::max(1.0, std::fabs(expected))) {
          detail = "feature " + std::to_string(f) + " round trip off in " + name;
          return false;
        }
      }
    }
  }
  if (bucketed != all_samples.size()) {
    detail = "buckets hold " + std::to_string(bucketed) + " samples, pipeline built " +
             std::to_string(all_samples.size());
    return false;
  }
  detail = std::to_string(buckets.size()) + " buckets, " + std::to_string(bucketed) +
           " samples partitioned, invariants and round trips hold";
  return buckets.size() == 15;
}

// ---------------------------------------------------------------------------
// Criteria 8 and 9 share one synthetic bucket and one training run. The
// published volatility table observes the pricing volatility with noise, so
// a model that reads three days of history can out-predict the tree built
// from published fields.

struct LearnabilityResult {
  bool ran = false;
  std::size_t samples = 0;
  double sagru_rmse = 0.0;
  double sagru_r2 = 0.0;
  double mlp_rmse = 0.0;
  double tree_rmse = 0.0;
  std::size_t sagru_epochs = 0;
  double elapsed = 0.0;
  std::string error;
};

LearnabilityResult g_learn;

void run_learnability() {
  const auto start = Clock::now();
  LearnabilityResult r;
  try {
    SyntheticConfig c;
    c.seed = 8;
    c.trading_days = 260;
    c.s0 = 400.0;
    c.drift = 0.05;
    c.sigma = 0.18;
    c.strike_offsets.clear();
    for (int k = -10; k <= 10; ++k) c.strike_offsets.push_back(k * 0.0025);
    c.expiry_targets = {35, 45, 55, 65, 75, 85};
    c.expiry_stride = 7;
    c.half_spread = 0.05;   // noise channel 1: quoted spread
    c.vol_noise = 0.02;     // noise channel 2: published vol is a noisy read
    c.rate_noise = 0.0;
    SyntheticMarket market = generate_market(c);
    EnrichResult enriched = enrich(market.quotes, market.rates, market.vols);
    PrepareOptions options;
    options.seed = 21;
    auto buckets = prepare_buckets(enriched.records, options);
    auto it = buckets.find("atm_d31_90");
    if (it == buckets.end()) throw DataError("expected bucket atm_d31_90 missing");
    const BucketDataset& ds = it->second;
    r.samples = ds.samples.size();

    const auto& counts = ds.counts;
    const std::size_t test_begin = counts.train + counts.val;
    const auto raw_test_y = target_vector(ds.samples, test_begin, ds.samples.size(), nullptr);

    auto train_one = [&](Architecture arch, std::size_t width, std::size_t max_epochs,
                         std::size_t patience, std::uint64_t seed) {
      NetworkConfig nc;
      nc.architecture = arch;
      nc.input_width = width;
      nc.timesteps = arch == Architecture::mlp ? 1 : 3;
      nc.hidden_width = 64;
      nc.depth = 2;
      nc.seed = seed;
      TrainConfig tc;
      tc.learning_rate = default_learning_rate(arch);
      tc.batch_size = 1024;
      tc.max_epochs = max_epochs;
      tc.patience = patience;
      tc.min_delta = 1e-7;
      tc.shuffle_seed = derive_seed(seed, 0x5EED);
      const auto idx = feature_indices(width);
      Matrix train_x = feature_matrix(ds.samples, 0, counts.train, idx, &ds.stats);
      const auto train_y = target_vector(ds.samples, 0, counts.train, &ds.stats);
      Matrix val_x = feature_matrix(ds.samples, counts.train, test_begin, idx, &ds.stats);
      const auto val_y = target_vector(ds.samples, counts.train, test_begin, &ds.stats);
      TrainResult result = train(nc, tc, train_x, train_y, val_x, val_y);
      Matrix test_x = feature_matrix(ds.samples, test_begin, ds.samples.size(), idx, &ds.stats);
      std::vector<double> preds = forward(result.model, test_x);
      for (double& p : preds) p = denormalize_target(p, ds.stats);
      return std::make_pair(result, preds);
    };

    auto [sagru, sagru_preds] = train_one(Architecture::sa_gru, 21, 200, 30, 101);
    r.sagru_epochs = sagru.epochs_run;
    r.sagru_rmse = rmse(raw_test_y, sagru_preds);
    r.sagru_r2 = r_squared(raw_test_y, sagru_preds);

    auto [mlp, mlp_preds] = train_one(Architecture::mlp, 6, 600, 60, 102);
    (void)mlp;
    r.mlp_rmse = rmse(raw_test_y, mlp_preds);

    // Tree baseline from the sample's own published fields.
    std::vector<double> tree_preds;
    for (std::size_t i = test_begin; i < ds.samples.size(); ++i) {
      const auto& f = ds.samples[i].features;
      TreeParams p;
      p.spot = f[1];
      p.strike = f[2];
      p.rate = f[6];
      p.sigma = f[5];
      p.steps = static_cast<int>(f[4]);
      p.dt = 1.0 / 252.0;
      p.kind = OptionKind::call;
      p.style = ExerciseStyle::american;
      tree_preds.push_back(price(p));
    }
    r.tree_rmse = rmse(raw_test_y, tree_preds);
    r.ran = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.elapsed = seconds_since(start);
  g_learn = r;
}

bool criterion8(std::string& detail) {
  run_learnability();
  const LearnabilityResult& r = g_learn;
  if (!r.ran) {
    detail = r.error;
    return false;
  }
  detail = std::to_string(r.samples) + " samples, sa_gru r2 " + fmt(r.sagru_r2, "%.4f") +
           " rmse " + fmt(r.sagru_rmse, "%.4f") + " (epochs " + std::to_string(r.sagru_epochs) +
           ") vs mlp rmse " + fmt(r.mlp_rmse, "%.4f") + ", " + fmt(r.elapsed, "%.0f") + " s";
  return r.samples >= 20000 && r.sagru_r2 >= 0.95 && r.sagru_rmse < r.mlp_rmse &&
         r.elapsed <= 900.0;
}

bool criterion9(std::string& detail) {
  const LearnabilityResult& r = g_learn;
  if (!r.ran) {
    detail = "prerequisite training run failed: " + r.error;
    return false;
  }
  detail = "sa_gru rmse " + fmt(r.sagru_rmse, "%.4f") + " vs tree baseline rmse " +
           fmt(r.tree_rmse, "%.4f") + " on noisy quotes";
  return r.sagru_rmse < r.tree_rmse;
}

// ---------------------------------------------------------------------------
// Criterion 10: seeded CLI reruns produce byte-identical artifacts.

int run_cli(const std::string& args, const std::string& log_prefix, std::string& err_out) {
  const std::string out_file = log_prefix + ".out";
  const std::string err_file = log_prefix + ".err";
  const std::string cmd =
      std::string(OPTML_CLI_PATH) + " " + args + " >" + out_file + " 2>" + err_file;
  const int rc = std::system(cmd.c_str());
  err_out = slurp(err_file);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool compare_dirs(const std::string& a, const std::string& b, std::string& detail) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) {
    detail = a + " is empty";
    return false;
  }
  for (const auto& name : names) {
    const std::string other = b + "/" + name;
    if (!fs::exists(other)) {
      detail = name + " missing from " + b;
      return false;
    }
    if (slurp(a + "/" + name) != slurp(other)) {
      detail = name + " differs between reruns";
      return false;
    }
  }
  return true;
}

bool criterion10(std::string& detail) {
  const std::string work = (fs::current_path() / "acceptance_tmp").string();
  fs::remove_all(work);
  fs::create_directories(work);
  std::string err;

  const std::string gen = work + "/gen";
  const std::string gen_flags =
      "generate --seed 5 --days 60 --s0 400 --drift 0 --sigma 0.02 "
      "--strike-offsets -0.05,0,0.05 --expiry-targets 20,60 --expiry-stride 7 "
      "--half-spread 0.1 --vol-noise 0.01 --out ";
  if (run_cli(gen_flags + gen, work + "/gen", err) != 0) {
    detail = "generate failed: " + err;
    return false;
  }

  const std::string prep_flags = "prepare --quotes " + gen + "/quotes.csv --rates " + gen +
                                 "/rates.csv --vols " + gen + "/vols.csv --seed 3 --out ";
  for (const char* dir : {"/prep1", "/prep2"}) {
    if (run_cli(prep_flags + work + dir, work + dir, err) != 0) {
      detail = "prepare failed: " + err;
      return false;
    }
  }
  if (!compare_dirs(work + "/prep1", work + "/prep2", detail)) return false;

  const std::string train_flags =
      "train --data " + work + "/prep1 --buckets atm_d10_30 --architectures mlp,sa_gru "
      "--hidden 8 --max-epochs 5 --batch-size 16 --seed 1 --out ";
  for (const char* dir : {"/models1", "/models2"}) {
    if (run_cli(train_flags + work + dir, work + dir, err) != 0) {
      detail = "train failed: " + err;
      return false;
    }
  }
  if (!compare_dirs(work + "/models1", work + "/models2", detail)) return false;

  const std::string explain_flags =
      "explain --data " + work + "/prep1 --models " + work + "/models1 --bucket atm_d10_30 "
      "--tag SA_GRU_21F --mode sampled --permutations 40 --instances 2 --background 8 "
      "--seed 9 --out ";
  for (const char* dir : {"/shap1", "/shap2"}) {
    if (run_cli(explain_flags + work + dir, work + dir, err) != 0) {
      detail = "explain failed: " + err;
      return false;
    }
  }
  if (!compare_dirs(work + "/shap1", work + "/shap2", detail)) return false;

  detail = "prepare, train, explain reruns byte-identical (datasets, stats, checkpoints, "
           "histories, attributions, config snapshots)";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 11: metrics agree with brute-force reimplementations.

bool criterion11(std::string& detail) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  std::uniform_int_distribution<std::size_t> length(3, 40);
  bool saw_negative_r2 = false;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = length(rng);
    std::vector<double> y(n), yhat(n);
    for (std::size_t j = 0; j < n; ++j) {
      double t = value(rng);
      if (std::fabs(t) < 0.5) t = t < 0 ? t - 0.5 : t + 0.5;  // keep mape well-posed
      y[j] = t;
      yhat[j] = value(rng);
    }
    const double d_rmse = std::fabs(rmse(y, yhat) - oracles::brute_rmse(y, yhat));
    const double d_mape = std::fabs(mape(y, yhat) - oracles::brute_mape(y, yhat));
    const double r2 = r_squared(y, yhat);
    const double d_r2 = std::fabs(r2 - oracles::brute_r_squared(y, yhat));
    worst = std::max({worst, d_rmse, d_mape, d_r2});
    if (r2 < 0.0) saw_negative_r2 = true;
    if (worst > 1e-12) {
      detail = "vector " + std::to_string(i) + ": metric differs from brute force by " +
               fmt(worst, "%.3g");
      return false;
    }
  }
  // Force the worse-than-the-mean case explicitly.
  const std::vector<double> y = {1.0, 2.0, 3.0};
  const std::vector<double> bad = {10.0, -10.0, 10.0};
  const double r2 = r_squared(y, bad);
  if (!(r2 < 0.0) || std::fabs(r2 - oracles::brute_r_squared(y, bad)) > 1e-12) {
    detail = "constructed negative-r2 case failed: r2 = " + fmt(r2);
    return false;
  }
  saw_negative_r2 = true;
  // Near-zero targets are excluded identically on both sides.
  const std::vector<double> y2 = {0.0, 1e-13, 2.0, -3.0};
  const std::vector<double> p2 = {1.0, 1.0, 2.5, -2.0};
  if (std::fabs(mape(y2, p2) - oracles::brute_mape(y2, p2)) > 1e-12) {
    detail = "exclusion handling differs from brute force";
    return false;
  }
  detail = "100 random vectors, max gap " + fmt(worst, "%.3g") + ", negative r2 exercised (" +
           fmt(r2, "%.3f") + ")";
  return saw_negative_r2;
}

}  // namespace

int main() {
  run_criterion(1, "european tree price matches the closed form", criterion1);
  run_criterion(2, "american dominates european across random draws", criterion2);
  run_criterion(3, "analytic gradients match finite differences", criterion3);
  run_criterion(4, "adam first step moves parameters by -learning_rate", criterion4);
  run_criterion(5, "shapley axioms hold and sampling covers exact values", criterion5);
  run_criterion(6, "linear model attributions match their closed form", criterion6);
  run_criterion(7, "bucket partition, sample invariants, normalization round trip", criterion7);
  run_criterion(8, "sequence model learns a synthetic bucket", criterion8);
  run_criterion(9, "learned model beats the tree baseline on noisy quotes", criterion9);
  run_criterion(10, "seeded pipeline reruns are byte-identical", criterion10);
  run_criterion(11, "metrics match brute-force reimplementations", criterion11);

  if (g_failures > 0) {
    std::printf("%d of 11 criteria failed\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
