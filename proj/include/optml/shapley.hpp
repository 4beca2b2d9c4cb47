#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "optml/csv.hpp"
#include "optml/data.hpp"
#include "optml/errors.hpp"
#include "optml/matrix.hpp"
#include "optml/network.hpp"
#include "optml/rng.hpp"

namespace optml {

// Coalition value function over feature subsets encoded as bitmasks.
using ValueFunction = std::function<double(std::uint64_t)>;

// Exact enumeration walks all 2^n coalitions; past this width the memo
// table and the walk stop being a desk-side computation.
constexpr std::size_t kExactShapleyLimit = 15;

struct ShapleyValues {
  std::vector<double> phi;
  std::vector<double> standard_error;  // all zero in exact mode
  double base_value = 0.0;             // v(empty)
  double full_value = 0.0;             // v(all features)
};

// phi_i = sum over S not containing i of |S|!(n-|S|-1)!/n! [v(S+i) - v(S)],
// with every coalition value computed exactly once.
inline ShapleyValues exact_shapley(const ValueFunction& v, std::size_t n) {
  if (n == 0) throw ParameterError("exact_shapley: need at least one feature");
  if (n > kExactShapleyLimit) {
    throw ParameterError("exact_shapley: " + std::to_string(n) + " features exceeds the exact limit of " +
                         std::to_string(kExactShapleyLimit) + "; use sampled mode");
  }
  const std::uint64_t full = (1ULL << n) - 1;
  std::vector<double> value(full + 1);
  for (std::uint64_t mask = 0; mask <= full; ++mask) value[mask] = v(mask);
  // weight[s] = s! (n-s-1)! / n!
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) weight[s] = fact[s] * fact[n - s - 1] / fact[n];

  ShapleyValues out;
  out.phi.assign(n, 0.0);
  out.standard_error.assign(n, 0.0);
  out.base_value = value[0];
  out.full_value = value[full];
  for (std::uint64_t mask = 0; mask <= full; ++mask) {
    const std::size_t size = static_cast<std::size_t>(__builtin_popcountll(mask));
    const double w = weight[size];
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ULL << i)) continue;
      out.phi[i] += w * (value[mask | (1ULL << i)] - value[mask]);
    }
  }
  return out;
}

// Unbiased permutation-sampling estimator. Each permutation contributes one
// marginal per feature; the reported standard error is the sample standard
// deviation of those marginals over sqrt(#permutations). Coalition values
// are memoized across permutations.
inline ShapleyValues sampled_shapley(const ValueFunction& v, std::size_t n,
                                     std::size_t n_permutations, std::uint64_t seed) {
  if (n == 0 || n > 63) throw ParameterError("sampled_shapley: feature count out of range");
  if (n_permutations == 0) throw ParameterError("sampled_shapley: need at least one permutation");
  std::unordered_map<std::uint64_t, double> memo;
  auto value = [&](std::uint64_t mask) {
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const double val = v(mask);
    memo.emplace(mask, val);
    return val;
  };
  const std::uint64_t full = n == 63 ? ~0ULL >> 1 : (1ULL << n) - 1;
  ShapleyValues out;
  out.base_value = value(0);
  out.full_value = value(full);
  // Welford accumulation: the naive sum-of-squares formula cancels
  // catastrophically when the marginals barely vary (additive games).
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    std::uint64_t mask = 0;
    double prev = out.base_value;
    for (std::size_t i : order) {
      mask |= 1ULL << i;
      const double cur = value(mask);
      const double marginal = cur - prev;
      const double delta = marginal - mean[i];
      mean[i] += delta / static_cast<double>(p + 1);
      m2[i] += delta * (marginal - mean[i]);
      prev = cur;
    }
  }
  out.phi = mean;
  out.standard_error.assign(n, 0.0);
  const double m = static_cast<double>(n_permutations);
  if (n_permutations > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      out.standard_error[i] = std::sqrt(m2[i] / (m - 1.0) / m);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model explanation. Coalition value: features in S take the explained
// instance's values, the rest are marginalized over a background sample
// drawn from the training split; v(S) is the mean model output over the
// composites, reported in denormalized price units.

enum class ShapleyMode { exact, sampled };

struct ExplainOptions {
  ShapleyMode mode = ShapleyMode::sampled;
  std::size_t n_permutations = 2000;
  std::uint64_t seed = 0;
};

struct ShapleyReport {
  std::string bucket;
  std::string model;
  std::string mode;
  std::size_t n_instances = 0;
  double base_value_mean = 0.0;
  std::vector<std::string> feature_names;
  std::vector<double> mean_abs_phi;
  std::vector<std::size_t> ranking;  // feature indices, descending mean |phi|
  std::vector<std::vector<double>> per_instance_phi;
  std::vector<std::vector<double>> per_instance_stderr;
};

// instances and background carry normalized model inputs (one column per
// model feature). The affine target denormalization turns normalized
// attributions into price-unit attributions: scale by the target range.
inline ShapleyReport explain_instances(const Network& model, const Matrix& instances,
                                       const Matrix& background, double target_min,
                                       double target_max,
                                       const std::vector<std::string>& names,
                                       const ExplainOptions& options) {
  const std::size_t n_features = model.config.input_width;
  if (instances.cols() != n_features || background.cols() != n_features) {
    throw ShapeError("explain: instances " + instances.shape_string() + ", background " +
                     background.shape_string() + " vs input_width " +
                     std::to_string(n_features));
  }
  if (instances.rows() == 0) throw ParameterError("explain: no instances");
  if (background.rows() == 0) throw ParameterError("explain: empty background set");
  if (names.size() != n_features) throw ParameterError("explain: feature name count mismatch");
  if (options.mode == ShapleyMode::exact && n_features > kExactShapleyLimit) {
    throw ParameterError("explain: exact mode supports at most " +
                         std::to_string(kExactShapleyLimit) + " features, model has " +
                         std::to_string(n_features) + "; use sampled mode");
  }
  const double target_scale = target_max - target_min;

  ShapleyReport report;
  report.mode = options.mode == ShapleyMode::exact ? "exact" : "sampled";
  report.n_instances = instances.rows();
  report.feature_names = names;
  report.mean_abs_phi.assign(n_features, 0.0);

  double base_sum = 0.0;
  Matrix composite = background;
  for (std::size_t inst = 0; inst < instances.rows(); ++inst) {
    const double* x = instances.row_ptr(inst);
    ValueFunction v = [&](std::uint64_t mask) {
      for (std::size_t b = 0; b < background.rows(); ++b) {
        double* row = composite.row_ptr(b);
        const double* bg = background.row_ptr(b);
        for (std::size_t f = 0; f < n_features; ++f) {
          row[f] = (mask & (1ULL << f)) ? x[f] : bg[f];
        }
      }
      const std::vector<double> preds = forward(model, composite);
      double acc = 0.0;
      for (double p : preds) acc += p;
      return acc / static_cast<double>(preds.size());
    };
    ShapleyValues values =
        options.mode == ShapleyMode::exact
            ? exact_shapley(v, n_features)
            : sampled_shapley(v, n_features, options.n_permutations,
                              derive_seed(options.seed, inst));
    std::vector<double> phi(n_features), se(n_features);
    for (std::size_t f = 0; f < n_features; ++f) {
      phi[f] = values.phi[f] * target_scale;
      se[f] = values.standard_error[f] * std::fabs(target_scale);
      report.mean_abs_phi[f] += std::fabs(phi[f]);
    }
    base_sum += values.base_value * target_scale + target_min;
    report.per_instance_phi.push_back(std::move(phi));
    report.per_instance_stderr.push_back(std::move(se));
  }
  for (double& v : report.mean_abs_phi) v /= static_cast<double>(report.n_instances);
  report.base_value_mean = base_sum / static_cast<double>(report.n_instances);
  report.ranking.resize(n_features);
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (report.mean_abs_phi[a] != report.mean_abs_phi[b]) {
      return report.mean_abs_phi[a] > report.mean_abs_phi[b];
    }
    return a < b;
  });
  return report;
}

inline std::string report_to_json(const ShapleyReport& report, bool include_per_instance) {
  nlohmann::json j;
  j["bucket"] = report.bucket;
  j["model"] = report.model;
  j["mode"] = report.mode;
  j["n_instances"] = report.n_instances;
  j["base_value_mean"] = report.base_value_mean;
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t rank = 0; rank < report.ranking.size(); ++rank) {
    const std::size_t f = report.ranking[rank];
    features.push_back({{"name", report.feature_names[f]},
                        {"mean_abs_phi", report.mean_abs_phi[f]},
                        {"rank", rank + 1}});
  }
  j["features"] = std::move(features);
  if (include_per_instance) {
    j["per_instance_phi"] = report.per_instance_phi;
    j["per_instance_stderr"] = report.per_instance_stderr;
  }
  return j.dump(2) + "\n";
}

inline std::string ranking_to_csv(const ShapleyReport& report) {
  std::string out = "rank,feature,mean_abs_phi\n";
  for (std::size_t rank = 0; rank < report.ranking.size(); ++rank) {
    const std::size_t f = report.ranking[rank];
    out += std::to_string(rank + 1) + "," + report.feature_names[f] + "," +
           format_double(report.mean_abs_phi[f]) + "\n";
  }
  return out;
}

}  // namespace optml
