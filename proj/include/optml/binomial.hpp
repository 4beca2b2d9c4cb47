#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "optml/errors.hpp"

namespace optml {

enum class OptionKind { call, put };
enum class ExerciseStyle { american, european };

// Recombining binomial tree parameters. dt defaults to one trading day
// (1/252 years) with steps = days to maturity; both are overridable for
// convergence experiments, keeping steps * dt equal to the intended
// maturity in years.
struct TreeParams {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double sigma = 0.0;
  int steps = 0;
  double dt = 1.0 / 252.0;
  OptionKind kind = OptionKind::call;
  ExerciseStyle style = ExerciseStyle::american;
};

inline void validate(const TreeParams& p) {
  if (!(p.spot > 0.0)) throw ParameterError("spot: must satisfy S > 0, got " + std::to_string(p.spot));
  if (!(p.strike >= 0.0))
    throw ParameterError("strike: must satisfy K >= 0, got " + std::to_string(p.strike));
  if (!(p.sigma > 0.0))
    throw ParameterError("sigma: must satisfy sigma > 0, got " + std::to_string(p.sigma));
  if (!(p.steps >= 1)) throw ParameterError("steps: must satisfy n >= 1, got " + std::to_string(p.steps));
  if (!(p.dt > 0.0)) throw ParameterError("dt: must satisfy dt > 0, got " + std::to_string(p.dt));
  if (!std::isfinite(p.rate)) throw ParameterError("rate: must be finite");
}

// Up factor e^{sigma sqrt(dt)}; down factor is its reciprocal, so u*d = 1
// and the tree recombines.
inline double up_factor(const TreeParams& p) { return std::exp(p.sigma * std::sqrt(p.dt)); }
inline double down_factor(const TreeParams& p) { return 1.0 / up_factor(p); }

// Risk-neutral probability (e^{r dt} - d) / (u - d). The no-arbitrage
// condition u > e^{r dt} > d is checked here and at pricing time.
inline double risk_neutral_probability(const TreeParams& p) {
  validate(p);
  const double u = up_factor(p);
  const double d = 1.0 / u;
  const double growth = std::exp(p.rate * p.dt);
  if (!(u > growth && growth > d)) {
    throw ParameterError("no-arbitrage violation: need u > e^{r dt} > d, got u=" +
                         std::to_string(u) + ", e^{r dt}=" + std::to_string(growth) +
                         ", d=" + std::to_string(d));
  }
  return (growth - d) / (u - d);
}

// Triangular node storage: level t holds t+1 values, node (t, i) after i
// down moves. Underlying node value is S0 * u^(t-i) * d^i.
struct PriceTree {
  std::vector<std::vector<double>> levels;
};

inline double payoff(OptionKind kind, double s, double k) {
  return kind == OptionKind::call ? std::max(s - k, 0.0) : std::max(k - s, 0.0);
}

inline PriceTree build_underlying_tree(const TreeParams& p) {
  validate(p);
  const double u = up_factor(p);
  const double d = 1.0 / u;
  PriceTree tree;
  tree.levels.resize(p.steps + 1);
  for (int t = 0; t <= p.steps; ++t) {
    tree.levels[t].resize(t + 1);
    for (int i = 0; i <= t; ++i) {
      tree.levels[t][i] = p.spot * std::pow(u, t - i) * std::pow(d, i);
    }
  }
  return tree;
}

// Backward induction over a single reusable vector. American style takes
// max(intrinsic, continuation) at every interior node.
inline double price(const TreeParams& p) {
  const double q = risk_neutral_probability(p);
  const double u = up_factor(p);
  const double d = 1.0 / u;
  const double disc = std::exp(-p.rate * p.dt);
  std::vector<double> values(p.steps + 1);
  for (int i = 0; i <= p.steps; ++i) {
    const double s = p.spot * std::pow(u, p.steps - i) * std::pow(d, i);
    values[i] = payoff(p.kind, s, p.strike);
  }
  for (int t = p.steps - 1; t >= 0; --t) {
    for (int i = 0; i <= t; ++i) {
      double cont = disc * (q * values[i] + (1.0 - q) * values[i + 1]);
      if (p.style == ExerciseStyle::american) {
        const double s = p.spot * std::pow(u, t - i) * std::pow(d, i);
        cont = std::max(cont, payoff(p.kind, s, p.strike));
      }
      values[i] = cont;
    }
  }
  if (!std::isfinite(values[0])) throw NumericError("binomial price is not finite");
  return values[0];
}

struct PriceResult {
  double price = 0.0;
  PriceTree option_tree;
};

// Same roll-back, retaining every level of option values.
inline PriceResult price_with_tree(const TreeParams& p) {
  const double q = risk_neutral_probability(p);
  const double u = up_factor(p);
  const double d = 1.0 / u;
  const double disc = std::exp(-p.rate * p.dt);
  PriceResult out;
  out.option_tree.levels.resize(p.steps + 1);
  auto& lv = out.option_tree.levels;
  lv[p.steps].resize(p.steps + 1);
  for (int i = 0; i <= p.steps; ++i) {
    const double s = p.spot * std::pow(u, p.steps - i) * std::pow(d, i);
    lv[p.steps][i] = payoff(p.kind, s, p.strike);
  }
  for (int t = p.steps - 1; t >= 0; --t) {
    lv[t].resize(t + 1);
    for (int i = 0; i <= t; ++i) {
      double cont = disc * (q * lv[t + 1][i] + (1.0 - q) * lv[t + 1][i + 1]);
      if (p.style == ExerciseStyle::american) {
        const double s = p.spot * std::pow(u, t - i) * std::pow(d, i);
        cont = std::max(cont, payoff(p.kind, s, p.strike));
      }
      lv[t][i] = cont;
    }
  }
  out.price = lv[0][0];
  if (!std::isfinite(out.price)) throw NumericError("binomial price is not finite");
  return out;
}

}  // namespace optml
