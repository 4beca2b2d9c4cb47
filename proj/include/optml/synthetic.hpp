#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "optml/binomial.hpp"
#include "optml/calendar.hpp"
#include "optml/csv.hpp"
#include "optml/data.hpp"
#include "optml/errors.hpp"
#include "optml/rng.hpp"

namespace optml {

// Synthetic option market. The underlying follows a geometric Brownian
// walk; each trading day quotes a grid of strikes around spot against a
// calendar of fixed expirations, priced on the binomial tree; the rate and
// volatility term tables are emitted in the exact CSV formats the pipeline
// ingests.
//
// Volatility noise has two channels sharing one scale: the vol actually
// used for pricing follows a persistent AR(1) walk around its base level,
// and the published index observes that walk with independent measurement
// error. With vol_noise = 0 both collapse to the base level and (at zero
// half-spread) the recovered mid equals the tree price computed from the
// published tables exactly.

struct SyntheticConfig {
  std::uint64_t seed = 42;
  int trading_days = 120;
  std::string start_date = "2020-01-01";
  double s0 = 400.0;
  double drift = 0.05;
  double sigma = 0.18;  // underlying GBM volatility
  std::vector<double> strike_offsets = {-0.4, -0.15, -0.05, -0.01, 0.0,
                                        0.01, 0.05,  0.15,  0.4};
  std::vector<int> expiry_targets = {5, 20, 60, 135, 250};  // days to maturity
  int expiry_stride = 7;  // spacing of the fixed expiration calendar
  double half_spread = 0.0;
  std::array<double, 5> rate_base = {0.010, 0.012, 0.015, 0.018, 0.020};
  double rate_noise = 0.0;
  std::array<double, 5> vol_base = {0.18, 0.18, 0.18, 0.18, 0.18};
  double vol_noise = 0.0;
};

inline void validate(const SyntheticConfig& c) {
  if (!(c.sigma > 0.0)) throw ParameterError("sigma: must be > 0, got " + std::to_string(c.sigma));
  if (!(c.s0 > 0.0)) throw ParameterError("s0: must be > 0, got " + std::to_string(c.s0));
  if (c.trading_days < 3) throw ParameterError("trading_days: must be >= 3");
  if (c.expiry_stride < 1) throw ParameterError("expiry_stride: must be >= 1");
  if (!(c.half_spread >= 0.0)) throw ParameterError("half_spread: must be >= 0");
  if (!(c.rate_noise >= 0.0)) throw ParameterError("rate_noise: must be >= 0");
  if (!(c.vol_noise >= 0.0)) throw ParameterError("vol_noise: must be >= 0");
  if (c.strike_offsets.empty()) throw ParameterError("strike_offsets: must be non-empty");
  for (double o : c.strike_offsets) {
    if (!(o > -1.0)) throw ParameterError("strike_offsets: offsets must be > -1");
  }
  if (c.expiry_targets.empty()) throw ParameterError("expiry_targets: must be non-empty");
  for (int t : c.expiry_targets) {
    if (t < 1) throw ParameterError("expiry_targets: targets must be >= 1 day");
  }
  for (double v : c.vol_base) {
    if (!(v > 0.0)) throw ParameterError("vol_base: levels must be > 0");
  }
}

// Daily GBM path, one step per trading day.
inline std::vector<double> generate_underlying(const SyntheticConfig& c) {
  validate(c);
  std::vector<double> spots(c.trading_days);
  Rng rng(derive_seed(c.seed, 1));
  std::normal_distribution<double> z(0.0, 1.0);
  const double dt = 1.0 / 252.0;
  double s = c.s0;
  spots[0] = s;
  for (int d = 1; d < c.trading_days; ++d) {
    s *= std::exp((c.drift - 0.5 * c.sigma * c.sigma) * dt + c.sigma * std::sqrt(dt) * z(rng));
    spots[d] = s;
  }
  return spots;
}

struct SyntheticMarket {
  std::vector<RawQuote> quotes;
  TermTable rates;  // published, decimals
  TermTable vols;   // published, decimals
};

namespace detail {

constexpr double kVolPersistence = 0.95;
constexpr double kVolFloor = 0.02;

inline double clamp_vol(double v) { return v < kVolFloor ? kVolFloor : v; }

}  // namespace detail

inline SyntheticMarket generate_market(const SyntheticConfig& c) {
  validate(c);
  const std::vector<double> spots = generate_underlying(c);
  const long start = parse_date(c.start_date);

  // Per-bucket volatility: latent AR(1) walk used for pricing, plus the
  // published index with measurement noise at the same scale.
  std::vector<std::array<double, 5>> latent_vol(c.trading_days);
  SyntheticMarket market;
  {
    Rng walk_rng(derive_seed(c.seed, 2));
    Rng meas_rng(derive_seed(c.seed, 3));
    Rng rate_rng(derive_seed(c.seed, 4));
    std::normal_distribution<double> z(0.0, 1.0);
    std::array<double, 5> ar{};
    const double innovation =
        c.vol_noise * std::sqrt(1.0 - detail::kVolPersistence * detail::kVolPersistence);
    for (int d = 0; d < c.trading_days; ++d) {
      for (int b = 0; b < 5; ++b) {
        ar[b] = d == 0 ? c.vol_noise * z(walk_rng)
                       : detail::kVolPersistence * ar[b] + innovation * z(walk_rng);
        latent_vol[d][b] = detail::clamp_vol(c.vol_base[b] + ar[b]);
        const double published =
            detail::clamp_vol(latent_vol[d][b] + c.vol_noise * z(meas_rng));
        market.vols[{start + d, b}] = published;
        const double rate = std::max(0.0, c.rate_base[b] + c.rate_noise * z(rate_rng));
        market.rates[{start + d, b}] = rate;
      }
    }
  }

  std::set<std::tuple<long, double, long>> seen;
  for (int d = 0; d < c.trading_days; ++d) {
    const long quote_date = start + d;
    const double spot = spots[d];
    for (int target : c.expiry_targets) {
      // Nearest fixed expiration to the target, at least one day out.
      long expiry_day =
          (2L * (d + target) + c.expiry_stride) / (2L * c.expiry_stride) * c.expiry_stride;
      if (expiry_day <= d) expiry_day += c.expiry_stride;
      const long days = expiry_day - d;
      const int bucket = static_cast<int>(maturity_class(days));
      const double rate = market.rates.at({quote_date, bucket});
      const double pricing_vol = latent_vol[d][bucket];
      for (double offset : c.strike_offsets) {
        double strike = std::round(spot * (1.0 + offset));
        if (strike < 1.0) strike = 1.0;
        if (!seen.insert({quote_date, strike, expiry_day}).second) continue;
        TreeParams params;
        params.spot = spot;
        params.strike = strike;
        params.rate = rate;
        params.sigma = pricing_vol;
        params.steps = static_cast<int>(days);
        params.dt = 1.0 / 252.0;
        params.kind = OptionKind::call;
        params.style = ExerciseStyle::american;
        const double mid = price(params);
        RawQuote q;
        q.quote_date = quote_date;
        q.expiration_date = start + expiry_day;
        q.strike = strike;
        q.bid = std::max(0.0, mid - c.half_spread);
        q.ask = mid + c.half_spread;
        q.spot = spot;
        market.quotes.push_back(q);
      }
    }
  }
  return market;
}

inline void write_market_csvs(const std::string& dir, const SyntheticMarket& market) {
  std::string quotes = std::string(kQuotesHeader) + "\n";
  for (const auto& q : market.quotes) {
    quotes += format_date(q.quote_date) + "," + format_date(q.expiration_date) + "," +
              format_double(q.strike) + "," + format_double(q.bid) + "," + format_double(q.ask) +
              "," + format_double(q.spot) + "\n";
  }
  write_text_file(dir + "/quotes.csv", quotes);

  std::string rates = "date,bucket,rate\n";
  for (const auto& [key, value] : market.rates) {
    rates += format_date(key.first) + "," + maturity_name(static_cast<MaturityClass>(key.second)) +
             "," + format_double(value) + "\n";
  }
  write_text_file(dir + "/rates.csv", rates);

  // Index levels go out in percentage points.
  std::string vols = "date,bucket,level\n";
  for (const auto& [key, value] : market.vols) {
    vols += format_date(key.first) + "," + maturity_name(static_cast<MaturityClass>(key.second)) +
            "," + format_double(value * 100.0) + "\n";
  }
  write_text_file(dir + "/vols.csv", vols);
}

}  // namespace optml
