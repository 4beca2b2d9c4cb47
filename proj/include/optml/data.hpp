#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "optml/calendar.hpp"
#include "optml/csv.hpp"
#include "optml/errors.hpp"
#include "optml/matrix.hpp"
#include "optml/rng.hpp"

namespace optml {

// ---------------------------------------------------------------------------
// Bucket taxonomy: moneyness class x maturity class, 15 buckets total.

enum class MoneynessClass { otm = 0, atm = 1, itm = 2 };
enum class MaturityClass { d1_9 = 0, d10_30 = 1, d31_90 = 2, d91_180 = 3, d180plus = 4 };

// Moneyness = spot / strike. At or below 0.97 is out of the money, above
// 1.03 in the money, the band between is at the money.
inline MoneynessClass moneyness_class(double moneyness) {
  if (moneyness <= 0.97) return MoneynessClass::otm;
  if (moneyness <= 1.03) return MoneynessClass::atm;
  return MoneynessClass::itm;
}

// Days-to-maturity classes, closed on the right: [1,9], (9,30], (30,90],
// (90,180], (180,inf).
inline MaturityClass maturity_class(long days) {
  if (days <= 9) return MaturityClass::d1_9;
  if (days <= 30) return MaturityClass::d10_30;
  if (days <= 90) return MaturityClass::d31_90;
  if (days <= 180) return MaturityClass::d91_180;
  return MaturityClass::d180plus;
}

inline const char* maturity_name(MaturityClass m) {
  switch (m) {
    case MaturityClass::d1_9: return "d1_9";
    case MaturityClass::d10_30: return "d10_30";
    case MaturityClass::d31_90: return "d31_90";
    case MaturityClass::d91_180: return "d91_180";
    case MaturityClass::d180plus: return "d180plus";
  }
  return "?";
}

inline MaturityClass maturity_from_name(const std::string& s) {
  for (int i = 0; i < 5; ++i) {
    if (s == maturity_name(static_cast<MaturityClass>(i))) return static_cast<MaturityClass>(i);
  }
  throw DataError("unknown maturity bucket '" + s + "'");
}

inline const char* moneyness_name(MoneynessClass m) {
  switch (m) {
    case MoneynessClass::otm: return "otm";
    case MoneynessClass::atm: return "atm";
    case MoneynessClass::itm: return "itm";
  }
  return "?";
}

struct BucketKey {
  MoneynessClass moneyness;
  MaturityClass maturity;
};

inline std::string bucket_name(BucketKey k) {
  return std::string(moneyness_name(k.moneyness)) + "_" + maturity_name(k.maturity);
}

inline int bucket_index(BucketKey k) {
  return static_cast<int>(k.moneyness) * 5 + static_cast<int>(k.maturity);
}

inline BucketKey bucket_from_index(int idx) {
  return BucketKey{static_cast<MoneynessClass>(idx / 5), static_cast<MaturityClass>(idx % 5)};
}

inline const std::vector<std::string>& bucket_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (int i = 0; i < 15; ++i) v.push_back(bucket_name(bucket_from_index(i)));
    return v;
  }();
  return names;
}

inline BucketKey bucket_from_name(const std::string& name) {
  for (int i = 0; i < 15; ++i) {
    if (bucket_names()[i] == name) return bucket_from_index(i);
  }
  throw DataError("unknown bucket '" + name + "'");
}

// ---------------------------------------------------------------------------
// Raw quote ingestion.

struct RawQuote {
  long quote_date = 0;  // serial days
  long expiration_date = 0;
  double strike = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  double spot = 0.0;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based line number in the source file
  std::string reason;
};

struct IngestResult {
  std::vector<RawQuote> quotes;
  std::vector<RejectedRow> rejects;
};

inline const char* kQuotesHeader = "quote_date,expiration_date,strike,bid,ask,spot";

// Reads a quotes CSV, validating each row. Invalid rows are collected, not
// fatal; an unusable file (bad header, no rows, nothing valid) is.
inline IngestResult ingest_quotes_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file");
  {
    auto header = split_csv_line(lines[0]);
    auto expected = split_csv_line(kQuotesHeader);
    if (header != expected) {
      throw DataError(path + ": malformed header '" + lines[0] + "', expected '" +
                      kQuotesHeader + "'");
    }
  }
  if (lines.size() == 1) throw DataError(path + ": no data rows");
  IngestResult out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    try {
      if (fields.size() != 6) {
        throw DataError("expected 6 fields, got " + std::to_string(fields.size()));
      }
      RawQuote q;
      q.quote_date = parse_date(fields[0]);
      q.expiration_date = parse_date(fields[1]);
      q.strike = parse_double(fields[2], "strike");
      q.bid = parse_double(fields[3], "bid");
      q.ask = parse_double(fields[4], "ask");
      q.spot = parse_double(fields[5], "spot");
      if (!(q.strike > 0.0)) throw DataError("strike must be > 0");
      if (!(q.bid >= 0.0)) throw DataError("bid must be >= 0");
      if (!(q.ask >= q.bid)) throw DataError("crossed quote: ask < bid");
      if (!(q.spot > 0.0)) throw DataError("spot must be > 0");
      if (q.expiration_date < q.quote_date) throw DataError("expiration before quote date");
      out.quotes.push_back(q);
    } catch (const DataError& e) {
      out.rejects.push_back({i + 1, e.what()});
    }
  }
  if (out.quotes.empty()) {
    throw DataError(path + ": all " + std::to_string(out.rejects.size()) + " rows invalid");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate / volatility term tables, keyed by (date, maturity class).

using TermTable = std::map<std::pair<long, int>, double>;

namespace detail {

inline TermTable load_term_table(const std::string& path, const char* value_column,
                                 double divisor) {
  const auto lines = read_lines(path);
  const std::string expected = std::string("date,bucket,") + value_column;
  if (lines.empty() || split_csv_line(lines[0]) != split_csv_line(expected)) {
    throw DataError(path + ": malformed header, expected '" + expected + "'");
  }
  TermTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) {
      throw DataError(path + ": line " + std::to_string(i + 1) + ": expected 3 fields");
    }
    const long date = parse_date(fields[0]);
    const MaturityClass bucket = maturity_from_name(fields[1]);
    const double value = parse_double(fields[2], value_column) / divisor;
    table[{date, static_cast<int>(bucket)}] = value;
  }
  if (table.empty()) throw DataError(path + ": no data rows");
  return table;
}

}  // namespace detail

inline TermTable load_rate_table(const std::string& path) {
  return detail::load_term_table(path, "rate", 1.0);
}

// Volatility index levels are quoted in percentage points; stored as
// decimals.
inline TermTable load_vol_table(const std::string& path) {
  return detail::load_term_table(path, "level", 100.0);
}

// ---------------------------------------------------------------------------
// Enrichment: derived per-quote fields plus the maturity-matched rate and
// volatility for the quote date.

struct EnrichedRecord {
  long quote_date = 0;
  long expiration_date = 0;
  double strike = 0.0;
  double spot = 0.0;
  double mid = 0.0;
  double moneyness = 0.0;
  long days_to_maturity = 0;
  double volatility = 0.0;
  double interest_rate = 0.0;
};

struct EnrichResult {
  std::vector<EnrichedRecord> records;
  std::vector<RejectedRow> skipped;  // rows that cannot be enriched (zero-day quotes)
};

inline EnrichResult enrich(const std::vector<RawQuote>& quotes, const TermTable& rates,
                           const TermTable& vols) {
  EnrichResult out;
  std::vector<std::string> gaps;
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const RawQuote& q = quotes[i];
    const long days = q.expiration_date - q.quote_date;
    if (days < 1) {
      out.skipped.push_back({i, "expires on quote date"});
      continue;
    }
    EnrichedRecord r;
    r.quote_date = q.quote_date;
    r.expiration_date = q.expiration_date;
    r.strike = q.strike;
    r.spot = q.spot;
    r.mid = 0.5 * (q.bid + q.ask);
    r.moneyness = q.spot / q.strike;
    r.days_to_maturity = days;
    const int bucket = static_cast<int>(maturity_class(days));
    const auto rate_it = rates.find({q.quote_date, bucket});
    const auto vol_it = vols.find({q.quote_date, bucket});
    if (rate_it == rates.end() || vol_it == vols.end()) {
      if (gaps.size() < 8) {
        gaps.push_back(std::string(rate_it == rates.end() ? "rate" : "vol") + " " +
                       format_date(q.quote_date) + "/" +
                       maturity_name(static_cast<MaturityClass>(bucket)));
      }
      continue;
    }
    r.interest_rate = rate_it->second;
    r.volatility = vol_it->second;
    out.records.push_back(r);
  }
  if (!gaps.empty()) {
    std::string msg = "enrichment: missing table entries:";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }
  return out;
}

inline BucketKey bucket_assign(const EnrichedRecord& r) {
  return BucketKey{moneyness_class(r.moneyness), maturity_class(r.days_to_maturity)};
}

// ---------------------------------------------------------------------------
// Sequence samples: a contract observed on three consecutive quote dates,
// most recent first. Feature block per timestep:
//   call_price, spot_price, strike, moneyness, days_to_maturity,
//   volatility, interest_rate
// call_price1 (the anchor date's own price) is identically zero; it is the
// quantity being predicted.

constexpr std::size_t kFeatureCount = 21;
constexpr std::size_t kFeaturesPerStep = 7;

inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    const char* base[] = {"call_price", "spot_price",  "strike",       "moneyness",
                          "days_to_maturity", "volatility", "interest_rate"};
    std::array<std::string, kFeatureCount> out;
    for (int step = 0; step < 3; ++step) {
      for (int f = 0; f < 7; ++f) {
        out[step * 7 + f] = std::string(base[f]) + std::to_string(step + 1);
      }
    }
    return out;
  }();
  return names;
}

struct SequenceSample {
  std::array<double, kFeatureCount> features{};
  double target = 0.0;
  double strike = 0.0;
  long expiration_date = 0;
  long anchor_date = 0;
};

inline BucketKey bucket_assign(const SequenceSample& s) {
  return BucketKey{moneyness_class(s.features[3]),
                   maturity_class(static_cast<long>(s.features[4]))};
}

namespace detail {

inline void fill_step(std::array<double, kFeatureCount>& f, int step, const EnrichedRecord& r,
                      double call_price) {
  const std::size_t o = static_cast<std::size_t>(step) * kFeaturesPerStep;
  f[o + 0] = call_price;
  f[o + 1] = r.spot;
  f[o + 2] = r.strike;
  f[o + 3] = r.moneyness;
  f[o + 4] = static_cast<double>(r.days_to_maturity);
  f[o + 5] = r.volatility;
  f[o + 6] = r.interest_rate;
}

}  // namespace detail

// Groups records into contracts, orders each contract's history by quote
// date, and emits one sample per date that has two predecessors. By
// default a contract is a (strike, expiration) pair; strike_only_grouping
// reproduces the looser share-the-strike pairing.
inline std::vector<SequenceSample> build_sequences(const std::vector<EnrichedRecord>& records,
                                                   bool strike_only_grouping = false) {
  std::map<std::pair<double, long>, std::vector<const EnrichedRecord*>> groups;
  for (const auto& r : records) {
    const long group_expiry = strike_only_grouping ? 0 : r.expiration_date;
    groups[{r.strike, group_expiry}].push_back(&r);
  }
  std::vector<SequenceSample> samples;
  for (auto& [key, recs] : groups) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const EnrichedRecord* a, const EnrichedRecord* b) {
                       if (a->quote_date != b->quote_date) return a->quote_date < b->quote_date;
                       return a->expiration_date < b->expiration_date;
                     });
    // One record per quote date; duplicates keep the first occurrence.
    std::vector<const EnrichedRecord*> by_date;
    for (const auto* r : recs) {
      if (by_date.empty() || by_date.back()->quote_date != r->quote_date) by_date.push_back(r);
    }
    for (std::size_t j = 2; j < by_date.size(); ++j) {
      const EnrichedRecord& anchor = *by_date[j];
      const EnrichedRecord& prev1 = *by_date[j - 1];
      const EnrichedRecord& prev2 = *by_date[j - 2];
      SequenceSample s;
      detail::fill_step(s.features, 0, anchor, 0.0);
      detail::fill_step(s.features, 1, prev1, prev1.mid);
      detail::fill_step(s.features, 2, prev2, prev2.mid);
      s.target = anchor.mid;
      s.strike = anchor.strike;
      s.expiration_date = anchor.expiration_date;
      s.anchor_date = anchor.quote_date;
      samples.push_back(s);
    }
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Max-min normalization, fitted on the training split only. A degenerate
// feature (max == min) maps to zero.

struct NormalizationStats {
  std::vector<double> feature_min, feature_max;  // kFeatureCount entries
  double target_min = 0.0, target_max = 0.0;
};

inline NormalizationStats fit_normalization(const std::vector<SequenceSample>& samples,
                                            std::size_t train_count) {
  if (train_count == 0 || train_count > samples.size()) {
    throw ParameterError("fit_normalization: train_count " + std::to_string(train_count) +
                         " out of range for " + std::to_string(samples.size()) + " samples");
  }
  NormalizationStats st;
  st.feature_min.assign(kFeatureCount, std::numeric_limits<double>::infinity());
  st.feature_max.assign(kFeatureCount, -std::numeric_limits<double>::infinity());
  st.target_min = std::numeric_limits<double>::infinity();
  st.target_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train_count; ++i) {
    const auto& s = samples[i];
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      st.feature_min[f] = std::min(st.feature_min[f], s.features[f]);
      st.feature_max[f] = std::max(st.feature_max[f], s.features[f]);
    }
    st.target_min = std::min(st.target_min, s.target);
    st.target_max = std::max(st.target_max, s.target);
  }
  return st;
}

inline double normalize_value(double v, double lo, double hi) {
  return hi > lo ? (v - lo) / (hi - lo) : 0.0;
}

inline double denormalize_target(double v, const NormalizationStats& st) {
  return st.target_max > st.target_min ? v * (st.target_max - st.target_min) + st.target_min
                                       : st.target_min;
}

inline double normalize_target(double v, const NormalizationStats& st) {
  return normalize_value(v, st.target_min, st.target_max);
}

// Feature columns used by each input width. 21 keeps everything, 18 drops
// the three call-price fields, 6 keeps the anchor date's market fields.
inline std::vector<std::size_t> feature_indices(std::size_t width) {
  switch (width) {
    case 21: {
      std::vector<std::size_t> v(21);
      for (std::size_t i = 0; i < 21; ++i) v[i] = i;
      return v;
    }
    case 18: {
      std::vector<std::size_t> v;
      for (std::size_t i = 0; i < 21; ++i) {
        if (i % kFeaturesPerStep != 0) v.push_back(i);
      }
      return v;
    }
    case 6: {
      return {1, 2, 3, 4, 5, 6};
    }
    default:
      throw ParameterError("feature width must be 6, 18, or 21, got " + std::to_string(width));
  }
}

// Rows [begin, end) of the sample list as a model input matrix.
inline Matrix feature_matrix(const std::vector<SequenceSample>& samples, std::size_t begin,
                             std::size_t end, const std::vector<std::size_t>& indices,
                             const NormalizationStats* stats) {
  Matrix m(end - begin, indices.size());
  for (std::size_t r = begin; r < end; ++r) {
    double* dst = m.row_ptr(r - begin);
    for (std::size_t c = 0; c < indices.size(); ++c) {
      const std::size_t f = indices[c];
      const double v = samples[r].features[f];
      dst[c] = stats ? normalize_value(v, stats->feature_min[f], stats->feature_max[f]) : v;
    }
  }
  return m;
}

inline std::vector<double> target_vector(const std::vector<SequenceSample>& samples,
                                         std::size_t begin, std::size_t end,
                                         const NormalizationStats* stats) {
  std::vector<double> out(end - begin);
  for (std::size_t r = begin; r < end; ++r) {
    out[r - begin] = stats ? normalize_target(samples[r].target, *stats) : samples[r].target;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split: seeded shuffle, then a contiguous 70/10/20 cut.

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};

inline SplitCounts split_counts(std::size_t n) {
  if (n < 10) {
    throw DataError("split: need at least 10 samples, got " + std::to_string(n));
  }
  SplitCounts c;
  c.train = n * 7 / 10;
  c.val = n / 10;
  c.test = n - c.train - c.val;
  return c;
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// ---------------------------------------------------------------------------
// Prepared per-bucket dataset: samples stored post-shuffle, so the split is
// the contiguous [0,train), [train,train+val), [train+val,n) partition. The
// JSON sidecar carries the split seed, counts, and normalization stats
// fitted on the training rows.

struct BucketDataset {
  std::string bucket;
  std::vector<SequenceSample> samples;
  SplitCounts counts;
  NormalizationStats stats;
  std::uint64_t split_seed = 0;
};

inline std::string dataset_csv_path(const std::string& dir, const std::string& bucket) {
  return dir + "/" + bucket + ".csv";
}

inline std::string dataset_stats_path(const std::string& dir, const std::string& bucket) {
  return dir + "/" + bucket + ".stats.json";
}

inline void write_bucket_dataset(const std::string& dir, const BucketDataset& ds) {
  std::string csv;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    csv += feature_names()[f];
    csv += ",";
  }
  csv += "target,contract_id,anchor_date\n";
  for (const auto& s : ds.samples) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      csv += format_double(s.features[f]);
      csv += ",";
    }
    csv += format_double(s.target) + "," + format_double(s.strike) + ":" +
           format_date(s.expiration_date) + "," + format_date(s.anchor_date) + "\n";
  }
  write_text_file(dataset_csv_path(dir, ds.bucket), csv);

  nlohmann::json j;
  j["bucket"] = ds.bucket;
  j["split_seed"] = ds.split_seed;
  j["counts"] = {{"train", ds.counts.train}, {"val", ds.counts.val}, {"test", ds.counts.test}};
  j["feature_names"] = feature_names();
  j["feature_min"] = ds.stats.feature_min;
  j["feature_max"] = ds.stats.feature_max;
  j["target_min"] = ds.stats.target_min;
  j["target_max"] = ds.stats.target_max;
  write_text_file(dataset_stats_path(dir, ds.bucket), j.dump(2) + "\n");
}

inline BucketDataset read_bucket_dataset(const std::string& dir, const std::string& bucket) {
  BucketDataset ds;
  ds.bucket = bucket;
  const auto lines = read_lines(dataset_csv_path(dir, bucket));
  if (lines.empty()) throw DataError(dataset_csv_path(dir, bucket) + ": empty file");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != kFeatureCount + 3) {
      throw DataError(dataset_csv_path(dir, bucket) + ": line " + std::to_string(i + 1) +
                      ": expected " + std::to_string(kFeatureCount + 3) + " fields");
    }
    SequenceSample s;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      s.features[f] = parse_double(fields[f], feature_names()[f]);
    }
    s.target = parse_double(fields[kFeatureCount], "target");
    const std::string& cid = fields[kFeatureCount + 1];
    const auto colon = cid.find(':');
    if (colon == std::string::npos) {
      throw DataError(dataset_csv_path(dir, bucket) + ": bad contract_id '" + cid + "'");
    }
    s.strike = parse_double(cid.substr(0, colon), "contract_id strike");
    s.expiration_date = parse_date(cid.substr(colon + 1));
    s.anchor_date = parse_date(fields[kFeatureCount + 2]);
    ds.samples.push_back(s);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(dataset_stats_path(dir, bucket)));
    ds.split_seed = j.at("split_seed").get<std::uint64_t>();
    ds.counts.train = j.at("counts").at("train").get<std::size_t>();
    ds.counts.val = j.at("counts").at("val").get<std::size_t>();
    ds.counts.test = j.at("counts").at("test").get<std::size_t>();
    ds.stats.feature_min = j.at("feature_min").get<std::vector<double>>();
    ds.stats.feature_max = j.at("feature_max").get<std::vector<double>>();
    ds.stats.target_min = j.at("target_min").get<double>();
    ds.stats.target_max = j.at("target_max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(dataset_stats_path(dir, bucket) + ": " + e.what());
  }
  if (ds.counts.train + ds.counts.val + ds.counts.test != ds.samples.size()) {
    throw DataError(dataset_stats_path(dir, bucket) + ": split counts do not cover " +
                    std::to_string(ds.samples.size()) + " rows");
  }
  return ds;
}

// ---------------------------------------------------------------------------
// End-to-end bucketing step shared by the CLI and the tests: sequences ->
// bucket partition -> per-bucket shuffle/split/stats.

struct PrepareOptions {
  std::uint64_t seed = 0;
  bool strike_only_grouping = false;
};

inline std::map<std::string, BucketDataset> prepare_buckets(
    const std::vector<EnrichedRecord>& records, const PrepareOptions& options) {
  const auto samples = build_sequences(records, options.strike_only_grouping);
  std::array<std::vector<SequenceSample>, 15> partition;
  for (const auto& s : samples) partition[bucket_index(bucket_assign(s))].push_back(s);
  std::map<std::string, BucketDataset> out;
  for (int b = 0; b < 15; ++b) {
    auto& bucket_samples = partition[b];
    if (bucket_samples.empty()) continue;
    const std::string name = bucket_names()[b];
    if (bucket_samples.size() < 10) {
      throw DataError("bucket " + name + ": " + std::to_string(bucket_samples.size()) +
                      " samples, need at least 10 to split");
    }
    BucketDataset ds;
    ds.bucket = name;
    ds.split_seed = derive_seed(options.seed, static_cast<std::uint64_t>(b));
    const auto idx = shuffled_indices(bucket_samples.size(), ds.split_seed);
    ds.samples.reserve(bucket_samples.size());
    for (std::size_t i : idx) ds.samples.push_back(bucket_samples[i]);
    ds.counts = split_counts(ds.samples.size());
    ds.stats = fit_normalization(ds.samples, ds.counts.train);
    out.emplace(name, std::move(ds));
  }
  return out;
}

}  // namespace optml
