// Command-line front end: synthetic market generation, dataset
// preparation, tree pricing, model training, cross-model evaluation, and
// Shapley attribution. Exit codes: 0 success, 1 usage, 2 data error,
// 3 numeric error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "optml/binomial.hpp"
#include "optml/csv.hpp"
#include "optml/data.hpp"
#include "optml/metrics.hpp"
#include "optml/network.hpp"
#include "optml/shapley.hpp"
#include "optml/synthetic.hpp"
#include "optml/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace optml;

namespace {

json load_config_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError("config file " + path + ": " + e.what());
  }
}

// Config-file values fill in only where the flag was not given on the
// command line; flags always win.
template <typename T>
void fill_from_config(const CLI::Option* opt, const json& cfg, const char* key, T& field) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    field = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_snapshot(const std::string& out_dir, const std::string& name, const json& resolved) {
  write_text_file(out_dir + "/" + name + ".config.json", resolved.dump(2) + "\n");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string out;
  std::string config_path;
  SyntheticConfig cfg;
};

int cmd_generate(const GenerateArgs& args) {
  ensure_out_dir(args.out);
  SyntheticMarket market = generate_market(args.cfg);
  write_market_csvs(args.out, market);
  json snapshot = {{"seed", args.cfg.seed},
                   {"trading_days", args.cfg.trading_days},
                   {"start_date", args.cfg.start_date},
                   {"s0", args.cfg.s0},
                   {"drift", args.cfg.drift},
                   {"sigma", args.cfg.sigma},
                   {"strike_offsets", args.cfg.strike_offsets},
                   {"expiry_targets", args.cfg.expiry_targets},
                   {"expiry_stride", args.cfg.expiry_stride},
                   {"half_spread", args.cfg.half_spread},
                   {"rate_base", args.cfg.rate_base},
                   {"rate_noise", args.cfg.rate_noise},
                   {"vol_base", args.cfg.vol_base},
                   {"vol_noise", args.cfg.vol_noise}};
  write_snapshot(args.out, "generate", snapshot);
  std::cout << "wrote " << market.quotes.size() << " quotes over " << args.cfg.trading_days
            << " days to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
  std::string quotes, rates, vols, out;
  std::uint64_t seed = 0;
  bool strike_only = false;
};

int cmd_prepare(const PrepareArgs& args) {
  ensure_out_dir(args.out);
  IngestResult ingest = ingest_quotes_csv(args.quotes);
  TermTable rates = load_rate_table(args.rates);
  TermTable vols = load_vol_table(args.vols);
  EnrichResult enriched = enrich(ingest.quotes, rates, vols);

  PrepareOptions options;
  options.seed = args.seed;
  options.strike_only_grouping = args.strike_only;
  auto buckets = prepare_buckets(enriched.records, options);

  for (const auto& [name, ds] : buckets) write_bucket_dataset(args.out, ds);

  std::string rejects = "source,line,reason\n";
  for (const auto& r : ingest.rejects) {
    rejects += "ingest," + std::to_string(r.line) + "," + r.reason + "\n";
  }
  for (const auto& r : enriched.skipped) {
    rejects += "enrich," + std::to_string(r.line) + "," + r.reason + "\n";
  }
  write_text_file(args.out + "/rejects.csv", rejects);

  json snapshot = {{"quotes", args.quotes}, {"rates", args.rates},   {"vols", args.vols},
                   {"seed", args.seed},     {"strike_only", args.strike_only}};
  write_snapshot(args.out, "prepare", snapshot);

  for (const auto& name : bucket_names()) {
    auto it = buckets.find(name);
    if (it == buckets.end()) {
      std::cout << name << ": 0 samples\n";
    } else {
      const auto& c = it->second.counts;
      std::cout << name << ": " << it->second.samples.size() << " samples (train " << c.train
                << ", val " << c.val << ", test " << c.test << ")\n";
    }
  }
  std::cout << "rejected rows: " << ingest.rejects.size() << ", unenrichable rows: "
            << enriched.skipped.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// price

struct PriceArgs {
  double spot = 0.0, strike = 0.0, rate = 0.0, sigma = 0.0;
  int days = 0;
  int steps = 0;  // 0 = one step per day
  std::string style = "american";
  std::string kind = "call";
  std::string out;
};

int cmd_price(const PriceArgs& args) {
  if (args.days < 1) throw ParameterError("days: must be >= 1, got " + std::to_string(args.days));
  TreeParams params;
  params.spot = args.spot;
  params.strike = args.strike;
  params.rate = args.rate;
  params.sigma = args.sigma;
  const double years = static_cast<double>(args.days) / 252.0;
  params.steps = args.steps > 0 ? args.steps : args.days;
  params.dt = years / static_cast<double>(params.steps);
  if (args.style == "american") params.style = ExerciseStyle::american;
  else if (args.style == "european") params.style = ExerciseStyle::european;
  else throw ParameterError("style: expected american|european, got '" + args.style + "'");
  if (args.kind == "call") params.kind = OptionKind::call;
  else if (args.kind == "put") params.kind = OptionKind::put;
  else throw ParameterError("kind: expected call|put, got '" + args.kind + "'");

  const double value = price(params);
  std::cout << format_double(value) << "\n";
  if (!args.out.empty()) {
    ensure_out_dir(args.out);
    write_text_file(args.out + "/price.txt", format_double(value) + "\n");
    json snapshot = {{"spot", args.spot},   {"strike", args.strike}, {"rate", args.rate},
                     {"sigma", args.sigma}, {"days", args.days},     {"steps", params.steps},
                     {"style", args.style}, {"kind", args.kind}};
    write_snapshot(args.out, "price", snapshot);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data, out;
  std::vector<std::string> architectures = {"mlp", "lstm", "sa_lstm", "sa_gru"};
  std::vector<std::string> buckets;  // empty = all with a dataset file
  std::uint64_t seed = 0;
  std::size_t features = 0;  // 0 = per-architecture default (mlp 6, recurrent 21)
  std::size_t hidden = 64;
  std::size_t depth = 0;  // 0 = per-architecture default (mlp 2, recurrent 6)
  std::size_t attention_dim = 0;
  std::string pool = "last";
  double learning_rate = 0.0;  // 0 = per-architecture default
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 0;  // 0 = fixed 2000 / size-scaled budget
  std::size_t patience = 2000;
  double min_delta = 1e-7;
};

std::vector<std::string> buckets_with_datasets(const std::string& dir) {
  std::vector<std::string> present;
  for (const auto& name : bucket_names()) {
    if (fs::exists(dataset_csv_path(dir, name))) present.push_back(name);
  }
  return present;
}

int cmd_train(const TrainArgs& args) {
  ensure_out_dir(args.out);
  std::vector<std::string> buckets = args.buckets;
  if (buckets.empty()) buckets = buckets_with_datasets(args.data);
  if (buckets.empty()) throw DataError("no bucket datasets found in " + args.data);
  if (args.pool != "last" && args.pool != "mean") {
    throw ParameterError("pool: expected last|mean, got '" + args.pool + "'");
  }

  std::vector<std::string> failures;
  for (const auto& bucket : buckets) {
    BucketDataset ds = read_bucket_dataset(args.data, bucket);
    const auto& c = ds.counts;
    const int b_index = bucket_index(bucket_from_name(bucket));
    for (std::size_t a = 0; a < args.architectures.size(); ++a) {
      NetworkConfig net_config;
      net_config.architecture = architecture_from_name(args.architectures[a]);
      const bool mlp = net_config.architecture == Architecture::mlp;
      net_config.input_width = args.features != 0 ? args.features : (mlp ? 6 : 21);
      net_config.timesteps = mlp ? 1 : (net_config.input_width == 6 ? 1 : 3);
      net_config.hidden_width = args.hidden;
      net_config.depth = args.depth != 0 ? args.depth : (mlp ? 2 : 6);
      net_config.attention_dim = args.attention_dim;
      net_config.pool = args.pool == "mean" ? AttentionPool::mean : AttentionPool::last;
      net_config.seed = derive_seed(args.seed, static_cast<std::uint64_t>(b_index),
                                    a * 1000 + net_config.input_width);

      TrainConfig train_config;
      train_config.learning_rate = args.learning_rate > 0.0
                                       ? args.learning_rate
                                       : default_learning_rate(net_config.architecture);
      train_config.batch_size = args.batch_size;
      train_config.patience = args.patience;
      train_config.min_delta = args.min_delta;
      train_config.shuffle_seed = derive_seed(net_config.seed, 0x5EED);
      const bool budgeted = !mlp && net_config.input_width > 6;
      train_config.max_epochs =
          args.max_epochs != 0 ? args.max_epochs : (budgeted ? epoch_budget(c.train) : 2000);

      const std::string tag = model_tag(net_config);
      const auto idx = feature_indices(net_config.input_width);
      Matrix train_x = feature_matrix(ds.samples, 0, c.train, idx, &ds.stats);
      auto train_y = target_vector(ds.samples, 0, c.train, &ds.stats);
      Matrix val_x = feature_matrix(ds.samples, c.train, c.train + c.val, idx, &ds.stats);
      auto val_y = target_vector(ds.samples, c.train, c.train + c.val, &ds.stats);
      try {
        TrainResult result = train(net_config, train_config, train_x, train_y, val_x, val_y);
        write_text_file(args.out + "/" + bucket + "." + tag + ".model.json",
                        serialize_model(result.model) + "\n");
        write_text_file(args.out + "/" + bucket + "." + tag + ".history.csv",
                        history_to_csv(result.history));
        std::cout << bucket << " " << tag << ": epochs " << result.epochs_run << ", best epoch "
                  << result.best_epoch << ", val mse " << format_double(result.best_val_mse)
                  << "\n";
      } catch (const NumericError& e) {
        failures.push_back(bucket + " " + tag + ": " + e.what());
        std::cerr << "error: " << failures.back() << "\n";
      }
    }
  }

  json snapshot = {{"data", args.data},
                   {"architectures", args.architectures},
                   {"buckets", buckets},
                   {"seed", args.seed},
                   {"features", args.features},
                   {"hidden", args.hidden},
                   {"depth", args.depth},
                   {"attention_dim", args.attention_dim},
                   {"pool", args.pool},
                   {"learning_rate", args.learning_rate},
                   {"batch_size", args.batch_size},
                   {"max_epochs", args.max_epochs},
                   {"patience", args.patience},
                   {"min_delta", args.min_delta}};
  write_snapshot(args.out, "train", snapshot);
  if (!failures.empty()) {
    std::cerr << failures.size() << " training run(s) failed\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string data, models, out;
  std::vector<std::string> buckets;
};

std::vector<double> tree_baseline_predictions(const BucketDataset& ds, std::size_t begin,
                                              std::size_t end) {
  std::vector<double> preds;
  preds.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const auto& f = ds.samples[i].features;
    TreeParams params;
    params.spot = f[1];
    params.strike = f[2];
    params.rate = f[6];
    params.sigma = f[5];
    params.steps = static_cast<int>(f[4]);
    params.dt = 1.0 / 252.0;
    params.kind = OptionKind::call;
    params.style = ExerciseStyle::american;
    preds.push_back(price(params));
  }
  return preds;
}

int cmd_evaluate(const EvaluateArgs& args) {
  ensure_out_dir(args.out);
  std::vector<std::string> buckets = args.buckets;
  if (buckets.empty()) buckets = buckets_with_datasets(args.data);
  if (buckets.empty()) throw DataError("no bucket datasets found in " + args.data);

  // Checkpoints are named <bucket>.<TAG>.model.json.
  std::map<std::string, std::map<std::string, std::string>> checkpoints;  // bucket -> tag -> path
  std::set<std::string> all_tags;
  for (const auto& entry : fs::directory_iterator(args.models)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".model.json";
    if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix) {
      continue;
    }
    const std::string stem = name.substr(0, name.size() - suffix.size());
    const auto dot = stem.find('.');
    if (dot == std::string::npos) continue;
    const std::string bucket = stem.substr(0, dot);
    const std::string tag = stem.substr(dot + 1);
    checkpoints[bucket][tag] = entry.path().string();
    all_tags.insert(tag);
  }

  std::vector<std::string> columns = {"BT"};
  columns.insert(columns.end(), all_tags.begin(), all_tags.end());

  std::vector<ReportRow> rmse_rows, mape_rows, r2_rows;
  std::string exclusions = "bucket,model,mape_excluded\n";
  bool any_excluded = false;
  for (const auto& bucket : buckets) {
    BucketDataset ds = read_bucket_dataset(args.data, bucket);
    const std::size_t begin = ds.counts.train + ds.counts.val;
    const std::size_t end = ds.samples.size();
    ReportRow rmse_row{bucket, {}}, mape_row{bucket, {}}, r2_row{bucket, {}};
    if (begin < end) {
      const auto targets = target_vector(ds.samples, begin, end, nullptr);
      auto score = [&](const std::string& tag, const std::vector<double>& preds) {
        ModelMetrics m = compute_metrics(targets, preds);
        rmse_row.values[tag] = m.rmse;
        mape_row.values[tag] = m.mape;
        r2_row.values[tag] = m.r_squared;
        if (m.mape_excluded > 0) {
          exclusions += bucket + "," + tag + "," + std::to_string(m.mape_excluded) + "\n";
          any_excluded = true;
        }
      };
      score("BT", tree_baseline_predictions(ds, begin, end));
      auto bucket_models = checkpoints.find(bucket);
      for (const auto& tag : all_tags) {
        if (bucket_models == checkpoints.end() ||
            bucket_models->second.find(tag) == bucket_models->second.end()) {
          std::cerr << "warning: no " << tag << " checkpoint for bucket " << bucket << "\n";
          continue;
        }
        Network model = deserialize_model(read_text_file(bucket_models->second.at(tag)));
        const auto idx = feature_indices(model.config.input_width);
        Matrix x = feature_matrix(ds.samples, begin, end, idx, &ds.stats);
        std::vector<double> preds = forward(model, x);
        for (double& p : preds) p = denormalize_target(p, ds.stats);
        score(tag, preds);
      }
    } else {
      std::cerr << "warning: bucket " << bucket << " has an empty test split\n";
    }
    rmse_rows.push_back(std::move(rmse_row));
    mape_rows.push_back(std::move(mape_row));
    r2_rows.push_back(std::move(r2_row));
  }

  struct Out {
    const char* name;
    std::vector<ReportRow>* rows;
    bool lower_better;
  } outputs[] = {{"rmse", &rmse_rows, true}, {"mape", &mape_rows, true},
                 {"r_squared", &r2_rows, false}};
  for (const auto& o : outputs) {
    ReportTable t = build_report_table(*o.rows, columns, o.lower_better);
    write_text_file(args.out + "/" + o.name + ".csv", render_table_csv(t));
    write_text_file(args.out + "/" + o.name + ".txt", render_table_text(t));
    std::cout << o.name << ":\n" << render_table_text(t) << "\n";
  }
  if (any_excluded) write_text_file(args.out + "/mape_exclusions.csv", exclusions);

  json snapshot = {{"data", args.data}, {"models", args.models}, {"buckets", buckets}};
  write_snapshot(args.out, "evaluate", snapshot);
  return 0;
}

// ---------------------------------------------------------------------------
// explain

struct ExplainArgs {
  std::string data, models, out, bucket;
  std::string tag = "SA_GRU_21F";
  std::string mode = "sampled";
  std::size_t permutations = 2000;
  std::size_t background = 100;
  std::size_t instances = 1000;
  std::uint64_t seed = 0;
  bool per_instance = true;
};

int cmd_explain(const ExplainArgs& args) {
  ensure_out_dir(args.out);
  if (args.mode != "exact" && args.mode != "sampled") {
    throw ParameterError("mode: expected exact|sampled, got '" + args.mode + "'");
  }
  BucketDataset ds = read_bucket_dataset(args.data, args.bucket);
  const std::string model_path = args.models + "/" + args.bucket + "." + args.tag + ".model.json";
  if (!fs::exists(model_path)) throw DataError("no checkpoint at " + model_path);
  Network model = deserialize_model(read_text_file(model_path));
  const auto idx = feature_indices(model.config.input_width);

  const auto& c = ds.counts;
  if (c.test == 0) throw DataError("bucket " + args.bucket + " has an empty test split");
  const std::size_t test_begin = c.train + c.val;

  // Seeded subsets: instances from the test split, background from train.
  const auto test_order = shuffled_indices(c.test, derive_seed(args.seed, 101));
  const std::size_t n_inst = std::min(args.instances, c.test);
  std::vector<SequenceSample> chosen;
  for (std::size_t i = 0; i < n_inst; ++i) {
    chosen.push_back(ds.samples[test_begin + test_order[i]]);
  }
  const auto train_order = shuffled_indices(c.train, derive_seed(args.seed, 102));
  const std::size_t n_bg = std::min(args.background, c.train);
  if (n_bg == 0) throw DataError("bucket " + args.bucket + " has an empty training split");
  std::vector<SequenceSample> background;
  for (std::size_t i = 0; i < n_bg; ++i) background.push_back(ds.samples[train_order[i]]);

  Matrix instances = feature_matrix(chosen, 0, chosen.size(), idx, &ds.stats);
  Matrix background_x = feature_matrix(background, 0, background.size(), idx, &ds.stats);
  std::vector<std::string> names;
  for (std::size_t f : idx) names.push_back(feature_names()[f]);

  ExplainOptions options;
  options.mode = args.mode == "exact" ? ShapleyMode::exact : ShapleyMode::sampled;
  options.n_permutations = args.permutations;
  options.seed = derive_seed(args.seed, 103);
  ShapleyReport report = explain_instances(model, instances, background_x, ds.stats.target_min,
                                           ds.stats.target_max, names, options);
  report.bucket = args.bucket;
  report.model = args.tag;

  const std::string base = args.out + "/shap_" + args.bucket + "_" + args.tag;
  write_text_file(base + ".json", report_to_json(report, args.per_instance));
  write_text_file(base + ".csv", ranking_to_csv(report));

  json snapshot = {{"data", args.data},       {"models", args.models},
                   {"bucket", args.bucket},   {"tag", args.tag},
                   {"mode", args.mode},       {"permutations", args.permutations},
                   {"background", n_bg},      {"instances", n_inst},
                   {"seed", args.seed},       {"per_instance", args.per_instance}};
  write_snapshot(args.out, "explain", snapshot);

  std::cout << "bucket " << args.bucket << ", model " << args.tag << ", mode " << report.mode
            << ", " << report.n_instances << " instances, base value "
            << format_double(report.base_value_mean) << "\n";
  const std::size_t top = std::min<std::size_t>(5, report.ranking.size());
  for (std::size_t r = 0; r < top; ++r) {
    const std::size_t f = report.ranking[r];
    std::cout << (r + 1) << ". " << report.feature_names[f] << " "
              << format_double(report.mean_abs_phi[f]) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binomial pricing, sequence models, and Shapley attribution for American options"};
  app.require_subcommand(1);

  GenerateArgs gen;
  std::string gen_config;
  std::vector<double> gen_rate_base, gen_vol_base;
  auto* generate = app.add_subcommand("generate", "write a synthetic market (quotes + tables)");
  generate->add_option("--out", gen.out, "output directory")->required();
  auto* g_cfg = generate->add_option("--config", gen_config, "JSON config file");
  auto* g_seed = generate->add_option("--seed", gen.cfg.seed, "RNG seed");
  auto* g_days = generate->add_option("--days", gen.cfg.trading_days, "trading days");
  auto* g_start = generate->add_option("--start-date", gen.cfg.start_date, "first quote date");
  auto* g_s0 = generate->add_option("--s0", gen.cfg.s0, "initial spot");
  auto* g_drift = generate->add_option("--drift", gen.cfg.drift, "annual drift");
  auto* g_sigma = generate->add_option("--sigma", gen.cfg.sigma, "underlying volatility");
  auto* g_offsets = generate->add_option("--strike-offsets", gen.cfg.strike_offsets,
                                         "relative strike offsets")->delimiter(',');
  auto* g_targets = generate->add_option("--expiry-targets", gen.cfg.expiry_targets,
                                         "target days to maturity")->delimiter(',');
  auto* g_stride = generate->add_option("--expiry-stride", gen.cfg.expiry_stride,
                                        "expiration calendar spacing (days)");
  auto* g_spread = generate->add_option("--half-spread", gen.cfg.half_spread, "half bid-ask spread");
  auto* g_rate_base = generate->add_option("--rate-base", gen_rate_base,
                                           "per-bucket base rates (5 values)")->delimiter(',');
  auto* g_rate_noise = generate->add_option("--rate-noise", gen.cfg.rate_noise, "rate noise scale");
  auto* g_vol_base = generate->add_option("--vol-base", gen_vol_base,
                                          "per-bucket base vols (5 values)")->delimiter(',');
  auto* g_vol_noise = generate->add_option("--vol-noise", gen.cfg.vol_noise, "vol noise scale");

  PrepareArgs prep;
  std::string prep_config;
  auto* prepare = app.add_subcommand("prepare", "bucket quotes into model-ready datasets");
  prepare->add_option("--quotes", prep.quotes, "quotes CSV")->required();
  prepare->add_option("--rates", prep.rates, "rate table CSV")->required();
  prepare->add_option("--vols", prep.vols, "volatility table CSV")->required();
  prepare->add_option("--out", prep.out, "output directory")->required();
  auto* p_cfg = prepare->add_option("--config", prep_config, "JSON config file");
  auto* p_seed = prepare->add_option("--seed", prep.seed, "split shuffle seed");
  auto* p_strike_only = prepare->add_flag("--strike-only", prep.strike_only,
                                          "group contracts by strike alone");

  PriceArgs pr;
  auto* price_cmd = app.add_subcommand("price", "price one option on the binomial tree");
  price_cmd->add_option("--spot", pr.spot, "spot price")->required();
  price_cmd->add_option("--strike", pr.strike, "strike price")->required();
  price_cmd->add_option("--rate", pr.rate, "annual risk-free rate")->required();
  price_cmd->add_option("--sigma", pr.sigma, "annual volatility")->required();
  price_cmd->add_option("--days", pr.days, "days to maturity")->required();
  price_cmd->add_option("--steps", pr.steps, "tree steps (default: one per day)");
  price_cmd->add_option("--style", pr.style, "american|european");
  price_cmd->add_option("--kind", pr.kind, "call|put");
  price_cmd->add_option("--out", pr.out, "optional output directory");

  TrainArgs tr;
  std::string train_config_path;
  auto* train_cmd = app.add_subcommand("train", "train models per bucket");
  train_cmd->add_option("--data", tr.data, "prepared dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "checkpoint output directory")->required();
  auto* t_cfg = train_cmd->add_option("--config", train_config_path, "JSON config file");
  auto* t_arch = train_cmd->add_option("--architectures", tr.architectures,
                                       "mlp,lstm,sa_lstm,sa_gru")->delimiter(',');
  auto* t_buckets = train_cmd->add_option("--buckets", tr.buckets, "bucket names")->delimiter(',');
  auto* t_seed = train_cmd->add_option("--seed", tr.seed, "RNG seed");
  auto* t_features = train_cmd->add_option("--features", tr.features,
                                           "input width 6|18|21 (default per architecture)");
  auto* t_hidden = train_cmd->add_option("--hidden", tr.hidden, "hidden width");
  auto* t_depth = train_cmd->add_option("--depth", tr.depth, "layer count (default per architecture)");
  auto* t_attn = train_cmd->add_option("--attention-dim", tr.attention_dim,
                                       "attention projection width (default hidden)");
  auto* t_pool = train_cmd->add_option("--pool", tr.pool, "attention pooling: last|mean");
  auto* t_lr = train_cmd->add_option("--learning-rate", tr.learning_rate,
                                     "Adam learning rate (default per architecture)");
  auto* t_batch = train_cmd->add_option("--batch-size", tr.batch_size, "minibatch size");
  auto* t_epochs = train_cmd->add_option("--max-epochs", tr.max_epochs,
                                         "epoch cap (default: budget rule)");
  auto* t_patience = train_cmd->add_option("--patience", tr.patience, "early stopping patience");
  auto* t_delta = train_cmd->add_option("--min-delta", tr.min_delta, "early stopping min delta");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "score checkpoints and the tree baseline");
  eval_cmd->add_option("--data", ev.data, "prepared dataset directory")->required();
  eval_cmd->add_option("--models", ev.models, "checkpoint directory")->required();
  eval_cmd->add_option("--out", ev.out, "report output directory")->required();
  eval_cmd->add_option("--buckets", ev.buckets, "bucket names")->delimiter(',');

  ExplainArgs ex;
  auto* explain_cmd = app.add_subcommand("explain", "Shapley feature attribution for a checkpoint");
  explain_cmd->add_option("--data", ex.data, "prepared dataset directory")->required();
  explain_cmd->add_option("--models", ex.models, "checkpoint directory")->required();
  explain_cmd->add_option("--bucket", ex.bucket, "bucket name")->required();
  explain_cmd->add_option("--out", ex.out, "report output directory")->required();
  explain_cmd->add_option("--tag", ex.tag, "model tag (default SA_GRU_21F)");
  explain_cmd->add_option("--mode", ex.mode, "exact|sampled");
  explain_cmd->add_option("--permutations", ex.permutations, "sampled-mode permutations");
  explain_cmd->add_option("--background", ex.background, "background rows from the train split");
  explain_cmd->add_option("--instances", ex.instances, "test instances to explain");
  explain_cmd->add_option("--seed", ex.seed, "RNG seed");
  explain_cmd->add_flag("--per-instance,!--no-per-instance", ex.per_instance,
                        "include per-instance attributions in the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (generate->parsed()) {
      if (g_cfg->count() > 0) {
        json cfg = load_config_file(gen_config);
        fill_from_config(g_seed, cfg, "seed", gen.cfg.seed);
        fill_from_config(g_days, cfg, "trading_days", gen.cfg.trading_days);
        fill_from_config(g_start, cfg, "start_date", gen.cfg.start_date);
        fill_from_config(g_s0, cfg, "s0", gen.cfg.s0);
        fill_from_config(g_drift, cfg, "drift", gen.cfg.drift);
        fill_from_config(g_sigma, cfg, "sigma", gen.cfg.sigma);
        fill_from_config(g_offsets, cfg, "strike_offsets", gen.cfg.strike_offsets);
        fill_from_config(g_targets, cfg, "expiry_targets", gen.cfg.expiry_targets);
        fill_from_config(g_stride, cfg, "expiry_stride", gen.cfg.expiry_stride);
        fill_from_config(g_spread, cfg, "half_spread", gen.cfg.half_spread);
        fill_from_config(g_rate_noise, cfg, "rate_noise", gen.cfg.rate_noise);
        fill_from_config(g_vol_noise, cfg, "vol_noise", gen.cfg.vol_noise);
        std::vector<double> tmp;
        fill_from_config(g_rate_base, cfg, "rate_base", tmp);
        if (!tmp.empty()) gen_rate_base = tmp;
        tmp.clear();
        fill_from_config(g_vol_base, cfg, "vol_base", tmp);
        if (!tmp.empty()) gen_vol_base = tmp;
      }
      auto fill5 = [](const std::vector<double>& src, std::array<double, 5>& dst,
                      const char* name) {
        if (src.empty()) return;
        if (src.size() != 5) {
          throw ParameterError(std::string(name) + ": expected 5 values, got " +
                               std::to_string(src.size()));
        }
        std::copy(src.begin(), src.end(), dst.begin());
      };
      fill5(gen_rate_base, gen.cfg.rate_base, "rate_base");
      fill5(gen_vol_base, gen.cfg.vol_base, "vol_base");
      return cmd_generate(gen);
    }
    if (prepare->parsed()) {
      if (p_cfg->count() > 0) {
        json cfg = load_config_file(prep_config);
        fill_from_config(p_seed, cfg, "seed", prep.seed);
        fill_from_config(p_strike_only, cfg, "strike_only", prep.strike_only);
      }
      return cmd_prepare(prep);
    }
    if (price_cmd->parsed()) return cmd_price(pr);
    if (train_cmd->parsed()) {
      if (t_cfg->count() > 0) {
        json cfg = load_config_file(train_config_path);
        fill_from_config(t_arch, cfg, "architectures", tr.architectures);
        fill_from_config(t_buckets, cfg, "buckets", tr.buckets);
        fill_from_config(t_seed, cfg, "seed", tr.seed);
        fill_from_config(t_features, cfg, "features", tr.features);
        fill_from_config(t_hidden, cfg, "hidden", tr.hidden);
        fill_from_config(t_depth, cfg, "depth", tr.depth);
        fill_from_config(t_attn, cfg, "attention_dim", tr.attention_dim);
        fill_from_config(t_pool, cfg, "pool", tr.pool);
        fill_from_config(t_lr, cfg, "learning_rate", tr.learning_rate);
        fill_from_config(t_batch, cfg, "batch_size", tr.batch_size);
        fill_from_config(t_epochs, cfg, "max_epochs", tr.max_epochs);
        fill_from_config(t_patience, cfg, "patience", tr.patience);
        fill_from_config(t_delta, cfg, "min_delta", tr.min_delta);
      }
      return cmd_train(tr);
    }
    if (eval_cmd->parsed()) return cmd_evaluate(ev);
    if (explain_cmd->parsed()) return cmd_explain(ex);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
