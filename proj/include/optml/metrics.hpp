#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "optml/errors.hpp"

namespace optml {

namespace detail {

inline void require_paired(const std::vector<double>& y, const std::vector<double>& yhat,
                           const char* op) {
  if (y.size() != yhat.size() || y.empty()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(y.size()) + " targets vs " +
                     std::to_string(yhat.size()) + " predictions");
  }
}

}  // namespace detail

inline double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
  detail::require_paired(y, yhat, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

// Mean absolute percentage error, in percent. Rows with |y| < 1e-12 cannot
// be scored and are excluded; the count of exclusions is reported through
// excluded_out.
inline double mape(const std::vector<double>& y, const std::vector<double>& yhat,
                   std::size_t* excluded_out = nullptr) {
  detail::require_paired(y, yhat, "mape");
  double acc = 0.0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::fabs(y[i]) < 1e-12) continue;
    acc += std::fabs(y[i] - yhat[i]) / std::fabs(y[i]);
    ++kept;
  }
  if (excluded_out) *excluded_out = y.size() - kept;
  if (kept == 0) throw NumericError("mape: all rows excluded (|y| < 1e-12)");
  return acc / static_cast<double>(kept) * 100.0;
}

// Coefficient of determination, 1 - SS_res / SS_tot. Unbounded below; a
// model worse than predicting the mean scores negative.
inline double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
  detail::require_paired(y, yhat, "r_squared");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    const double t = y[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) throw NumericError("r_squared: constant targets, SS_tot is zero");
  return 1.0 - ss_res / ss_tot;
}

struct ModelMetrics {
  double rmse = 0.0;
  double mape = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t mape_excluded = 0;
};

inline ModelMetrics compute_metrics(const std::vector<double>& y,
                                    const std::vector<double>& yhat) {
  ModelMetrics m;
  m.n = y.size();
  m.rmse = rmse(y, yhat);
  m.mape = mape(y, yhat, &m.mape_excluded);
  m.r_squared = r_squared(y, yhat);
  return m;
}

// ---------------------------------------------------------------------------
// Cross-model comparison table: one row per bucket, one column per model
// tag. Within each row the best value is flagged `*` and the second-best
// `**`. Flags depend only on (value, tag) pairs, never on column order;
// exact ties rank by tag name so rendering is deterministic.

struct ReportRow {
  std::string label;
  std::map<std::string, double> values;  // model tag -> metric
};

struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  // flag: 0 plain, 1 best, 2 second-best; present=false renders n/a.
  struct Cell {
    bool present = false;
    double value = 0.0;
    int flag = 0;
  };
  std::vector<std::vector<Cell>> cells;
};

inline ReportTable build_report_table(const std::vector<ReportRow>& rows,
                                      const std::vector<std::string>& columns,
                                      bool lower_is_better) {
  ReportTable t;
  t.columns = columns;
  for (const auto& row : rows) {
    t.row_labels.push_back(row.label);
    std::vector<ReportTable::Cell> cells(columns.size());
    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto it = row.values.find(columns[c]);
      if (it == row.values.end()) continue;
      cells[c].present = true;
      cells[c].value = it->second;
      ranked.emplace_back(lower_is_better ? it->second : -it->second, columns[c]);
    }
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (!cells[c].present) continue;
      if (!ranked.empty() && ranked[0].second == columns[c]) cells[c].flag = 1;
      else if (ranked.size() > 1 && ranked[1].second == columns[c]) cells[c].flag = 2;
    }
    t.cells.push_back(std::move(cells));
  }
  return t;
}

namespace detail {

inline std::string render_cell(const ReportTable::Cell& cell) {
  if (!cell.present) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", cell.value);
  std::string s = buf;
  if (cell.flag == 1) s += "*";
  else if (cell.flag == 2) s += "**";
  return s;
}

}  // namespace detail

inline std::string render_table_csv(const ReportTable& t) {
  std::string out = "bucket";
  for (const auto& c : t.columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    out += t.row_labels[r];
    for (const auto& cell : t.cells[r]) out += "," + detail::render_cell(cell);
    out += "\n";
  }
  return out;
}

inline std::string render_table_text(const ReportTable& t) {
  std::vector<std::size_t> widths;
  widths.push_back(6);  // "bucket"
  for (const auto& r : t.row_labels) widths[0] = std::max(widths[0], r.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    std::size_t w = t.columns[c].size();
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      w = std::max(w, detail::render_cell(t.cells[r][c]).size());
    }
    widths.push_back(w);
  }
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  std::string out = pad("bucket", widths[0]);
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += "  " + pad(t.columns[c], widths[c + 1]);
  out += "\n";
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    out += pad(t.row_labels[r], widths[0]);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      out += "  " + pad(detail::render_cell(t.cells[r][c]), widths[c + 1]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace optml
