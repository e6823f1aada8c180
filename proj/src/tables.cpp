#include "dgof/tables.hpp"

#include <cstdio>

namespace dgof {

namespace {

std::vector<std::string> split_stat_name(const std::string& name) {
  const auto colon = name.rfind(':');
  return {name.substr(0, colon), name.substr(colon + 1)};
}

std::vector<std::string> norms_in(const std::vector<std::string>& names) {
  std::vector<std::string> norms;
  for (const auto& n : names) {
    const std::string norm = split_stat_name(n)[1];
    bool seen = false;
    for (const auto& have : norms) seen = seen || have == norm;
    if (!seen) norms.push_back(norm);
  }
  return norms;
}

}  // namespace

std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());

  std::string out;
  if (!title.empty()) out += title + "\n";
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c == 0)
        out += row[c] + pad;
      else
        out += "  " + pad + row[c];
    }
    out += "\n";
  };
  emit(columns);
  std::string rule;
  for (std::size_t c = 0; c < columns.size(); ++c)
    rule += std::string(width[c] + (c == 0 ? 0 : 2), '-');
  out += rule + "\n";
  for (const auto& row : rows) emit(row);
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out += (c ? "," : "") + columns[c];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += "\n";
  }
  return out;
}

std::vector<Table> test_report_tables(const BootstrapResult& result,
                                      const std::string& model_label) {
  std::vector<Table> tables;
  for (const auto& norm : norms_in(result.names)) {
    Table table;
    table.title = norm + " tests (B = " + std::to_string(result.B) +
                  ", alpha = " + format_number(result.alpha, 2) +
                  (result.reliable ? "" : ", UNRELIABLE: excess fit failures") +
                  ")";
    table.columns = {"model"};
    std::vector<int> idx;
    for (std::size_t i = 0; i < result.names.size(); ++i) {
      const auto parts = split_stat_name(result.names[i]);
      if (parts[1] == norm) {
        table.columns.push_back(parts[0]);
        idx.push_back(static_cast<int>(i));
      }
    }
    table.columns.push_back("seed");
    table.columns.push_back("B");

    const auto make_row = [&](const std::string& what,
                              const Eigen::VectorXd& values, int decimals) {
      std::vector<std::string> row{model_label + " " + what};
      for (int i : idx) row.push_back(format_number(values[i], decimals));
      row.push_back(std::to_string(result.seed));
      row.push_back(std::to_string(result.B));
      return row;
    };
    table.rows.push_back(make_row("statistic", result.observed, 4));
    table.rows.push_back(make_row("critical", result.critical, 4));
    table.rows.push_back(make_row("p-value", result.pvalue, 3));
    tables.push_back(std::move(table));
  }
  return tables;
}

Table mc_report_table(const std::vector<WarpResult>& results,
                      const std::vector<std::string>& scenario_labels,
                      const std::string& norm) {
  if (results.size() != scenario_labels.size())
    throw ValidationError("mc table: label/result size mismatch");
  Table table;
  table.title = norm + " rejection rates (%, nominal " +
                format_number(results.empty() ? 5.0 : 100.0 * results[0].alpha, 1) +
                "%)";
  table.columns = {"scenario"};
  std::vector<int> idx;
  if (!results.empty()) {
    for (std::size_t i = 0; i < results[0].names.size(); ++i) {
      const auto parts = split_stat_name(results[0].names[i]);
      if (parts[1] == norm) {
        table.columns.push_back(parts[0]);
        idx.push_back(static_cast<int>(i));
      }
    }
  }
  table.columns.push_back("seed");
  table.columns.push_back("R");
  table.columns.push_back("failures");

  for (std::size_t s = 0; s < results.size(); ++s) {
    std::vector<std::string> row{scenario_labels[s]};
    for (int i : idx)
      row.push_back(format_number(100.0 * results[s].rejection_rate[i], 1));
    row.push_back(std::to_string(results[s].seed));
    row.push_back(std::to_string(results[s].R));
    row.push_back(std::to_string(results[s].failures));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table fit_report_table(const FitResult& fit,
                       const std::vector<std::string>& param_names,
                       const std::string& model_label) {
  Table table;
  table.title = "ML estimates: " + model_label +
                " (loglik = " + format_number(fit.loglik, 4) +
                ", iterations = " + std::to_string(fit.iterations) +
                (fit.converged ? "" : ", NOT CONVERGED") +
                (fit.info_pd ? "" : ", information not positive definite") + ")";
  table.columns = {"parameter", "estimate", "std.error"};
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    table.rows.push_back({param_names[i],
                          format_number(fit.theta[static_cast<int>(i)], 4),
                          format_number(fit.se[static_cast<int>(i)], 4)});
  }
  return table;
}

}  // namespace dgof
