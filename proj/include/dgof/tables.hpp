#ifndef DGOF_TABLES_HPP_
#define DGOF_TABLES_HPP_

#include <string>
#include <vector>

#include "dgof/bootstrap.hpp"

namespace dgof {

// Small text/CSV table with deterministic formatting; byte-identical output
// for identical inputs is part of the contract.
struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

std::string format_number(double v, int decimals = 4);

// Wide per-norm report: rows are (model, quantity) with one column per
// process; one table per norm. Seed and B ride along as provenance columns.
std::vector<Table> test_report_tables(const BootstrapResult& result,
                                      const std::string& model_label);

// Size/power rejection rates at the nominal level, one row per scenario,
// with seed and R provenance columns.
Table mc_report_table(const std::vector<WarpResult>& results,
                      const std::vector<std::string>& scenario_labels,
                      const std::string& norm);

Table fit_report_table(const FitResult& fit,
                       const std::vector<std::string>& param_names,
                       const std::string& model_label);

}  // namespace dgof

#endif  // DGOF_TABLES_HPP_
