#ifndef DGOF_CSV_HPP_
#define DGOF_CSV_HPP_

#include <string>
#include <vector>

#include "dgof/model.hpp"

namespace dgof {

struct IngestResult {
  ObservationSeries series;
  // one label per category 1..K: the original integer code, or the
  // discretizer interval it came from
  std::vector<std::string> category_labels;
};

// Integer-coded response column; raw codes are recoded to 1..K in sorted
// order and the mapping is returned.
IngestResult ingest_csv(const std::string& path, const std::string& y_column,
                        const std::vector<std::string>& x_columns);

// Count data: the column holds raw counts Y* >= 0, stored shifted as
// Y = Y* + 1 with gaps preserved (recoding would destroy count values).
IngestResult ingest_csv_counts(const std::string& path,
                               const std::string& y_column,
                               const std::vector<std::string>& x_columns);

// Built-in discretizer: category 1 below the first threshold, category j+1
// on [t_j, t_{j+1}), top category at or above the last threshold.
IngestResult ingest_csv_discretized(const std::string& path,
                                    const std::string& value_column,
                                    const std::vector<double>& thresholds,
                                    const std::vector<std::string>& x_columns);

// shift_down writes y - 1, so count series round-trip as raw counts
void write_series_csv(const std::string& path, const ObservationSeries& series,
                      bool shift_down = false);

}  // namespace dgof

#endif  // DGOF_CSV_HPP_
