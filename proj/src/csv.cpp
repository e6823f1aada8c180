#include "dgof/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dgof {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError("csv column not found: " + name);
    return static_cast<int>(it - header.begin());
  }
};

RawCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open csv file: " + path);
  RawCsv csv;
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("empty csv file: " + path);
  csv.header = split_line(line);
  int row_index = 1;
  while (std::getline(in, line)) {
    ++row_index;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != csv.header.size())
      throw ValidationError("csv row " + std::to_string(row_index) +
                            " has the wrong number of fields");
    csv.rows.push_back(std::move(cells));
  }
  if (csv.rows.empty())
    throw ValidationError("csv file has no data rows: " + path);
  return csv;
}

double parse_double(const std::string& cell, int row) {
  if (cell.empty())
    throw ValidationError("missing value at csv row " + std::to_string(row));
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw ValidationError("non-numeric value at csv row " + std::to_string(row));
  }
  if (pos != cell.size())
    throw ValidationError("non-numeric value at csv row " + std::to_string(row));
  return v;
}

long parse_int(const std::string& cell, int row) {
  const double v = parse_double(cell, row);
  if (std::floor(v) != v)
    throw ValidationError("non-integer response at csv row " +
                          std::to_string(row));
  return static_cast<long>(v);
}

Eigen::MatrixXd extract_x(const RawCsv& csv,
                          const std::vector<std::string>& x_columns) {
  const int T = static_cast<int>(csv.rows.size());
  Eigen::MatrixXd x(T, static_cast<int>(x_columns.size()));
  for (std::size_t j = 0; j < x_columns.size(); ++j) {
    const int col = csv.column(x_columns[j]);
    for (int t = 0; t < T; ++t)
      x(t, static_cast<int>(j)) = parse_double(
          csv.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(col)],
          t + 2);
  }
  return x;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const std::string& y_column,
                        const std::vector<std::string>& x_columns) {
  const RawCsv csv = read_csv(path);
  const int ycol = csv.column(y_column);
  const int T = static_cast<int>(csv.rows.size());

  std::vector<long> raw(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t)
    raw[static_cast<std::size_t>(t)] = parse_int(
        csv.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(ycol)],
        t + 2);

  std::map<long, int> recode;
  for (long v : raw) recode.emplace(v, 0);
  int next = 1;
  for (auto& [code, cat] : recode) cat = next++;

  IngestResult out;
  out.series.y.resize(T);
  for (int t = 0; t < T; ++t)
    out.series.y[t] = recode.at(raw[static_cast<std::size_t>(t)]);
  out.series.x = extract_x(csv, x_columns);
  out.series.support_K = static_cast<int>(recode.size());
  for (const auto& [code, cat] : recode)
    out.category_labels.push_back(std::to_string(code));
  out.series.validate();
  return out;
}

IngestResult ingest_csv_counts(const std::string& path,
                               const std::string& y_column,
                               const std::vector<std::string>& x_columns) {
  const RawCsv csv = read_csv(path);
  const int ycol = csv.column(y_column);
  const int T = static_cast<int>(csv.rows.size());
  IngestResult out;
  out.series.y.resize(T);
  for (int t = 0; t < T; ++t) {
    const long count = parse_int(
        csv.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(ycol)],
        t + 2);
    if (count < 0)
      throw ValidationError("negative count at csv row " + std::to_string(t + 2));
    out.series.y[t] = static_cast<int>(count) + 1;
  }
  out.series.x = extract_x(csv, x_columns);
  out.series.support_K = 0;
  out.category_labels.push_back("count+1");
  out.series.validate();
  return out;
}

IngestResult ingest_csv_discretized(const std::string& path,
                                    const std::string& value_column,
                                    const std::vector<double>& thresholds,
                                    const std::vector<std::string>& x_columns) {
  if (thresholds.empty())
    throw ValidationError("discretizer needs at least one threshold");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw ValidationError("discretizer thresholds must increase");

  const RawCsv csv = read_csv(path);
  const int vcol = csv.column(value_column);
  const int T = static_cast<int>(csv.rows.size());
  const int K = static_cast<int>(thresholds.size()) + 1;

  IngestResult out;
  out.series.y.resize(T);
  for (int t = 0; t < T; ++t) {
    const double v = parse_double(
        csv.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(vcol)],
        t + 2);
    int cat = K;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (v < thresholds[i]) {
        cat = static_cast<int>(i) + 1;
        break;
      }
    }
    out.series.y[t] = cat;
  }
  out.series.x = extract_x(csv, x_columns);
  out.series.support_K = K;
  for (int k = 1; k <= K; ++k) {
    std::string lo = k == 1 ? "-inf" : std::to_string(thresholds[static_cast<std::size_t>(k) - 2]);
    std::string hi = k == K ? "+inf" : std::to_string(thresholds[static_cast<std::size_t>(k) - 1]);
    out.category_labels.push_back("[" + lo + "," + hi + ")");
  }
  out.series.validate();
  return out;
}

void write_series_csv(const std::string& path, const ObservationSeries& series,
                      bool shift_down) {
  std::ofstream outf(path);
  if (!outf) throw ValidationError("cannot write csv file: " + path);
  outf << "y";
  for (int j = 0; j < series.x.cols(); ++j) outf << ",x" << (j + 1);
  outf << "\n";
  outf.precision(17);
  for (int t = 0; t < series.length(); ++t) {
    outf << (shift_down ? series.y[t] - 1 : series.y[t]);
    for (int j = 0; j < series.x.cols(); ++j) outf << "," << series.x(t, j);
    outf << "\n";
  }
}

}  // namespace dgof
