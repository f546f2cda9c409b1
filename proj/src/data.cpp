#include "copcal/data.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "copcal/math_util.hpp"

namespace copcal {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed numeric field '" + s + "' in " +
                             context);
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Eigen::MatrixXd standardization_map::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = x;
  for (int j = 0; j < z.cols(); ++j) {
    z.col(j) = (z.col(j).array() - center[j]) / half_range[j];
  }
  return z;
}

Eigen::MatrixXd standardization_map::invert(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd x = z;
  for (int j = 0; j < x.cols(); ++j) {
    x.col(j) = x.col(j).array() * half_range[j] + center[j];
  }
  return x;
}

standardization_map fit_standardization(const Eigen::MatrixXd& x) {
  standardization_map map;
  map.center.resize(x.cols());
  map.half_range.resize(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    if (!(hi > lo)) {
      throw std::runtime_error("covariate column " + std::to_string(j + 1) +
                               " is constant; cannot standardize");
    }
    map.center[j] = 0.5 * (lo + hi);
    map.half_range[j] = 0.5 * (hi - lo);
  }
  return map;
}

std::pair<dataset, standardization_map> standardize(const dataset& d) {
  standardization_map map = fit_standardization(d.x);
  dataset out = d;
  out.x = map.apply(d.x);
  return {out, map};
}

std::string dataset_to_csv_string(const dataset& d) {
  std::string out = "y1,y2";
  for (int j = 0; j < d.p(); ++j) {
    out += ',';
    out += j < static_cast<int>(d.covariate_names.size())
               ? d.covariate_names[j]
               : "x" + std::to_string(j + 1);
  }
  out += '\n';
  for (int i = 0; i < d.n(); ++i) {
    out += format_double(d.y1[i]);
    out += ',';
    out += format_double(d.y2[i]);
    for (int j = 0; j < d.p(); ++j) {
      out += ',';
      out += format_double(d.x(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string dataset_hash(const dataset& d) {
  const std::uint64_t h = fnv1a64(dataset_to_csv_string(d));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_dataset_csv(const dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << dataset_to_csv_string(d);
  if (!out) throw std::runtime_error("failed writing " + path);
}

dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  int y1_col = -1, y2_col = -1;
  std::vector<int> x_cols;
  std::vector<std::string> x_names;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    if (header[j] == "y1") {
      y1_col = j;
    } else if (header[j] == "y2") {
      y2_col = j;
    } else {
      x_cols.push_back(j);
      x_names.push_back(header[j]);
    }
  }
  if (y1_col < 0 || y2_col < 0) {
    throw std::runtime_error(path + ": header must contain y1 and y2");
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      row[j] = parse_double(fields[j],
                            path + ":" + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + " has no data rows");

  dataset d;
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(x_cols.size());
  d.y1.resize(n);
  d.y2.resize(n);
  d.x.resize(n, p);
  d.covariate_names = x_names;
  for (int i = 0; i < n; ++i) {
    d.y1[i] = rows[i][y1_col];
    d.y2[i] = rows[i][y2_col];
    for (int j = 0; j < p; ++j) d.x(i, j) = rows[i][x_cols[j]];
  }
  return d;
}

}  // namespace copcal
