#pragma once

// Response pairs with a covariate matrix: CSV round-tripping, the
// midrange/half-range standardization map, and a content hash used to tie
// traces and model-selection reports to the exact dataset they came from.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace copcal {

// Affine map sending each covariate's observed range onto [-1, 1]:
// z = (x - center) / half_range. Stored with every fit so estimates can be
// reported back on the raw covariate scale.
struct standardization_map {
  Eigen::VectorXd center;
  Eigen::VectorXd half_range;

  int size() const { return static_cast<int>(center.size()); }

  double apply_one(double x, int j) const {
    return (x - center[j]) / half_range[j];
  }
  double invert_one(double z, int j) const {
    return center[j] + half_range[j] * z;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
};

struct dataset {
  Eigen::VectorXd y1;
  Eigen::VectorXd y2;
  Eigen::MatrixXd x;  // n rows, p covariate columns (raw scale)
  std::vector<std::string> covariate_names;  // defaults to x1..xp

  int n() const { return static_cast<int>(y1.size()); }
  int p() const { return static_cast<int>(x.cols()); }
};

// Midrange/half-range map over the observed values of each column; a
// constant column has no usable range and is an error.
standardization_map fit_standardization(const Eigen::MatrixXd& x);

// Returns a copy of the dataset with standardized covariates plus the map.
std::pair<dataset, standardization_map> standardize(const dataset& d);

// CSV with header y1,y2,x1,...,xp; all values written with 17 significant
// digits so a read-back is value-identical.
dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const dataset& d, const std::string& path);

// Canonical serialization of the dataset (identical to the CSV writer's
// output) and its FNV-1a fingerprint as a 16-hex-digit string.
std::string dataset_to_csv_string(const dataset& d);
std::string dataset_hash(const dataset& d);

// Shared float formatting: shortest representation with 17 significant
// digits, used everywhere a value is serialized.
std::string format_double(double value);

}  // namespace copcal
