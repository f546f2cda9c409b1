#pragma once

// Additive cubic-spline calibration of the copula parameter: a global
// intercept plus, per covariate, a cubic polynomial and a truncated-power
// spline whose knots can be switched in and out by binary indicators.
// Also holds the spline priors (and their discrete masses) so prior curves
// can be sampled without touching the likelihood machinery.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "copcal/copula.hpp"
#include "copcal/rng.hpp"

namespace copcal {

// k_max contiguous equal-length intervals partitioning [lo, hi]; knot k is
// confined to interval k, making knot locations identifiable.
struct knot_grid {
  double lo = -1.0;
  double hi = 1.0;
  int k_max = 4;

  double interval_width() const { return (hi - lo) / k_max; }
  std::pair<double, double> interval(int k) const {
    const double w = interval_width();
    return {lo + k * w, lo + (k + 1) * w};
  }
  double midpoint(int k) const { return lo + (k + 0.5) * interval_width(); }
  bool contains(int k, double gamma) const {
    const auto [a, b] = interval(k);
    return gamma >= a && gamma <= b;
  }
};

// One covariate's additive piece: eta_i(z) = sum_j alpha[j] z^(j+1)
//                                    + sum_k zeta[k] psi[k] (z - gamma[k])+^3.
struct spline_component {
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();  // z, z^2, z^3 coefficients
  Eigen::VectorXd psi;                              // spline coefficients
  Eigen::VectorXd gamma;                            // knot locations
  std::vector<int> zeta;                            // 0/1 knot indicators
  int lambda = 0;  // knot-count rate hyperparameter in {0, ..., k_max}

  int k_max() const { return static_cast<int>(psi.size()); }
  int active_count() const {
    int m = 0;
    for (int z : zeta) m += z;
    return m;
  }
};

struct calibration_state {
  double alpha0 = 0.0;
  std::vector<spline_component> components;

  int n_covariates() const { return static_cast<int>(components.size()); }
};

// A zeroed state (constant eta = 0) with knots at interval midpoints.
calibration_state make_initial_calibration(const std::vector<knot_grid>& grids,
                                           int lambda_init);

inline double truncated_cubic(double z, double knot) {
  const double d = z - knot;
  return d > 0.0 ? d * d * d : 0.0;
}

// eta_i(z) for one covariate (no intercept).
double component_eta(const spline_component& c, double z);

// eta(x) = alpha0 + sum_i eta_i(x_i) on the standardized covariate scale.
double evaluate_eta(const calibration_state& s, const Eigen::VectorXd& x);

// theta(x) through the family's inverse link.
copula_parameter evaluate_theta(const calibration_state& s,
                                const Eigen::VectorXd& x,
                                copula_family family);

// ---- Spline priors ----------------------------------------------------
// alpha0, alpha_j, psi_k ~ N(0, 10) (variance 10); gamma_k ~ Uniform(I_k);
// lambda ~ Binomial(k_max, 1/2); |zeta| ~ Poisson(lambda) right-truncated
// at k_max with the 0^0 = 1 convention, configurations of equal size
// equally likely.

struct spline_prior {
  double coef_sd = std::sqrt(10.0);
  double lambda_p = 0.5;
};

double log_choose(int n, int k);

// log P(|zeta| = m | lambda) for the right-truncated Poisson on {0..k_max}.
double truncated_poisson_log_pmf(int m, int lambda, int k_max);

double binomial_log_pmf(int k, int n, double p);

int sample_truncated_poisson(rng& gen, int lambda, int k_max);

// One full draw of the calibration parameters from their priors.
calibration_state sample_prior_calibration(rng& gen,
                                           const std::vector<knot_grid>& grids,
                                           const spline_prior& prior = {});

// One prior draw of the univariate calibration curve evaluated on `grid`
// and mapped to the Kendall tau scale. The knot grid spans the range of
// `grid`, so passing raw versus standardized covariate values reproduces
// the two panels of the prior-concentration experiment.
std::vector<double> sample_prior_curve(rng& gen,
                                       const std::vector<double>& grid,
                                       int k_max, copula_family family,
                                       const spline_prior& prior = {});

}  // namespace copcal
