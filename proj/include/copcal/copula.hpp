#pragma once

// Bivariate copula families (Clayton, Frank, Gumbel) on the uniform scale:
// cdf, log density, conditional distribution (h-function) and its inverse,
// Kendall's tau maps, and the link functions that put the dependence
// parameter on an unconstrained calibration scale.
//
// All evaluators are written in log space with same-sign groupings so they
// stay accurate from near-independence up to very strong dependence.

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "copcal/rng.hpp"

namespace copcal {

enum class copula_family { clayton, frank, gumbel };

std::string_view family_name(copula_family family);
std::optional<copula_family> family_from_name(std::string_view name);

// Dependence parameter with its family; construction enforces the family
// domain (Clayton theta > 0, Frank theta != 0, Gumbel theta >= 1) and
// throws std::domain_error otherwise. Values are never clamped.
class copula_parameter {
 public:
  copula_parameter(copula_family family, double theta);

  copula_family family() const { return family_; }
  double theta() const { return theta_; }

  static bool is_valid(copula_family family, double theta);

 private:
  copula_family family_;
  double theta_;
};

// C(u, v) for u, v in the open unit interval.
double copula_cdf(const copula_parameter& p, double u, double v);

// log c(u, v). Throws std::domain_error when u or v is not interior to the
// unit interval; callers are responsible for keeping arguments off the
// boundary (the likelihood clamps its probability integral transforms once).
double copula_log_density(const copula_parameter& p, double u, double v);

inline double copula_density(const copula_parameter& p, double u, double v) {
  return std::exp(copula_log_density(p, u, v));
}

// h(u | v) = P(U <= u | V = v) = dC(u, v)/dv; increasing in u with
// h(0|v) = 0 and h(1|v) = 1.
double h_function(const copula_parameter& p, double u, double v);

// Solves h(u | v) = w for u by bisection (monotone in u); used for
// conditional sampling. w and v must lie in the open unit interval.
double inverse_h(const copula_parameter& p, double w, double v);

// Population Kendall's tau for a given parameter value. Frank uses the
// Debye function; the others have closed forms.
double theta_to_tau(copula_family family, double theta);

// Inverse of theta_to_tau; throws std::domain_error when tau is outside
// the range the family can represent (Frank is inverted numerically on
// theta in (0, 100], so |tau| is limited to tau(100) ~= 0.9607).
double tau_to_theta(copula_family family, double tau);

// Link g mapping the family domain onto the real line: log(theta) for
// Clayton, identity for Frank, log(theta - 1) for Gumbel.
double link(copula_family family, double theta);

// Inverse link; always lands inside the family domain. Frank maps a
// calibration value of exactly 0 to a tiny positive theta (numerically
// indistinguishable from independence) so the result is always valid.
double link_inverse(copula_family family, double eta);

// First Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt, x > 0.
double debye1(double x);

// Draws (u, v) from the copula: v uniform, then u = inverse_h(w | v).
// Consumes exactly two uniforms from the generator.
std::pair<double, double> sample_pair(const copula_parameter& p, rng& gen);

}  // namespace copcal
