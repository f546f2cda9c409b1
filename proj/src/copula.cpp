#include "copcal/copula.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "copcal/math_util.hpp"

namespace copcal {

namespace {

constexpr double pi_sq_over_6 = 1.6449340668482264;

// Clamp applied inside exp() by the inverse links so the returned theta is
// always a positive normal double; |eta| never gets near this in practice.
constexpr double link_exp_cap = 690.0;

double capped_exp(double eta) {
  return std::exp(std::clamp(eta, -link_exp_cap, link_exp_cap));
}

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

// ---- Clayton ---------------------------------------------------------
// C(u,v) = (u^-theta + v^-theta - 1)^(-1/theta), theta > 0.
// Everything is expressed through log S, S = u^-theta + v^-theta - 1,
// computed without cancellation for both tiny and huge theta.

double clayton_log_s(double theta, double u, double v) {
  const double a = -theta * std::log(u);
  const double b = -theta * std::log(v);
  const double m = std::max(a, b);
  if (m < 0.5) {
    // S = 1 + (e^a - 1) + (e^b - 1); both increments are positive.
    return std::log1p(std::expm1(a) + std::expm1(b));
  }
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double clayton_cdf(double theta, double u, double v) {
  return std::exp(-clayton_log_s(theta, u, v) / theta);
}

double clayton_log_density(double theta, double u, double v) {
  const double log_s = clayton_log_s(theta, u, v);
  return std::log1p(theta) - (theta + 1.0) * (std::log(u) + std::log(v)) -
         (2.0 * log_s + log_s / theta);
}

double clayton_h(double theta, double u, double v) {
  // h(u|v) = v^-(theta+1) * S^-(1 + 1/theta)
  const double log_s = clayton_log_s(theta, u, v);
  return std::exp(-(theta + 1.0) * std::log(v) - (log_s + log_s / theta));
}

// ---- Frank -----------------------------------------------------------
// For theta > 0 the density denominator
//   D = (1 - e^-theta) - (1 - e^-theta*u)(1 - e^-theta*v)
// is rewritten as a sum of two positive terms (grouping by either
// argument), which avoids the cancellation the textbook form suffers for
// large theta. Negative theta is handled by the reflection
// c_theta(u,v) = c_{-theta}(u, 1-v).

double frank_log_d(double theta, double u, double v) {
  // D = e^-theta*u (1 - e^-theta*v) + e^-theta*v (1 - e^-theta(1-v))
  const double term1 = -theta * u + log1mexp(-theta * v);
  const double term2 = -theta * v + log1mexp(-theta * (1.0 - v));
  return log_sum_exp(term1, term2);
}

double frank_pos_cdf(double theta, double u, double v) {
  // C = (1/theta) * (log(1 - e^-theta) - log D)
  const double log_q1 = log1mexp(-theta);
  return (log_q1 - frank_log_d(theta, u, v)) / theta;
}

double frank_pos_log_density(double theta, double u, double v) {
  return std::log(theta) + log1mexp(-theta) - theta * (u + v) -
         2.0 * frank_log_d(theta, u, v);
}

double frank_pos_h(double theta, double u, double v) {
  // h = A / (A + B) with A = e^-theta*v (1 - e^-theta*u) and
  // B = e^-theta*u (1 - e^-theta(1-u)); both positive, so the ratio is
  // evaluated through their log difference.
  const double log_a = -theta * v + log1mexp(-theta * u);
  const double log_b = -theta * u + log1mexp(-theta * (1.0 - u));
  if (log_b == neg_inf) return 1.0;
  return 1.0 / (1.0 + std::exp(log_b - log_a));
}

double frank_cdf(double theta, double u, double v) {
  if (std::abs(theta) < 1e-5) {
    // (log_q1 - log D)/theta loses all precision once theta*u*v drops
    // below the rounding error of the logs; the analytic expansion
    // C = uv + (theta/2) uv(1-u)(1-v) + O(theta^2) is exact to ~1e-11 here.
    return u * v * (1.0 + 0.5 * theta * (1.0 - u) * (1.0 - v));
  }
  if (theta > 0.0) return frank_pos_cdf(theta, u, v);
  return u - frank_pos_cdf(-theta, u, 1.0 - v);
}

double frank_log_density(double theta, double u, double v) {
  if (theta > 0.0) return frank_pos_log_density(theta, u, v);
  return frank_pos_log_density(-theta, u, 1.0 - v);
}

double frank_h(double theta, double u, double v) {
  if (theta > 0.0) return frank_pos_h(theta, u, v);
  return frank_pos_h(-theta, u, 1.0 - v);
}

// ---- Gumbel ----------------------------------------------------------
// With x = -log u, y = -log v, S = x^theta + y^theta and T = S^(1/theta):
//   C      = exp(-T)
//   log c  = -T + x + y + (theta-1)(log x + log y)
//            + (1-2*theta) log T + log(T + theta - 1)
//   log h  = -T + (1-theta) log T + (theta-1) log y + y
// S is only ever formed in log space, so theta * log x cannot overflow.

double gumbel_log_t(double theta, double log_x, double log_y) {
  return log_sum_exp(theta * log_x, theta * log_y) / theta;
}

double gumbel_cdf(double theta, double u, double v) {
  if (theta == 1.0) return u * v;
  const double log_t =
      gumbel_log_t(theta, std::log(-std::log(u)), std::log(-std::log(v)));
  return std::exp(-std::exp(log_t));
}

double gumbel_log_density(double theta, double u, double v) {
  if (theta == 1.0) return 0.0;
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double log_t = gumbel_log_t(theta, std::log(x), std::log(y));
  const double t = std::exp(log_t);
  return -t + x + y + (theta - 1.0) * (std::log(x) + std::log(y)) +
         (1.0 - 2.0 * theta) * log_t + std::log(t + theta - 1.0);
}

double gumbel_h(double theta, double u, double v) {
  if (theta == 1.0) return u;
  const double y = -std::log(v);
  const double log_y = std::log(y);
  const double log_t = gumbel_log_t(theta, std::log(-std::log(u)), log_y);
  const double t = std::exp(log_t);
  return std::exp(-t + (1.0 - theta) * log_t + (theta - 1.0) * log_y + y);
}

}  // namespace

std::string_view family_name(copula_family family) {
  switch (family) {
    case copula_family::clayton: return "clayton";
    case copula_family::frank: return "frank";
    case copula_family::gumbel: return "gumbel";
  }
  return "unknown";
}

std::optional<copula_family> family_from_name(std::string_view name) {
  if (name == "clayton") return copula_family::clayton;
  if (name == "frank") return copula_family::frank;
  if (name == "gumbel") return copula_family::gumbel;
  return std::nullopt;
}

bool copula_parameter::is_valid(copula_family family, double theta) {
  if (!std::isfinite(theta)) return false;
  switch (family) {
    case copula_family::clayton: return theta > 0.0;
    case copula_family::frank: return theta != 0.0;
    case copula_family::gumbel: return theta >= 1.0;
  }
  return false;
}

copula_parameter::copula_parameter(copula_family family, double theta)
    : family_(family), theta_(theta) {
  if (!is_valid(family, theta)) {
    throw std::domain_error("theta = " + std::to_string(theta) +
                            " is outside the domain of the " +
                            std::string(family_name(family)) + " copula");
  }
}

double copula_cdf(const copula_parameter& p, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0 && v >= 1.0) return 1.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  switch (p.family()) {
    case copula_family::clayton: return clayton_cdf(p.theta(), u, v);
    case copula_family::frank: return frank_cdf(p.theta(), u, v);
    case copula_family::gumbel: return gumbel_cdf(p.theta(), u, v);
  }
  return 0.0;
}

double copula_log_density(const copula_parameter& p, double u, double v) {
  if (!in_open_unit(u) || !in_open_unit(v)) {
    throw std::domain_error(
        "copula_log_density requires interior arguments; the density may be "
        "unbounded on the boundary");
  }
  switch (p.family()) {
    case copula_family::clayton: return clayton_log_density(p.theta(), u, v);
    case copula_family::frank: return frank_log_density(p.theta(), u, v);
    case copula_family::gumbel: return gumbel_log_density(p.theta(), u, v);
  }
  return neg_inf;
}

double h_function(const copula_parameter& p, double u, double v) {
  if (!in_open_unit(v)) {
    throw std::domain_error(
        "h_function conditions on V = v, which must be interior");
  }
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  switch (p.family()) {
    case copula_family::clayton: return clayton_h(p.theta(), u, v);
    case copula_family::frank: return frank_h(p.theta(), u, v);
    case copula_family::gumbel: return gumbel_h(p.theta(), u, v);
  }
  return u;
}

double inverse_h(const copula_parameter& p, double w, double v) {
  if (!in_open_unit(w) || !in_open_unit(v)) {
    throw std::domain_error("inverse_h requires interior w and v");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (h_function(p, mid, v) < w) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double debye1(double x) {
  if (x <= 0.0) {
    throw std::domain_error("debye1 requires a positive argument");
  }
  if (x > 35.0) {
    // integral_0^inf t/(e^t - 1) dt = pi^2/6; the tail beyond 35 is below
    // double precision relative to it.
    return pi_sq_over_6 / x;
  }
  auto integrand = [](double t) {
    if (t < 1e-8) return 1.0 - 0.5 * t;  // removable singularity at 0
    return t / std::expm1(t);
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          integrand, 0.0, x, 10, 1e-14);
  return integral / x;
}

double theta_to_tau(copula_family family, double theta) {
  switch (family) {
    case copula_family::clayton:
      return theta / (theta + 2.0);
    case copula_family::gumbel:
      return 1.0 - 1.0 / theta;
    case copula_family::frank: {
      const double a = std::abs(theta);
      if (a == 0.0) return 0.0;
      // tau(theta) = theta/9 + O(theta^3) near zero; tau(-t) = -tau(t).
      const double tau =
          a < 1e-5 ? a / 9.0 : 1.0 - (4.0 / a) * (1.0 - debye1(a));
      return theta > 0.0 ? tau : -tau;
    }
  }
  return 0.0;
}

double tau_to_theta(copula_family family, double tau) {
  switch (family) {
    case copula_family::clayton:
      if (tau <= 0.0 || tau >= 1.0) {
        throw std::domain_error("Clayton requires tau in (0, 1)");
      }
      return 2.0 * tau / (1.0 - tau);
    case copula_family::gumbel:
      if (tau < 0.0 || tau >= 1.0) {
        throw std::domain_error("Gumbel requires tau in [0, 1)");
      }
      return 1.0 / (1.0 - tau);
    case copula_family::frank: {
      // Inverted numerically on theta in [1e-6, 100]; |tau| below tau(1e-6)
      // would demand a theta indistinguishable from the excluded
      // independence point, and is rejected rather than resolved.
      const double theta_lo = 1e-6;
      const double theta_hi = 100.0;
      const double tau_min = theta_to_tau(copula_family::frank, theta_lo);
      const double tau_max = theta_to_tau(copula_family::frank, theta_hi);
      const double target = std::abs(tau);
      if (target < tau_min || target > tau_max) {
        throw std::domain_error("Frank inversion covers " +
                                std::to_string(tau_min) + " <= |tau| <= " +
                                std::to_string(tau_max));
      }
      auto f = [&](double t) {
        return theta_to_tau(copula_family::frank, t) - target;
      };
      boost::math::tools::eps_tolerance<double> tol(48);
      std::uintmax_t max_iter = 200;
      const auto bracket =
          boost::math::tools::toms748_solve(f, theta_lo, theta_hi, tol,
                                            max_iter);
      const double theta = 0.5 * (bracket.first + bracket.second);
      return tau > 0.0 ? theta : -theta;
    }
  }
  throw std::domain_error("unknown copula family");
}

double link(copula_family family, double theta) {
  switch (family) {
    case copula_family::clayton: return std::log(theta);
    case copula_family::frank: return theta;
    case copula_family::gumbel: return std::log(theta - 1.0);
  }
  return theta;
}

double link_inverse(copula_family family, double eta) {
  switch (family) {
    case copula_family::clayton:
      return capped_exp(eta);
    case copula_family::frank:
      // eta == 0 would leave the Frank domain; represent the independence
      // limit by the smallest positive theta the evaluators accept.
      return eta == 0.0 ? 1e-300 : eta;
    case copula_family::gumbel:
      return 1.0 + capped_exp(eta);
  }
  return eta;
}

std::pair<double, double> sample_pair(const copula_parameter& p, rng& gen) {
  const double v = gen.uniform();
  const double w = gen.uniform();
  return {inverse_h(p, w, v), v};
}

}  // namespace copcal
