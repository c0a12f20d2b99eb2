#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mvem {

// Yamada-Watanabe smoothing pair.
//
// psi(z) = 2 / (z ln gamma) * s(z) on [eps/gamma, eps], where s is a
// continuous ramp 0 -> 1 on [a, a(1+r)], flat, then 1 -> 0 on [eps/(1+r), eps].
// With r chosen so that psi integrates to 1 the flat part has zero length:
// the integral equals 2 - 2 ln(1+r) / ln(gamma), so r = sqrt(gamma) - 1 and
// s is a tent peaking at eps / sqrt(gamma).
//
// V(x) = int_0^|x| int_0^y psi(z) dz dy is C^2, even, and satisfies
//   |x| - eps <= V(x) <= |x|,  0 <= V''(x) <= 2 / (|x| ln gamma).
class Smoothing {
 public:
  Smoothing(double gamma, double eps);

  double gamma() const { return gamma_; }
  double eps() const { return eps_; }
  double ramp() const { return ramp_; }
  double lower() const { return lower_; }  // eps / gamma
  double peak() const { return peak_; }    // lower * (1 + ramp)
  double upper() const { return eps_; }

  double psi(double z) const;
  // Psi(y) = int_0^y psi, y >= 0.
  double psi_integral(double y) const;

  double v(double x) const;
  double v_prime(double x) const;
  double v_double_prime(double x) const;

 private:
  double gamma_;
  double eps_;
  double log_gamma_;
  double ramp_;
  double lower_;
  double peak_;
  double up_slope_;    // 2 / (ln gamma * (peak - lower))
  double down_slope_;  // 2 / (ln gamma * (eps - peak))
  double psi_at_peak_;
  double v_at_peak_;
  double v_at_upper_;
};

Smoothing make_smoothing(double gamma, double eps);
// gamma = exp(1/eps).
Smoothing make_smoothing_eps(double eps);

struct SmoothingCheck {
  std::string name;
  double worst = 0.0;  // largest violation (<= 0 means satisfied)
  double tolerance = 0.0;
  bool pass = true;
};

struct SmoothingSample {
  double x, v, v_prime, v_double_prime, lower_bound, upper_bound, curvature_bound;
};

struct SmoothingReport {
  double gamma = 0.0;
  double eps = 0.0;
  std::vector<SmoothingCheck> checks;
  std::vector<SmoothingSample> samples;
  bool pass() const;
};

// Probe points: n_probe points across [-2, 2], log-spaced points around the
// support, 0 and +-10.
std::vector<double> smoothing_probe_points(const Smoothing& s,
                                           std::size_t n_probe);

// Bounds on V, V', V'', the normalization of psi (log-scale adaptive
// Simpson), finite-difference consistency away from the ramp kinks, and the
// uniform approximation sup(|x| - V) <= eps.
SmoothingReport check_smoothing(const Smoothing& s, std::size_t n_probe = 1000,
                                double tol = 1e-8, double fd_tol = 1e-6);

}  // namespace mvem
