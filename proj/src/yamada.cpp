#include "mvem/yamada.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "mvem/numerics.hpp"

namespace mvem {

Smoothing::Smoothing(double gamma, double eps) : gamma_(gamma), eps_(eps) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be > 1");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1)");
  }
  log_gamma_ = std::log(gamma);
  ramp_ = std::sqrt(gamma) - 1.0;
  lower_ = eps / gamma;
  peak_ = eps / std::sqrt(gamma);
  if (!(lower_ > 0.0) || !(peak_ > lower_) || !(eps > peak_)) {
    throw std::invalid_argument("degenerate smoothing support for gamma=" +
                                std::to_string(gamma));
  }
  up_slope_ = 2.0 / (log_gamma_ * (peak_ - lower_));
  down_slope_ = 2.0 / (log_gamma_ * (eps_ - peak_));
  const double a = lower_, p = peak_, b = eps_;
  psi_at_peak_ = up_slope_ * ((p - a) - a * std::log(p / a));
  v_at_peak_ =
      up_slope_ * (0.5 * (p - a) * (p - a) - a * (p * std::log(p / a) - p + a));
  v_at_upper_ = v_at_peak_ + psi_at_peak_ * (b - p) +
                down_slope_ * (b * (b * std::log(b / p) - b + p) -
                               0.5 * (b - p) * (b - p));
}

double Smoothing::psi(double z) const {
  if (z <= lower_ || z >= eps_) return 0.0;
  const double envelope = 2.0 / (z * log_gamma_);
  if (z <= peak_) return envelope * ((z - lower_) / (peak_ - lower_));
  return envelope * ((eps_ - z) / (eps_ - peak_));
}

double Smoothing::psi_integral(double y) const {
  if (y <= lower_) return 0.0;
  if (y >= eps_) return 1.0;
  if (y <= peak_) {
    return up_slope_ * ((y - lower_) - lower_ * std::log(y / lower_));
  }
  return psi_at_peak_ +
         down_slope_ * (eps_ * std::log(y / peak_) - (y - peak_));
}

double Smoothing::v(double x) const {
  const double y = std::abs(x);
  const double a = lower_, p = peak_, b = eps_;
  if (y <= a) return 0.0;
  if (y <= p) {
    return up_slope_ *
           (0.5 * (y - a) * (y - a) - a * (y * std::log(y / a) - y + a));
  }
  if (y < b) {
    return v_at_peak_ + psi_at_peak_ * (y - p) +
           down_slope_ *
               (b * (y * std::log(y / p) - y + p) - 0.5 * (y - p) * (y - p));
  }
  return v_at_upper_ + (y - b);
}

double Smoothing::v_prime(double x) const {
  const double s = psi_integral(std::abs(x));
  return x < 0.0 ? -s : s;
}

double Smoothing::v_double_prime(double x) const { return psi(std::abs(x)); }

Smoothing make_smoothing(double gamma, double eps) {
  return Smoothing(gamma, eps);
}

Smoothing make_smoothing_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1)");
  }
  return Smoothing(std::exp(1.0 / eps), eps);
}

bool SmoothingReport::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SmoothingCheck& c) { return c.pass; });
}

std::vector<double> smoothing_probe_points(const Smoothing& s,
                                           std::size_t n_probe) {
  std::vector<double> xs{0.0, 10.0, -10.0};
  const std::size_t rest = n_probe > 3 ? n_probe - 3 : 0;
  const std::size_t uniform = rest / 2;
  const std::size_t logpts = rest - uniform;
  for (std::size_t k = 0; k < uniform; ++k) {
    xs.push_back(-2.0 + 4.0 * (static_cast<double>(k) + 0.5) /
                            static_cast<double>(uniform));
  }
  const double lo = std::log(s.lower() / 10.0);
  const double hi = std::log(s.upper() * 10.0);
  for (std::size_t k = 0; k < logpts; ++k) {
    const double t = logpts > 1 ? static_cast<double>(k) /
                                      static_cast<double>(logpts - 1)
                                : 0.5;
    const double mag = std::exp(lo + t * (hi - lo));
    xs.push_back(k % 2 == 0 ? mag : -mag);
  }
  return xs;
}

SmoothingReport check_smoothing(const Smoothing& s, std::size_t n_probe,
                                double tol, double fd_tol) {
  SmoothingReport report;
  report.gamma = s.gamma();
  report.eps = s.eps();
  const double eps = s.eps();
  const double lg = std::log(s.gamma());
  const double kinks[] = {s.lower(), s.peak(), s.upper()};

  struct Acc {
    std::string name;
    double tolerance;
    double worst = -std::numeric_limits<double>::infinity();
    void see(double violation) { worst = std::max(worst, violation); }
  };
  Acc r1{"bounds: |x|-eps <= V <= |x|", tol};
  Acc dv{"V' in [0,1] (x>=0), [-1,0] (x<0)", tol};
  Acc r2{"curvature: 0 <= V'' <= 2/(|x| ln gamma) on [eps/gamma,eps]", tol};
  Acc even{"V even", tol};
  Acc fd1{"finite difference V'", fd_tol};
  Acc fd2{"finite difference V'' (relative, away from kinks)", fd_tol};

  // Log-scale quadrature: psi(z) dz = psi(e^u) e^u du is smooth per piece.
  auto log_integral = [&](double from, double to,
                          const std::function<double(double)>& f) {
    return adaptive_simpson(
        [&](double u) {
          const double z = std::exp(u);
          return f(z) * z;
        },
        std::log(from), std::log(to), 1e-14);
  };
  auto psi_fn = [&](double z) { return s.psi(z); };
  const double mass = log_integral(s.lower(), s.peak(), psi_fn) +
                      log_integral(s.peak(), s.upper(), psi_fn);

  const auto xs = smoothing_probe_points(s, n_probe);
  double approx_gap = 0.0;
  for (double x : xs) {
    const double ax = std::abs(x);
    const double v = s.v(x), v1 = s.v_prime(x), v2 = s.v_double_prime(x);
    const bool in_support = ax >= s.lower() && ax <= s.upper();
    const double bound = in_support ? 2.0 / (ax * lg) : 0.0;
    report.samples.push_back({x, v, v1, v2, ax - eps, ax, bound});

    r1.see(std::max(ax - eps - v, v - ax));
    approx_gap = std::max(approx_gap, ax - v);
    if (x >= 0.0) {
      dv.see(std::max(-v1, v1 - 1.0));
    } else {
      dv.see(std::max(v1, -1.0 - v1));
    }
    r2.see(std::max(-v2, v2 - bound));
    even.see(std::abs(s.v(-x) - v));

    if (ax > 0.0) {
      const double h = 1e-5 * std::min(1.0, ax);
      const double d1 = (s.v(x + h) - s.v(x - h)) / (2.0 * h);
      fd1.see(std::abs(d1 - v1));

      const double h2 = 1e-5 * std::min(1.0, ax);
      const bool near_kink =
          std::any_of(std::begin(kinks), std::end(kinks),
                      [&](double k) { return std::abs(ax - k) <= 3.0 * h2; });
      if (!near_kink) {
        const double d2 = (s.v_prime(x + h2) - s.v_prime(x - h2)) / (2.0 * h2);
        fd2.see(std::abs(d2 - v2) / std::max(1.0, v2));
      }
    }
  }

  // Psi closed form against quadrature of psi at a few interior points.
  double psi_int_err = 0.0;
  for (double t : {0.1, 0.35, 0.5, 0.8, 0.99}) {
    const double y = std::exp(std::log(s.lower()) +
                              t * (std::log(s.upper()) - std::log(s.lower())));
    double q = 0.0;
    if (y <= s.peak()) {
      q = log_integral(s.lower(), y, psi_fn);
    } else {
      q = log_integral(s.lower(), s.peak(), psi_fn) +
          log_integral(s.peak(), y, psi_fn);
    }
    psi_int_err = std::max(psi_int_err, std::abs(q - s.psi_integral(y)));
  }

  auto push = [&](const Acc& a) {
    report.checks.push_back({a.name, a.worst, a.tolerance, a.worst <= a.tolerance});
  };
  push(r1);
  push(dv);
  push(r2);
  push(even);
  report.checks.push_back({"integral of psi = 1", std::abs(mass - 1.0),
                           std::min(tol, 1e-10),
                           std::abs(mass - 1.0) <= std::min(tol, 1e-10)});
  report.checks.push_back({"Psi closed form vs quadrature", psi_int_err, tol,
                           psi_int_err <= tol});
  report.checks.push_back({"sup(|x| - V) <= eps", approx_gap - eps, tol,
                           approx_gap - eps <= tol});
  push(fd1);
  push(fd2);
  return report;
}

}  // namespace mvem
