#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "mvem/yamada.hpp"

using namespace mvem;

namespace {

// psi written from its definition: 2 / (z ln gamma) times a tent on
// [eps/gamma, eps] peaking at eps / sqrt(gamma).
double psi_oracle(double z, double gamma, double eps) {
  const double lo = eps / gamma, pk = eps / std::sqrt(gamma);
  if (z <= lo || z >= eps) return 0.0;
  const double tent = z <= pk ? (z - lo) / (pk - lo) : (eps - z) / (eps - pk);
  return 2.0 / (z * std::log(gamma)) * tent;
}

// Composite Simpson in u = ln z, where the integrand is smooth per piece.
double simpson_log(double from, double to, double gamma, double eps, int n = 4000) {
  if (to <= from) return 0.0;
  const double a = std::log(from), b = std::log(to), h = (b - a) / n;
  auto f = [&](double u) {
    const double z = std::exp(u);
    return psi_oracle(z, gamma, eps) * z;
  };
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double psi_integral_oracle(double y, double gamma, double eps) {
  const double lo = eps / gamma, pk = eps / std::sqrt(gamma);
  if (y <= lo) return 0.0;
  if (y <= pk) return simpson_log(lo, y, gamma, eps);
  return simpson_log(lo, pk, gamma, eps) + simpson_log(pk, std::min(y, eps), gamma, eps);
}

// V(x) = int_0^x Psi(y) dy = int_0^x (x - z) psi(z) dz, one integral per
// smooth piece in u = ln z.
double v_oracle(double x, double gamma, double eps) {
  const double ax = std::abs(x);
  const double lo = eps / gamma, pk = eps / std::sqrt(gamma);
  auto piece = [&](double from, double to) {
    if (to <= from) return 0.0;
    const int n = 20000;
    const double a = std::log(from), b = std::log(to), h = (b - a) / n;
    auto f = [&](double u) {
      const double z = std::exp(u);
      return (ax - z) * psi_oracle(z, gamma, eps) * z;
    };
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
  };
  return piece(lo, std::min(ax, pk)) + piece(pk, std::min(ax, eps));
}

}  // namespace

TEST(Yamada, PsiMatchesDefinition) {
  const double gamma = std::exp(2.0), eps = 0.1;
  const Smoothing s(gamma, eps);
  for (double z : {0.001, 0.0136, 0.02, 0.0368, 0.05, 0.09, 0.1, 0.2}) {
    EXPECT_NEAR(s.psi(z), psi_oracle(z, gamma, eps), 1e-12 * (1 + s.psi(z))) << z;
  }
  EXPECT_NEAR(s.peak(), eps / std::sqrt(gamma), 1e-15);
  EXPECT_NEAR(s.ramp(), std::sqrt(gamma) - 1.0, 1e-15);
}

TEST(Yamada, PsiIntegratesToOne) {
  for (double lg : {1.0, 2.0, 10.0}) {
    for (double eps : {0.5, 0.1, 0.01}) {
      const double gamma = std::exp(lg);
      EXPECT_NEAR(psi_integral_oracle(eps, gamma, eps), 1.0, 1e-10);
      const Smoothing s(gamma, eps);
      EXPECT_NEAR(s.psi_integral(eps), 1.0, 1e-14);
      EXPECT_EQ(s.psi_integral(2 * eps), 1.0);
    }
  }
}

TEST(Yamada, ClosedFormsMatchQuadrature) {
  for (double lg : {1.0, 2.0, 10.0}) {
    for (double eps : {0.5, 0.1, 0.01}) {
      const double gamma = std::exp(lg);
      const Smoothing s(gamma, eps);
      for (double t : {0.0, 0.2, 0.45, 0.5, 0.7, 0.95, 1.0, 1.5, 3.0}) {
        // Points spread over the support in log scale, and beyond it.
        const double x = t <= 1.0 ? (eps / gamma) * std::pow(gamma, t) : eps * t;
        EXPECT_NEAR(s.psi_integral(x), psi_integral_oracle(x, gamma, eps), 1e-9)
            << "gamma=" << gamma << " eps=" << eps << " x=" << x;
        EXPECT_NEAR(s.v(x), v_oracle(x, gamma, eps), 1e-9)
            << "gamma=" << gamma << " eps=" << eps << " x=" << x;
        EXPECT_NEAR(s.v(-x), s.v(x), 0.0);
      }
    }
  }
}

TEST(Yamada, Examples) {
  const Smoothing s(std::exp(2.0), 0.1);
  EXPECT_EQ(s.v(0.0), 0.0);
  for (double x : {0.1, 0.5, 3.0}) {
    EXPECT_EQ(s.v_prime(x), 1.0);
    EXPECT_EQ(s.v_prime(-x), -1.0);
    EXPECT_EQ(s.v_double_prime(x), 0.0);
  }
  for (double x : {0.0, 0.005, s.lower()}) {
    EXPECT_EQ(s.v(x), 0.0);
    EXPECT_EQ(s.v_double_prime(x), 0.0);
  }
}

TEST(Yamada, InvariantSuitePassesOnGrid) {
  for (double lg : {1.0, 2.0, 10.0}) {
    for (double eps : {0.5, 0.1, 0.01}) {
      const auto rep = check_smoothing(Smoothing(std::exp(lg), eps));
      for (const auto& c : rep.checks) {
        EXPECT_TRUE(c.pass) << "ln gamma=" << lg << " eps=" << eps << ": " << c.name
                            << " worst " << c.worst;
      }
      EXPECT_GE(rep.samples.size(), 1000u);
    }
  }
}

TEST(Yamada, GapShrinksWithEps) {
  const double gamma = std::exp(2.0);
  double last = 1e9;
  for (double eps : {0.5, 0.1, 0.01}) {
    const Smoothing s(gamma, eps);
    double gap = 0.0;
    for (double x : smoothing_probe_points(s, 1000)) gap = std::max(gap, std::abs(x) - s.v(x));
    EXPECT_LE(gap, eps);
    EXPECT_LT(gap, last);
    last = gap;
  }
}

TEST(Yamada, Constructors) {
  EXPECT_THROW(Smoothing(1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(Smoothing(2.0, 0.0), std::invalid_argument);
  const Smoothing s = make_smoothing_eps(0.25);
  EXPECT_NEAR(s.gamma(), std::exp(4.0), 1e-12);
  EXPECT_EQ(s.eps(), 0.25);
}
