#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mvem/model.hpp"

using namespace mvem;

namespace {

std::vector<double> drift_at(const ModelSpec& m, std::vector<double> x,
                             const std::vector<double>& atoms) {
  const EmpiricalMeasure mu(atoms, m.dim());
  const MeasureView view(mu);
  std::vector<double> out(m.dim()), scratch(m.dim());
  m.drift(x, view, out, scratch);
  return out;
}

std::vector<double> sigma_at(const ModelSpec& m, std::vector<double> x) {
  std::vector<double> out(m.dim() * m.dim());
  m.sigma(x, out);
  return out;
}

}  // namespace

TEST(Model, Families) {
  const auto fams = builtin_families();
  EXPECT_EQ(fams.size(), 4u);
  for (const auto& f : fams) {
    EXPECT_NO_THROW(make_builtin_model(f)) << f;
    EXPECT_FALSE(builtin_defaults(f).empty());
  }
  EXPECT_THROW(make_builtin_model("nope"), std::invalid_argument);
  EXPECT_THROW(make_builtin_model("linear_mf", {{"zz", 1.0}}), std::invalid_argument);
  EXPECT_THROW(make_builtin_model("holder_diffusion_1d", {{"alpha", 0.4}}),
               std::invalid_argument);
}

TEST(Model, LinearMeanField) {
  const auto m = make_builtin_model("linear_mf", {{"a", -1.0}, {"c", 0.5}, {"s", 2.0}});
  const auto b = drift_at(m, {2.0}, {1.0, 2.0, 3.0, 6.0});
  EXPECT_DOUBLE_EQ(b[0], -2.0 + 0.5 * 3.0);
  EXPECT_DOUBLE_EQ(sigma_at(m, {5.0})[0], 2.0);
}

TEST(Model, HolderDiffusion) {
  const auto m = make_builtin_model("holder_diffusion_1d",
                                    {{"alpha", 0.75}, {"kappa", 1.0}, {"S", 10.0}});
  EXPECT_DOUBLE_EQ(sigma_at(m, {16.0})[0], 8.0);
  EXPECT_DOUBLE_EQ(sigma_at(m, {-16.0})[0], 8.0);
  EXPECT_DOUBLE_EQ(sigma_at(m, {1e6})[0], 10.0);
  EXPECT_DOUBLE_EQ(sigma_at(m, {0.0})[0], 0.0);
}

TEST(Model, HolderDriftSign) {
  const auto m = make_builtin_model("holder_drift_1d",
                                    {{"lambda", 1.0}, {"beta", 0.5}, {"K1", 0.0}});
  EXPECT_DOUBLE_EQ(drift_at(m, {4.0}, {0.0})[0], -2.0);
  EXPECT_DOUBLE_EQ(drift_at(m, {-4.0}, {0.0})[0], 2.0);
}

TEST(Model, BoundedHolderMultid) {
  const auto m = make_builtin_model(
      "bounded_holder_multid",
      {{"d", 2.0}, {"A", -1.0}, {"alpha", 0.5}, {"c", 1.0}, {"eps", 0.1}});
  ASSERT_EQ(m.dim(), 2u);
  const auto b = drift_at(m, {0.25, -4.0}, {0.0, 0.0, 1.0, 2.0});
  EXPECT_NEAR(b[0], -0.5 + std::tanh(0.5), 1e-15);
  EXPECT_NEAR(b[1], 1.0 + std::tanh(1.0), 1e-15);
  const double x0 = 0.3, x1 = -1.2;
  const auto s = sigma_at(m, {x0, x1});
  EXPECT_NEAR(s[0], 1.0 + 0.1 * std::sin(x0) * std::cos(x0), 1e-15);
  EXPECT_NEAR(s[1], 0.1 * std::sin(x0) * std::cos(x1), 1e-15);
  EXPECT_NEAR(s[2], 0.1 * std::sin(x1) * std::cos(x0), 1e-15);
  EXPECT_NEAR(s[3], 1.0 + 0.1 * std::sin(x1) * std::cos(x1), 1e-15);
}

TEST(Model, MeasureViewFunctionals) {
  const EmpiricalMeasure mu({-1.0, 2.0, 5.0}, 1);
  const MeasureView view(mu);
  EXPECT_DOUBLE_EQ(view.mean()[0], 2.0);
  EXPECT_DOUBLE_EQ(view.abs_moment(1.0), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(view.lip_average([](std::span<const double> x) { return 2 * x[0]; }),
                   4.0);
}

TEST(Model, BuiltinsValidate) {
  ProbeConfig probe;
  probe.n_pairs = 300;
  for (const auto& f : builtin_families()) {
    const auto rep = validate_model(make_builtin_model(f), probe);
    for (const auto& e : rep.entries) {
      EXPECT_TRUE(e.pass) << f << ": " << e.check << " observed " << e.observed
                          << " declared " << e.declared;
    }
  }
}

TEST(Model, ValidationCatchesUnderstatedConstant) {
  auto m = make_builtin_model("linear_mf", {{"a", -2.0}, {"c", 0.5}});
  m.profile.K1 = 0.5;  // true Lipschitz constant of b1 is 2
  ProbeConfig probe;
  probe.n_pairs = 200;
  EXPECT_FALSE(validate_model(m, probe).pass());
}

TEST(Model, ProfileValidation) {
  RegularityProfile p;
  p.alpha = 0.3;
  EXPECT_THROW(p.validate(true), std::invalid_argument);
  p.alpha = 0.6;
  EXPECT_NO_THROW(p.validate(true));
}
