#include "mvem/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "mvem/numerics.hpp"
#include "mvem/rng.hpp"

namespace mvem {
namespace {

double signed_power(double x, double beta) {
  if (beta == 1.0) return x;
  if (beta == 0.5) return std::copysign(std::sqrt(std::abs(x)), x);
  return std::copysign(std::pow(std::abs(x), beta), x);
}

double abs_power(double x, double alpha) {
  if (alpha == 1.0) return std::abs(x);
  if (alpha == 0.5) return std::sqrt(std::abs(x));
  return std::pow(std::abs(x), alpha);
}

ParamMap resolve(std::string_view family, const ParamMap& defaults,
                 const ParamMap& given) {
  ParamMap out = defaults;
  for (const auto& [key, value] : given) {
    if (!defaults.contains(key)) {
      throw std::invalid_argument("unknown parameter '" + key +
                                  "' for family " + std::string(family));
    }
    if (!std::isfinite(value)) {
      throw std::invalid_argument("parameter '" + key + "' is not finite");
    }
    out[key] = value;
  }
  return out;
}

void require(bool ok, std::string_view family, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(std::string(family) + ": " + what);
  }
}

ModelSpec linear_mf(const ParamMap& p) {
  const double a = p.at("a"), c = p.at("c"), s = p.at("s"), bound = p.at("B");
  require(bound >= 0.0, "linear_mf", "B must be >= 0");
  ModelSpec m;
  m.name = "linear_mf";
  m.family_class = FamilyClass::kOneDimHolder;
  m.profile.dimension = 1;
  m.profile.alpha = 1.0;
  m.profile.beta = 1.0;
  m.profile.K1 = std::max(std::abs(a), std::abs(c));
  m.profile.K2 = 0.0;
  // A non-increasing b1 needs a <= 0; otherwise the linear term is carried by
  // the Lipschitz part b2.
  const double a1 = a <= 0.0 ? a : 0.0;
  const double a2 = a - a1;
  m.b1 = [a1](std::span<const double> x, const MeasureView&,
              std::span<double> out) { out[0] = a1 * x[0]; };
  m.b2 = [a2, c, bound](std::span<const double> x, const MeasureView& mu,
                        std::span<double> out) {
    out[0] = a2 * x[0] + c * std::clamp(mu.mean()[0], -bound, bound);
  };
  m.sigma = [s](std::span<const double>, std::span<double> out) {
    out[0] = s;
  };
  return m;
}

void holder_drift_parts(ModelSpec& m, const ParamMap& p, std::string_view fam) {
  const double lambda = p.at("lambda"), beta = p.at("beta"), k1 = p.at("K1"),
               bound = p.at("B");
  require(lambda >= 0.0, fam, "lambda must be >= 0 (b1 non-increasing)");
  require(beta > 0.0 && beta <= 1.0, fam, "beta must lie in (0, 1]");
  require(bound >= 0.0, fam, "B must be >= 0");
  m.profile.beta = beta;
  m.profile.K1 = std::max(lambda * std::pow(2.0, 1.0 - beta), std::abs(k1));
  m.b1 = [lambda, beta](std::span<const double> x, const MeasureView&,
                        std::span<double> out) {
    out[0] = -lambda * signed_power(x[0], beta);
  };
  m.b2 = [k1, bound](std::span<const double>, const MeasureView& mu,
                     std::span<double> out) {
    out[0] = k1 * std::clamp(mu.mean()[0], -bound, bound);
  };
}

ModelSpec holder_drift_1d(const ParamMap& p) {
  ModelSpec m;
  m.name = "holder_drift_1d";
  m.family_class = FamilyClass::kOneDimHolder;
  m.profile.dimension = 1;
  m.profile.alpha = 1.0;
  m.profile.K2 = 0.0;
  holder_drift_parts(m, p, m.name);
  const double s = p.at("s");
  m.sigma = [s](std::span<const double>, std::span<double> out) {
    out[0] = s;
  };
  return m;
}

ModelSpec holder_diffusion_1d(const ParamMap& p) {
  ModelSpec m;
  m.name = "holder_diffusion_1d";
  m.family_class = FamilyClass::kOneDimHolder;
  m.profile.dimension = 1;
  holder_drift_parts(m, p, m.name);
  const double alpha = p.at("alpha"), kappa = p.at("kappa"), cap = p.at("S");
  require(alpha >= 0.5 && alpha <= 1.0, m.name,
          "alpha must lie in [1/2, 1] for a Hoelder diffusion");
  require(kappa >= 0.0, m.name, "kappa must be >= 0");
  require(cap > 0.0, m.name, "S must be > 0");
  m.profile.alpha = alpha;
  // ||x|^a - |y|^a| <= |x - y|^a, and min(., S) is 1-Lipschitz.
  m.profile.K2 = kappa;
  m.sigma = [alpha, kappa, cap](std::span<const double> x,
                                std::span<double> out) {
    out[0] = std::min(kappa * abs_power(x[0], alpha), cap);
  };
  return m;
}

ModelSpec bounded_holder_multid(const ParamMap& p) {
  const double d_raw = p.at("d");
  const std::string fam = "bounded_holder_multid";
  require(d_raw >= 1.0 && d_raw <= 64.0 && d_raw == std::floor(d_raw), fam,
          "d must be an integer in [1, 64]");
  const auto d = static_cast<std::size_t>(d_raw);
  const double amp = p.at("A"), alpha = p.at("alpha"), c = p.at("c"),
               eps = p.at("eps");
  require(alpha > 0.0 && alpha <= 1.0, fam, "alpha must lie in (0, 1]");
  require(eps >= 0.0, fam, "eps must be >= 0");
  const double dd = static_cast<double>(d);

  ModelSpec m;
  m.name = fam;
  m.family_class = FamilyClass::kMultiDimBounded;
  auto& prof = m.profile;
  prof.dimension = d;
  prof.alpha = alpha;
  // Componentwise 2^(1-a)|A| Hoelder; the power mean inequality adds
  // d^((1-a)/2) in the Euclidean norm. tanh(mean) is W1-Lipschitz with |c|.
  prof.K = std::max(std::abs(amp) * std::pow(2.0, 1.0 - alpha) *
                        std::pow(dd, 0.5 * (1.0 - alpha)),
                    std::abs(c));
  prof.drift_bound = std::sqrt(dd) * (std::abs(amp) + std::abs(c));
  // sigma = I + eps u v^T with u = sin(x), v = cos(x): |u||v| <= d/2.
  prof.sigma_min = std::max(0.0, 1.0 - eps * dd / 2.0);
  prof.sigma_bound = 1.0 + eps * dd / 2.0;
  prof.K2 = 2.0 * eps * std::sqrt(dd);

  m.b1 = [amp, alpha](std::span<const double> x, const MeasureView&,
                      std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] = amp * signed_power(std::clamp(x[i], -1.0, 1.0), alpha);
    }
  };
  m.b2 = [c](std::span<const double> x, const MeasureView& mu,
             std::span<double> out) {
    const auto mean = mu.mean();
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * std::tanh(mean[i]);
  };
  m.sigma = [eps, d](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i) {
      const double si = std::sin(x[i]);
      for (std::size_t j = 0; j < d; ++j) {
        out[i * d + j] = (i == j ? 1.0 : 0.0) + eps * si * std::cos(x[j]);
      }
    }
  };
  return m;
}

}  // namespace

void RegularityProfile::validate(bool one_dim) const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid regularity profile: " + what);
  };
  if (dimension < 1) fail("dimension must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (one_dim && alpha < 0.5) fail("alpha must be >= 1/2 in one dimension");
  if (!(beta > 0.0 && beta <= 1.0)) fail("beta must lie in (0, 1]");
  for (double k : {K1, K2, K, sigma_min, drift_bound, sigma_bound}) {
    if (!(k >= 0.0) || !std::isfinite(k)) fail("constants must be finite, >= 0");
  }
}

MeasureView::MeasureView(AtomSpan sample) : sample_(sample), mean_(sample.dim) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("MeasureView over an empty sample");
  for (std::size_t c = 0; c < sample.dim; ++c) {
    mean_[c] = pairwise_sum_strided(sample.data, c, sample.dim, n) /
               static_cast<double>(n);
  }
}

double MeasureView::abs_moment(double p) const {
  if (!(p >= 1.0)) throw std::invalid_argument("abs_moment needs p >= 1");
  std::vector<double> terms(size());
  std::vector<double> zero(dim(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    terms[i] = std::pow(euclidean_distance(sample_.atom(i), zero), p);
  }
  return mean_of(terms);
}

double MeasureView::lip_average(
    const std::function<double(std::span<const double>)>& phi) const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) terms[i] = phi(sample_.atom(i));
  return mean_of(terms);
}

std::string_view to_string(FamilyClass c) {
  switch (c) {
    case FamilyClass::kOneDimHolder: return "holder_1d";
    case FamilyClass::kMultiDimBounded: return "bounded_multid";
    case FamilyClass::kCustom: return "custom";
  }
  return "custom";
}

void ModelSpec::drift(std::span<const double> x, const MeasureView& m,
                      std::span<double> out, std::span<double> scratch) const {
  b1(x, m, out);
  b2(x, m, scratch);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] += scratch[c];
}

std::vector<std::string> builtin_families() {
  return {"linear_mf", "holder_drift_1d", "holder_diffusion_1d",
          "bounded_holder_multid"};
}

ParamMap builtin_defaults(std::string_view family_id) {
  if (family_id == "linear_mf") {
    return {{"a", -1.0}, {"c", 0.5}, {"s", 1.0}, {"B", 1e3}};
  }
  if (family_id == "holder_drift_1d") {
    return {{"lambda", 1.0}, {"beta", 0.5}, {"K1", 0.5}, {"B", 1e3},
            {"s", 1.0}};
  }
  if (family_id == "holder_diffusion_1d") {
    return {{"alpha", 0.75}, {"kappa", 1.0}, {"S", 10.0}, {"lambda", 1.0},
            {"beta", 1.0},   {"K1", 0.5},    {"B", 1e3}};
  }
  if (family_id == "bounded_holder_multid") {
    return {{"d", 2.0}, {"A", -1.0}, {"alpha", 0.5}, {"c", 1.0},
            {"eps", 0.1}};
  }
  throw std::invalid_argument("unknown model family '" +
                              std::string(family_id) + "'");
}

ModelSpec make_builtin_model(std::string_view family_id,
                             const ParamMap& params) {
  const ParamMap p = resolve(family_id, builtin_defaults(family_id), params);
  ModelSpec m;
  if (family_id == "linear_mf") {
    m = linear_mf(p);
  } else if (family_id == "holder_drift_1d") {
    m = holder_drift_1d(p);
  } else if (family_id == "holder_diffusion_1d") {
    m = holder_diffusion_1d(p);
  } else {
    m = bounded_holder_multid(p);
  }
  m.profile.validate(m.family_class == FamilyClass::kOneDimHolder);
  return m;
}

bool ValidationReport::pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ValidationEntry& e) { return e.pass; });
}

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double min_singular_value(const ModelSpec& model, std::span<const double> x) {
  const std::size_t d = model.dim();
  std::vector<double> buf(d * d);
  model.sigma(x, buf);
  Eigen::Map<const RowMatrix> s(buf.data(), static_cast<Eigen::Index>(d),
                                static_cast<Eigen::Index>(d));
  if (!s.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  return Eigen::JacobiSVD<RowMatrix>(s).singularValues().minCoeff();
}

double operator_norm(std::span<const double> buf, std::size_t d) {
  Eigen::Map<const RowMatrix> s(buf.data(), static_cast<Eigen::Index>(d),
                                static_cast<Eigen::Index>(d));
  return Eigen::JacobiSVD<RowMatrix>(s).singularValues().maxCoeff();
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double diff_norm(std::span<const double> a, std::span<const double> b) {
  return euclidean_distance(a, b);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double c) { return std::isfinite(c); });
}

struct Tracker {
  std::string name;
  double declared = 0.0;
  double observed = 0.0;
  bool upper = true;  // observed must stay below declared
  std::string note;

  Tracker(std::string n, double d) : name(std::move(n)), declared(d) {}

  void see(double q) {
    if (std::isnan(q)) return;
    observed = upper ? std::max(observed, q) : std::min(observed, q);
  }
};

// Coordinate pattern search for a small singular value, started at x.
double refine_min_singular(const ModelSpec& model, std::vector<double> x,
                           double radius) {
  double best = min_singular_value(model, x);
  double h = radius / 4.0;
  std::vector<double> trial = x;
  while (h > 1e-9) {
    bool improved = false;
    for (std::size_t c = 0; c < x.size(); ++c) {
      for (double sign : {-1.0, 1.0}) {
        trial = x;
        trial[c] = std::clamp(trial[c] + sign * h, -radius, radius);
        const double v = min_singular_value(model, trial);
        if (v < best) {
          best = v;
          x = trial;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace

ValidationReport validate_model(const ModelSpec& model,
                                const ProbeConfig& probe) {
  if (probe.n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  if (!(probe.box_radius > 0.0)) {
    throw std::invalid_argument("box_radius must be > 0");
  }
  const std::size_t d = model.dim();
  const auto& prof = model.profile;
  const bool one_dim_class =
      model.family_class == FamilyClass::kOneDimHolder ||
      (model.family_class == FamilyClass::kCustom && d == 1);
  const double r = probe.box_radius;
  const double tol = probe.tol;
  const CounterRng rng(probe.seed, StreamTag::kProbe);
  const std::size_t na = std::max<std::size_t>(probe.measure_atoms, 1);

  auto draw = [&](std::uint64_t pair, std::uint64_t slot, std::size_t count) {
    std::vector<double> v(count);
    rng.uniforms(pair, slot, v);
    for (double& c : v) c = r * (2.0 * c - 1.0);
    return v;
  };

  ValidationReport report;
  report.model = model.name;
  bool finite = true;

  Tracker b1_hoelder{"b1_hoelder_x", prof.K1};
  Tracker b1_law{"b1_lipschitz_w1", prof.K1};
  Tracker monotone{"b1_monotone_increase", 0.0};
  Tracker b2_lip{"b2_lipschitz_x_w1", prof.K1};
  Tracker sigma_hoelder{"sigma_hoelder", prof.K2};
  Tracker b_hoelder{"b_hoelder_x", prof.K};
  Tracker b_law{"b_lipschitz_w1", prof.K};
  Tracker sigma_lip{"sigma_lipschitz", prof.K2};
  Tracker b_sup{"b_sup_norm", prof.drift_bound};
  Tracker sigma_sup{"sigma_sup_norm", prof.sigma_bound};
  Tracker sigma_min{"sigma_min_singular",
                    std::max(prof.sigma_min - tol, probe.singular_floor)};
  sigma_min.upper = false;
  sigma_min.observed = std::numeric_limits<double>::infinity();
  std::size_t monotone_violations = 0;

  std::vector<double> b1x(d), b1y(d), b1xn(d), b2x(d), b2y(d), bx(d), by(d),
      bxn(d), tmp(d), sx(d * d), sy(d * d);
  std::vector<std::pair<double, std::vector<double>>> worst_sigma;

  for (std::size_t k = 0; k < probe.n_pairs; ++k) {
    const auto x = draw(k, 0, d);
    const auto y = draw(k, 1, d);
    const EmpiricalMeasure mu(draw(k, 2, na * d), d);
    const EmpiricalMeasure nu(draw(k, 3, na * d), d);
    const MeasureView mv(mu), nv(nu);
    const double w1 = d == 1 ? wasserstein_1d(1.0, mu, nu)
                             : wasserstein_matching(1.0, mu, nu);
    const double dxy = diff_norm(x, y);

    model.b1(x, mv, b1x);
    model.b1(y, mv, b1y);
    model.b1(x, nv, b1xn);
    model.b2(x, mv, b2x);
    model.b2(y, nv, b2y);
    model.sigma(x, sx);
    model.sigma(y, sy);
    for (const auto* v : {&b1x, &b1y, &b1xn, &b2x, &b2y, &sx, &sy}) {
      finite = finite && all_finite(*v);
    }
    if (!finite) break;

    if (one_dim_class) {
      if (dxy > 0.0) {
        b1_hoelder.see(diff_norm(b1x, b1y) / std::pow(dxy, prof.beta));
        sigma_hoelder.see(std::abs(sx[0] - sy[0]) / std::pow(dxy, prof.alpha));
      }
      if (w1 > 0.0) b1_law.see(diff_norm(b1x, b1xn) / w1);
      if (dxy + w1 > 0.0) b2_lip.see(diff_norm(b2x, b2y) / (dxy + w1));
      // x < y must give b1(y) <= b1(x).
      const double rise = x[0] < y[0] ? b1y[0] - b1x[0] : b1x[0] - b1y[0];
      if (rise > tol) ++monotone_violations;
      monotone.see(rise);
    } else {
      model.drift(x, mv, bx, tmp);
      model.drift(y, mv, by, tmp);
      model.drift(x, nv, bxn, tmp);
      if (dxy > 0.0) {
        b_hoelder.see(diff_norm(bx, by) / std::pow(dxy, prof.alpha));
        double fro = 0.0;
        for (std::size_t c = 0; c < d * d; ++c) {
          fro += (sx[c] - sy[c]) * (sx[c] - sy[c]);
        }
        sigma_lip.see(std::sqrt(fro) / dxy);
      }
      if (w1 > 0.0) b_law.see(diff_norm(bx, bxn) / w1);
      b_sup.see(norm(bx));
      sigma_sup.see(operator_norm(sx, d));
      const double smin = min_singular_value(model, x);
      sigma_min.see(smin);
      worst_sigma.emplace_back(smin, x);
    }
  }

  auto emit = [&](const Tracker& t) {
    ValidationEntry e{t.name, t.observed, t.declared, true, t.note};
    e.pass = t.upper ? t.observed <= t.declared * (1.0 + tol) + tol
                     : t.observed >= t.declared;
    report.entries.push_back(std::move(e));
  };

  report.entries.push_back({"finite_outputs", finite ? 1.0 : 0.0, 1.0, finite,
                            finite ? "" : "non-finite coefficient value"});
  if (!finite) return report;

  if (one_dim_class) {
    emit(b1_hoelder);
    emit(b1_law);
    ValidationEntry mono{monotone.name, monotone.observed, 0.0,
                         monotone_violations == 0,
                         std::to_string(monotone_violations) + " violations"};
    report.entries.push_back(std::move(mono));
    emit(b2_lip);
    emit(sigma_hoelder);
  } else {
    emit(b_hoelder);
    emit(b_law);
    emit(sigma_lip);
    emit(b_sup);
    emit(sigma_sup);
    std::sort(worst_sigma.begin(), worst_sigma.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t starts = std::min<std::size_t>(5, worst_sigma.size());
    for (std::size_t s = 0; s < starts; ++s) {
      sigma_min.see(refine_min_singular(model, worst_sigma[s].second, r));
    }
    emit(sigma_min);
  }
  return report;
}

}  // namespace mvem
