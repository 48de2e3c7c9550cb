#include "asymalloc/criterion.hpp"

#include "asymalloc/errors.hpp"
#include "asymalloc/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace asymalloc {

double evaluate(const MomentEngine& engine, const Strategy& s, const CriterionParams& p) {
  check_params(engine.model(), p);
  const double K = engine.growthRate(s);
  const double varRate = engine.varianceRate(s).varRate;
  const Vector P = engine.covarianceLimit(s);
  return K - p.theta / 4.0 * varRate + p.gamma.dot(P);
}

double evaluate(const FactorModel& model, const Strategy& s, const CriterionParams& p) {
  return evaluate(MomentEngine(model), s, p);
}

Vector pack_strategy(const Strategy& s) {
  const auto m = s.h.size();
  const auto n = s.H.cols();
  Vector x(m + m * n);
  x.head(m) = s.h;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x(m + i * n + j) = s.H(i, j);
  }
  return x;
}

Strategy unpack_strategy(const Vector& x, int m, int n) {
  if (x.size() != m + m * n) throw DimensionError("strategy vector has the wrong length");
  Strategy s{x.head(m), Matrix(m, n)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) s.H(i, j) = x(m + i * n + j);
  }
  return s;
}

void check_config(const OptimizerConfig& c, int d) {
  if (c.lower.size() != c.upper.size()) throw PreconditionError("bounds have different lengths");
  if (c.lower.size() != 0 && c.lower.size() != d) {
    throw DimensionError("bounds have length " + std::to_string(c.lower.size()) + ", expected " +
                         std::to_string(d));
  }
  if (!c.lower.allFinite() || !c.upper.allFinite() || (c.lower.array() >= c.upper.array()).any()) {
    throw PreconditionError("bounds must be finite with lower < upper");
  }
  if (c.gridPoints < 2) throw PreconditionError("gridPoints must be at least 2");
  if (c.samplePoints < 2) throw PreconditionError("samplePoints must be at least 2");
  if (c.localRestarts < 1) throw PreconditionError("localRestarts must be at least 1");
  if (!(c.simplexTolerance > 0.0)) throw PreconditionError("simplexTolerance must be positive");
  if (c.maxIterations < 1) throw PreconditionError("maxIterations must be positive");
}

namespace {

struct Candidate {
  Vector x;
  double W;
};

// Higher W first; ties (to 1e-12 relative) go to the smaller norm, then lexicographic order.
bool better(const Candidate& l, const Candidate& r) {
  const double tol = 1e-12 * (1.0 + std::max(std::abs(l.W), std::abs(r.W)));
  if (std::abs(l.W - r.W) > tol) return l.W > r.W;
  const double nl = l.x.norm(), nr = r.x.norm();
  if (nl != nr) return nl < nr;
  return std::lexicographical_compare(l.x.data(), l.x.data() + l.x.size(), r.x.data(),
                                      r.x.data() + r.x.size());
}

std::vector<Vector> scan_points(const Vector& lo, const Vector& hi, const OptimizerConfig& c) {
  const auto d = lo.size();
  std::vector<Vector> pts;
  const double full = std::pow(static_cast<double>(c.gridPoints), static_cast<double>(d));
  if (d <= c.maxFullGridDimension && full <= static_cast<double>(c.maxGridEvaluations)) {
    const auto total = static_cast<long>(full);
    pts.reserve(static_cast<std::size_t>(total));
    for (long idx = 0; idx < total; ++idx) {
      Vector x(d);
      long rem = idx;
      for (Eigen::Index k = d - 1; k >= 0; --k) {
        const long g = rem % c.gridPoints;
        rem /= c.gridPoints;
        x(k) = lo(k) + (hi(k) - lo(k)) * static_cast<double>(g) / (c.gridPoints - 1);
      }
      pts.push_back(std::move(x));
    }
    return pts;
  }
  // Latin hypercube: one sample per stratum in every coordinate.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int N = c.samplePoints;
  pts.assign(static_cast<std::size_t>(N), Vector(d));
  std::vector<int> perm(static_cast<std::size_t>(N));
  for (Eigen::Index k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < N; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + unif(rng)) / N;
      pts[static_cast<std::size_t>(i)](k) = lo(k) + (hi(k) - lo(k)) * u;
    }
  }
  return pts;
}

}  // namespace

Vector finite_difference_gradient(const MomentEngine& engine, const CriterionParams& p,
                                  const Vector& x) {
  const int m = engine.model().m(), n = engine.model().n();
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = 1e-5 * (1.0 + std::abs(x(i)));
    Vector xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (evaluate(engine, unpack_strategy(xp, m, n), p) -
            evaluate(engine, unpack_strategy(xm, m, n), p)) /
           (2.0 * step);
  }
  return g;
}

OptimizeResult optimize(const FactorModel& model, const CriterionParams& params,
                        const OptimizerConfig& config, const std::vector<Vector>& extraStarts) {
  check_params(model, params);
  const int m = model.m(), n = model.n();
  const int d = m + m * n;
  check_config(config, d);
  const Vector lo = config.lower.size() ? config.lower : Vector::Constant(d, -3.0);
  const Vector hi = config.upper.size() ? config.upper : Vector::Constant(d, 3.0);

  const MomentEngine engine(model);
  auto W = [&](const Vector& x) {
    try {
      return evaluate(engine, unpack_strategy(x, m, n), params);
    } catch (const NumericError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  OptimizeResult out;
  if (params.theta == 0.0 && params.gamma.isZero(0.0)) {
    out.warnings.push_back("theta = 0 and Gamma = 0: the criterion is the growth rate alone");
  }

  std::vector<Candidate> scan;
  for (auto& x : scan_points(lo, hi, config)) {
    const double w = W(x);
    scan.push_back({std::move(x), w});
  }
  std::sort(scan.begin(), scan.end(), better);
  out.bestScanValue = scan.front().W;

  // A best scan point on the boundary may mean the supremum lies outside the box
  // or that W is unbounded. Walk outward along the ray from the box centre.
  const Vector& xb = scan.front().x;
  const bool onBoundary = ((xb - lo).array().abs() < 1e-12).any() || ((hi - xb).array().abs() < 1e-12).any();
  if (onBoundary) {
    const Vector centre = 0.5 * (lo + hi);
    double prev = scan.front().W;
    bool increasing = true;
    for (int k = 1; k <= 20 && increasing; ++k) {
      const double w = W(centre + std::ldexp(1.0, k) * (xb - centre));
      increasing = w > prev;
      prev = w;
    }
    if (increasing) {
      throw UnboundedError("criterion increases without bound along the direction of the best "
                           "scan point; no finite optimum exists for these parameters");
    }
    out.warnings.push_back("best scan point lies on the search box boundary");
  }

  std::vector<Vector> starts;
  for (int k = 0; k < config.localRestarts && k < static_cast<int>(scan.size()); ++k) {
    starts.push_back(scan[static_cast<std::size_t>(k)].x);
  }
  for (const auto& x : extraStarts) {
    if (x.size() != d) throw DimensionError("warm-start point has the wrong length");
    starts.push_back(x);
  }

  NelderMeadOptions nm;
  nm.initialStep = 0.1;
  nm.xTolerance = config.simplexTolerance;
  nm.maxIterations = config.maxIterations;
  auto negW = [&](const Vector& x) { return -W(x); };

  std::vector<Candidate> finals;
  for (const auto& x0 : starts) {
    auto r = nelder_mead(negW, x0, nm);
    // Restart from a fresh simplex in case the first one collapsed early.
    NelderMeadOptions again = nm;
    again.initialStep = 0.01;
    auto r2 = nelder_mead(negW, r.x, again);
    LocalSearch ls{x0, r2.x, -r2.f, r.iterations + r2.iterations, r.converged && r2.converged};
    finals.push_back({ls.x, ls.W});
    out.restarts.push_back(std::move(ls));
  }
  std::sort(finals.begin(), finals.end(), better);
  Candidate best = finals.front();

  const double gtol = 1e-6;
  double gnorm = finite_difference_gradient(engine, params, best.x).norm();
  for (int polish = 0; polish < 3 && gnorm > gtol * (1.0 + std::abs(best.W)); ++polish) {
    NelderMeadOptions fine = nm;
    fine.initialStep = 1e-3 * std::pow(0.1, polish);
    auto r = nelder_mead(negW, best.x, fine);
    if (-r.f >= best.W) best = {r.x, -r.f};
    gnorm = finite_difference_gradient(engine, params, best.x).norm();
  }

  out.strategy = unpack_strategy(best.x, m, n);
  out.W = best.W;
  out.gradientNorm = gnorm;
  out.stationary = gnorm <= gtol * (1.0 + std::abs(best.W));
  if (!out.stationary) out.warnings.push_back("first-order condition not met at the reported optimum");
  return out;
}

namespace {

template <typename ParamsAt>
SweepResult run_sweep(const FactorModel& model, const std::vector<double>& values,
                      const OptimizerConfig& config, ParamsAt params_at) {
  SweepResult res;
  std::vector<Vector> warm;
  for (double v : values) {
    SweepPoint pt;
    pt.parameter = v;
    try {
      auto opt = optimize(model, params_at(v), config, warm);
      warm = {pack_strategy(opt.strategy)};
      pt.ratio = opt.strategy.H(0, 0) / opt.strategy.h(0);
      pt.optimum = std::move(opt);
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    res.points.push_back(std::move(pt));
  }
  return res;
}

}  // namespace

SweepResult sweep_theta(const FactorModel& model, const std::vector<double>& thetas,
                        const Vector& gamma, const OptimizerConfig& config) {
  return run_sweep(model, thetas, config,
                   [&](double theta) { return CriterionParams{theta, gamma}; });
}

SweepResult sweep_gamma(const FactorModel& model, double theta, const std::vector<double>& gammas,
                        const Vector& direction, const OptimizerConfig& config) {
  if (direction.size() != model.n()) throw DimensionError("gamma direction must have length n");
  return run_sweep(model, gammas, config,
                   [&](double g) { return CriterionParams{theta, g * direction}; });
}

}  // namespace asymalloc
