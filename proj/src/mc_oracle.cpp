#include "asymalloc/mc_oracle.hpp"

#include "asymalloc/errors.hpp"
#include "asymalloc/io.hpp"
#include "asymalloc/moments.hpp"

#include <boost/random/normal_distribution.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace asymalloc::mc {

namespace {

// Neumaier-compensated running sum; deterministic given the order of additions.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Mean and standard error of i.i.d. unit values.
Estimate mean_and_stderr(const std::vector<double>& v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  const double mean = s.value() / static_cast<double>(v.size());
  CompensatedSum ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  const double var = v.size() > 1 ? ss.value() / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

// Symmetric square root L with L L' = M, negative eigenvalues clipped to zero.
Matrix psd_sqrt(const Matrix& M) {
  if (M.size() == 0) return M;
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(M));
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed on a covariance matrix");
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

long steps_for(double T, double dt) {
  const double k = T / dt;
  const double r = std::round(k);
  if (r < 1.0 || std::abs(k - r) > 1e-9 * std::max(1.0, k)) {
    throw PreconditionError("horizon " + io::format_double(T) + " is not a positive multiple of dt " +
                            io::format_double(dt));
  }
  return static_cast<long>(r);
}

// Row-major dense copy for the inner loop.
std::vector<double> flat(const Matrix& M) {
  std::vector<double> out(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[static_cast<std::size_t>(i * M.cols() + j)] = M(i, j);
  }
  return out;
}

// One time step of the joint (u, X) system. Coefficients fixed by the inputs
// are computed once.
class Stepper {
 public:
  Stepper(const FactorModel& model, const Strategy& s, double dt, FactorScheme scheme)
      : m_(model.m()), n_(model.n()), k_(m_ + n_), dt_(dt), sqdt_(std::sqrt(dt)) {
    const Matrix C = model.assetCovariance();
    h_ = flat(s.h);
    H_ = flat(s.H);
    a_ = flat(model.a());
    A_ = flat(model.A());
    SigmaT_ = flat(model.Sigma().transpose());  // k x m
    C_ = flat(C);

    Matrix F, W, L;
    if (scheme == FactorScheme::euler) {
      F = Matrix::Identity(n_, n_) + model.B() * dt;
      W = model.Lambda();
      L = Matrix::Zero(n_, n_);
    } else {
      // X(t+dt) = F X(t) + e, with e = G Lambda dW / dt + residual, G = B^{-1}(F - I).
      F = (model.B() * dt).exp();
      const Matrix G = model.B().partialPivLu().solve(F - Matrix::Identity(n_, n_));
      const Matrix delta = stationary_covariance(model);
      const Matrix Qd = delta - F * delta * F.transpose();
      W = G * model.Lambda() / dt;
      L = psd_sqrt(Qd - W * W.transpose() * dt);
      hasResidual_ = L.norm() > 0.0;
    }
    F_ = flat(F);
    Wld_ = flat(W);
    L_ = flat(L);
    normalsPerStep_ = k_ + (hasResidual_ ? n_ : 0);
    I_.resize(static_cast<std::size_t>(m_));
    dW_.resize(static_cast<std::size_t>(k_));
    Xn_.resize(static_cast<std::size_t>(n_));
  }

  int normalsPerStep() const { return normalsPerStep_; }

  // Advances (u, X) using standard normals z scaled by sign (+1 or -1 for antithetic).
  void step(double& u, double* X, const double* z, double sign) {
    const int m = m_, n = n_, k = k_;
    for (int j = 0; j < k; ++j) dW_[j] = sign * sqdt_ * z[j];
    double drift = 0.0, quad = 0.0, diff = 0.0;
    for (int i = 0; i < m; ++i) {
      double Ii = h_[i];
      double mu = a_[i];
      for (int j = 0; j < n; ++j) {
        Ii += H_[i * n + j] * X[j];
        mu += A_[i * n + j] * X[j];
      }
      I_[i] = Ii;
      drift += Ii * mu;
    }
    for (int i = 0; i < m; ++i) {
      double ci = 0.0;
      for (int l = 0; l < m; ++l) ci += C_[i * m + l] * I_[l];
      quad += I_[i] * ci;
    }
    for (int j = 0; j < k; ++j) {
      double sj = 0.0;
      for (int i = 0; i < m; ++i) sj += SigmaT_[j * m + i] * I_[i];
      diff += sj * dW_[j];
    }
    u += (drift - 0.5 * quad) * dt_ + diff;

    for (int r = 0; r < n; ++r) {
      double x = 0.0;
      for (int c = 0; c < n; ++c) x += F_[r * n + c] * X[c];
      for (int j = 0; j < k; ++j) x += Wld_[r * k + j] * dW_[j];
      if (hasResidual_) {
        for (int c = 0; c < n; ++c) x += L_[r * n + c] * sign * z[k + c];
      }
      Xn_[r] = x;
    }
    for (int r = 0; r < n; ++r) X[r] = Xn_[r];
  }

 private:
  int m_, n_, k_;
  double dt_, sqdt_;
  bool hasResidual_ = false;
  int normalsPerStep_ = 0;
  std::vector<double> h_, H_, a_, A_, SigmaT_, C_, F_, Wld_, L_;
  std::vector<double> I_, dW_, Xn_;
};

std::mt19937_64 unit_rng(std::uint64_t seed, long unit) {
  const auto u = static_cast<std::uint64_t>(unit);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(u >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

// Per-path snapshots of (u, X) at each checkpoint: record[(path * checkpoints + c) * (1+n) + ...].
struct Recording {
  long paths = 0;
  long units = 0;
  int replicas = 1;  // paths per unit
  int checkpoints = 0;
  int n = 0;
  std::vector<double> data;

  const double* at(long path, int c) const {
    return &data[static_cast<std::size_t>((path * checkpoints + c) * (1 + n))];
  }
};

Recording run(const FactorModel& model, const Strategy& s, const SimConfig& cfg,
              const std::vector<long>& checkpointSteps) {
  check_strategy(model, s);
  check_config(cfg);
  const int n = model.n();
  Recording rec;
  rec.replicas = cfg.antithetic ? 2 : 1;
  rec.units = cfg.paths / rec.replicas;
  rec.paths = rec.units * rec.replicas;
  rec.checkpoints = static_cast<int>(checkpointSteps.size());
  rec.n = n;
  rec.data.assign(static_cast<std::size_t>(rec.paths * rec.checkpoints * (1 + n)), 0.0);

  const Matrix delta = stationary_covariance(model);
  const std::vector<double> Ld = flat(cfg.stationaryStart ? psd_sqrt(delta) : Matrix::Zero(n, n));
  const long totalSteps = checkpointSteps.back();

  std::mutex errMutex;
  long errUnit = -1;
  std::string errMsg;

  auto worker = [&](long begin, long end) {
    Stepper stepper(model, s, cfg.dt, cfg.scheme);
    const int nz = stepper.normalsPerStep();
    std::vector<double> z(static_cast<std::size_t>(std::max(nz, n)));
    std::vector<double> X(static_cast<std::size_t>(rec.replicas * n));
    std::vector<double> u(static_cast<std::size_t>(rec.replicas));
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (long unit = begin; unit < end; ++unit) {
      auto rng = unit_rng(cfg.seed, unit);
      for (int j = 0; j < n; ++j) z[j] = normal(rng);
      for (int r = 0; r < rec.replicas; ++r) {
        const double sign = r == 0 ? 1.0 : -1.0;
        u[r] = 0.0;
        for (int i = 0; i < n; ++i) {
          double x = 0.0;
          for (int j = 0; j < n; ++j) x += Ld[i * n + j] * z[j];
          X[r * n + i] = sign * x;
        }
      }
      int c = 0;
      for (long step = 1; step <= totalSteps; ++step) {
        for (int j = 0; j < nz; ++j) z[j] = normal(rng);
        for (int r = 0; r < rec.replicas; ++r) stepper.step(u[r], &X[r * n], z.data(), r == 0 ? 1.0 : -1.0);
        if (step == checkpointSteps[c]) {
          for (int r = 0; r < rec.replicas; ++r) {
            const long path = unit * rec.replicas + r;
            if (!std::isfinite(u[r])) {
              std::lock_guard lock(errMutex);
              if (errUnit < 0 || unit < errUnit) {
                errUnit = unit;
                errMsg = "non-finite log-wealth on path " + std::to_string(path) + " by step " +
                         std::to_string(step);
              }
              return;
            }
            double* out = &rec.data[static_cast<std::size_t>((path * rec.checkpoints + c) * (1 + n))];
            out[0] = u[r];
            for (int j = 0; j < n; ++j) out[1 + j] = X[r * n + j];
          }
          ++c;
        }
      }
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(rec.units)));
  if (threads == 1) {
    worker(0, rec.units);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (rec.units + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long b = t * chunk, e = std::min(rec.units, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }
  if (errUnit >= 0) throw NumericError(errMsg);
  return rec;
}

// Per-unit values of the moment estimators at checkpoint c: mean u, centred u^2,
// u x_j, and u x_i x_j (upper triangle, row-major).
struct UnitMoments {
  std::vector<double> u, centred;
  std::vector<std::vector<double>> uX;
  std::vector<std::vector<double>> uXX;  // index i*n+j
};

UnitMoments unit_moments(const Recording& rec, int c) {
  const int n = rec.n;
  CompensatedSum su;
  for (long p = 0; p < rec.paths; ++p) su.add(rec.at(p, c)[0]);
  const double ubar = su.value() / static_cast<double>(rec.paths);
  // Var estimator uses the (paths - 1) divisor, folded into each unit's value.
  const double bessel = static_cast<double>(rec.paths) / static_cast<double>(rec.paths - 1);

  UnitMoments um;
  um.u.resize(static_cast<std::size_t>(rec.units));
  um.centred.resize(um.u.size());
  um.uX.assign(static_cast<std::size_t>(n), std::vector<double>(um.u.size()));
  um.uXX.assign(static_cast<std::size_t>(n * n), std::vector<double>(um.u.size()));
  const double w = 1.0 / rec.replicas;
  for (long unit = 0; unit < rec.units; ++unit) {
    const auto k = static_cast<std::size_t>(unit);
    double mu = 0.0, cu = 0.0;
    for (int r = 0; r < rec.replicas; ++r) {
      const double* v = rec.at(unit * rec.replicas + r, c);
      mu += w * v[0];
      cu += w * bessel * (v[0] - ubar) * (v[0] - ubar);
      for (int j = 0; j < n; ++j) {
        um.uX[j][k] += w * v[0] * v[1 + j];
        for (int l = 0; l < n; ++l) um.uXX[j * n + l][k] += w * v[0] * v[1 + j] * v[1 + l];
      }
    }
    um.u[k] = mu;
    um.centred[k] = cu;
  }
  return um;
}

}  // namespace

void check_config(const SimConfig& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw PreconditionError("dt must be positive");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw PreconditionError("horizon must be positive");
  if (c.paths < 2) throw PreconditionError("need at least 2 paths");
  if (c.antithetic && c.paths < 4) throw PreconditionError("antithetic sampling needs at least 4 paths");
  if (c.threads < 1) throw PreconditionError("threads must be at least 1");
}

PathStats simulate(const FactorModel& model, const Strategy& s, const SimConfig& cfg) {
  check_config(cfg);
  const long N = steps_for(cfg.horizon, cfg.dt);
  const Recording rec = run(model, s, cfg, {N});
  const UnitMoments um = unit_moments(rec, 0);

  PathStats out;
  out.horizon = cfg.horizon;
  out.paths = rec.paths;
  out.meanU = mean_and_stderr(um.u);
  out.varU = mean_and_stderr(um.centred);
  for (int j = 0; j < model.n(); ++j) out.covUX.push_back(mean_and_stderr(um.uX[j]));
  if (cfg.keepPaths) {
    out.finalU.resize(static_cast<std::size_t>(rec.paths));
    out.finalX.resize(rec.paths, model.n());
    for (long p = 0; p < rec.paths; ++p) {
      const double* v = rec.at(p, 0);
      out.finalU[static_cast<std::size_t>(p)] = v[0];
      for (int j = 0; j < model.n(); ++j) out.finalX(p, j) = v[1 + j];
    }
  }
  return out;
}

AsymptoticFit estimate_asymptotics(const FactorModel& model, const Strategy& s, SimConfig cfg,
                                   const std::vector<double>& horizons) {
  if (horizons.size() < 4) throw PreconditionError("estimate_asymptotics needs at least 4 horizons");
  std::vector<long> steps;
  for (double T : horizons) {
    const long k = steps_for(T, cfg.dt);
    if (!steps.empty() && k <= steps.back()) throw PreconditionError("horizons must be strictly increasing");
    steps.push_back(k);
  }
  cfg.horizon = horizons.back();
  check_config(cfg);
  const Recording rec = run(model, s, cfg, steps);
  const int n = model.n();
  const auto C = horizons.size();

  // OLS weights: slope = sum_c ws[c] y_c, intercept = sum_c wi[c] y_c.
  double tbar = 0.0;
  for (double T : horizons) tbar += T / static_cast<double>(C);
  double sxx = 0.0;
  for (double T : horizons) sxx += (T - tbar) * (T - tbar);
  if (!(sxx > 0.0)) throw NumericError("degenerate horizon grid");
  std::vector<double> ws(C), wi(C);
  for (std::size_t c = 0; c < C; ++c) {
    ws[c] = (horizons[c] - tbar) / sxx;
    wi[c] = 1.0 / static_cast<double>(C) - tbar * ws[c];
  }

  std::vector<UnitMoments> ums;
  for (std::size_t c = 0; c < C; ++c) ums.push_back(unit_moments(rec, static_cast<int>(c)));

  auto combine = [&](auto pick, const std::vector<double>& weights) {
    std::vector<double> v(static_cast<std::size_t>(rec.units), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      const std::vector<double>& col = pick(ums[c]);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += weights[c] * col[k];
    }
    return mean_and_stderr(v);
  };

  AsymptoticFit fit;
  fit.horizons = horizons;
  fit.K = combine([](const UnitMoments& u) -> const std::vector<double>& { return u.u; }, ws);
  fit.varRate = combine([](const UnitMoments& u) -> const std::vector<double>& { return u.centred; }, ws);
  fit.R.resize(n, n);
  fit.Rse.resize(n, n);
  fit.S.resize(n, n);
  fit.Sse.resize(n, n);
  fit.P.resize(n);
  fit.Pse.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto pick = [i, j, n](const UnitMoments& u) -> const std::vector<double>& { return u.uXX[i * n + j]; };
      const Estimate r = combine(pick, ws), sfit = combine(pick, wi);
      fit.R(i, j) = r.value;
      fit.Rse(i, j) = r.stderr;
      fit.S(i, j) = sfit.value;
      fit.Sse(i, j) = sfit.stderr;
    }
    const Estimate p = mean_and_stderr(ums.back().uX[i]);
    fit.P(i) = p.value;
    fit.Pse(i) = p.stderr;
  }
  return fit;
}

TimeSeriesData simulate_discrete(const FactorModel& model, long months, std::uint64_t seed,
                                 FactorScheme scheme, const std::string& startMonth) {
  if (months < kMinObservations) {
    throw PreconditionError("simulate_discrete needs at least " + std::to_string(kMinObservations) +
                            " months");
  }
  const int m = model.m(), n = model.n(), k = m + n;
  // The return equation a + A x + Sigma dW is the u-stepper with H = 0 and no Ito
  // correction; reuse its factor transition and draw layout.
  Stepper stepper(model, Strategy::zero(m, n), 1.0, scheme);
  const int nz = stepper.normalsPerStep();
  const std::vector<double> Ld = flat(psd_sqrt(stationary_covariance(model)));

  auto rng = unit_rng(seed, 0);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(std::max(nz, n)));
  std::vector<double> X(static_cast<std::size_t>(n)), Xprev(X.size());
  for (int j = 0; j < n; ++j) z[j] = normal(rng);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) X[i] += Ld[i * n + j] * z[j];
  }

  TimeSeriesData d;
  d.excessReturns.resize(months, m);
  d.factorLevels.resize(months, n);
  const Matrix& Sig = model.Sigma();
  for (long t = 0; t < months; ++t) {
    for (int j = 0; j < nz; ++j) z[j] = normal(rng);
    Xprev = X;
    double u = 0.0;
    stepper.step(u, X.data(), z.data(), 1.0);
    for (int i = 0; i < m; ++i) {
      double r = model.a()(i);
      for (int j = 0; j < n; ++j) r += model.A()(i, j) * Xprev[j];
      for (int j = 0; j < k; ++j) r += Sig(i, j) * z[j];
      d.excessReturns(t, i) = r;
    }
    for (int j = 0; j < n; ++j) d.factorLevels(t, j) = X[j];
    d.dates.push_back(month_label(startMonth, t));
  }
  return d;
}

std::string paths_to_csv(const PathStats& stats) {
  std::ostringstream out;
  out << "path,T,u";
  for (Eigen::Index j = 0; j < stats.finalX.cols(); ++j) out << ",x_" << j + 1;
  out << '\n';
  for (std::size_t p = 0; p < stats.finalU.size(); ++p) {
    out << p << ',' << io::format_double(stats.horizon) << ',' << io::format_double(stats.finalU[p]);
    for (Eigen::Index j = 0; j < stats.finalX.cols(); ++j) {
      out << ',' << io::format_double(stats.finalX(static_cast<Eigen::Index>(p), j));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace asymalloc::mc
