#include "asymalloc/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace asymalloc {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opt) {
  const Eigen::Index d = x0.size();
  std::vector<Vector> pts(static_cast<std::size_t>(d + 1), x0);
  std::vector<double> vals(pts.size());
  NelderMeadResult res;

  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  for (Eigen::Index i = 0; i < d; ++i) {
    pts[static_cast<std::size_t>(i + 1)](i) += opt.initialStep * (1.0 + std::abs(x0(i)));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
    std::vector<Vector> p2;
    std::vector<double> v2;
    p2.reserve(pts.size());
    v2.reserve(pts.size());
    for (auto k : order) {
      p2.push_back(std::move(pts[k]));
      v2.push_back(vals[k]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  const std::size_t worst = pts.size() - 1;
  while (res.iterations < opt.maxIterations) {
    sort_simplex();
    double diam = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      diam = std::max(diam, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
    }
    const double spread = vals[worst] - vals[0];
    if (diam <= opt.xTolerance * (1.0 + pts[0].lpNorm<Eigen::Infinity>()) &&
        spread <= opt.fTolerance * (1.0 + std::abs(vals[0]))) {
      res.converged = true;
      break;
    }
    ++res.iterations;

    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < worst; ++i) centroid += pts[i];
    centroid /= static_cast<double>(d);

    const Vector xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[worst - 1]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    // Contraction, outside if the reflected point beat the worst vertex.
    const bool outside = fr < vals[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = eval(pts[i]);
    }
  }
  sort_simplex();
  res.x = pts[0];
  res.f = vals[0];
  return res;
}

}  // namespace asymalloc
