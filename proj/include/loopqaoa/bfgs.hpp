#pragma once

// Quasi-Newton minimization with the BFGS inverse-Hessian update and an
// Armijo backtracking line search. Generic over the objective and gradient
// callables so the QAOA optimizer and the unit tests share one code path.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace loopqaoa {

struct BfgsOptions {
  int max_iters = 200;
  double grad_tol = 1e-8;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-10;
  /// Relative decrease below which an accepted step counts as no progress.
  double f_tol = 1e-15;
  /// Consecutive no-progress steps before stopping.
  int stall_limit = 3;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool finite = true;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// `f(x) -> double`, `grad(x) -> std::vector<double>`. Stops on
/// max |grad| < grad_tol, the iteration cap, or once steps stop producing a
/// representable decrease (a failed steepest-descent line search, or
/// `stall_limit` consecutive negligible steps); the last two also count as
/// converged. A non-finite objective or gradient
/// ends the run with `finite = false`.
template <class F, class G>
BfgsResult bfgs_minimize(F&& f, G&& grad, std::vector<double> x, const BfgsOptions& opt = {}) {
  using detail::dot;
  const std::size_t dim = x.size();
  BfgsResult res;
  int stalls = 0;
  double fx = f(x);
  std::vector<double> g = grad(x);
  if (!std::isfinite(fx) || !std::isfinite(detail::max_abs(g))) {
    res.x = std::move(x);
    res.value = fx;
    res.finite = false;
    return res;
  }

  // Inverse Hessian approximation, row-major.
  std::vector<double> hinv(dim * dim, 0.0);
  auto reset = [&] {
    std::fill(hinv.begin(), hinv.end(), 0.0);
    for (std::size_t k = 0; k < dim; ++k) hinv[k * dim + k] = 1.0;
  };
  reset();
  bool fresh = true;

  std::vector<double> d(dim), xn(dim), s(dim), y(dim), hy(dim);
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (detail::max_abs(g) < opt.grad_tol) {
      res.converged = true;
      break;
    }
    for (std::size_t r = 0; r < dim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim; ++c) acc -= hinv[r * dim + c] * g[c];
      d[r] = acc;
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      reset();
      fresh = true;
      for (std::size_t k = 0; k < dim; ++k) d[k] = -g[k];
      slope = dot(g, d);
    }

    double t = 1.0;
    double fn = 0.0;
    bool accepted = false;
    while (t >= opt.min_step) {
      for (std::size_t k = 0; k < dim; ++k) xn[k] = x[k] + t * d[k];
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + opt.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= opt.backtrack;
    }
    if (!accepted) {
      if (fresh) {
        // Steepest descent cannot improve: stationary to working precision.
        res.converged = true;
        break;
      }
      reset();
      fresh = true;
      continue;
    }

    std::vector<double> gn = grad(xn);
    if (!std::isfinite(detail::max_abs(gn))) {
      res.finite = false;
      x = xn;
      fx = fn;
      break;
    }
    for (std::size_t k = 0; k < dim; ++k) {
      s[k] = xn[k] - x[k];
      y[k] = gn[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / sy;
      for (std::size_t r = 0; r < dim; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) acc += hinv[r * dim + c] * y[c];
        hy[r] = acc;
      }
      const double yhy = dot(y, hy);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
          hinv[r * dim + c] += rho * ((1.0 + rho * yhy) * s[r] * s[c] - hy[r] * s[c] - s[r] * hy[c]);
      fresh = false;
    }
    stalls = (fx - fn <= opt.f_tol * (1.0 + std::abs(fx))) ? stalls + 1 : 0;
    x.swap(xn);
    g = std::move(gn);
    fx = fn;
    if (stalls >= opt.stall_limit) {
      res.converged = true;
      ++it;
      break;
    }
  }
  if (!res.converged && detail::max_abs(g) < opt.grad_tol) res.converged = true;
  res.x = std::move(x);
  res.value = fx;
  res.iterations = it;
  return res;
}

}  // namespace loopqaoa
