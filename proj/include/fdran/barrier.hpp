/**
 * \file fdran/barrier.hpp
 *
 * \brief Log-barrier interior-point method for smooth concave maximization over a polytope.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fdran/common.hpp"

namespace fdran {

struct BarrierSettings {
  double gap_tol = 1e-8;      // stop when m / t <= gap_tol * max(1, |f|)
  double newton_tol = 1e-10;  // centering stops when lambda^2 / 2 drops below this
  double t0 = 1.0;
  double t_factor = 20.0;
  int max_newton = 200;       // per centering step
  int max_outer = 50;
};

struct BarrierResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double min_slack = 0.0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
};

/// Largest inscribed ball of {A x <= b}, i.e. the Chebyshev center.
struct InteriorPoint {
  Eigen::VectorXd x;
  double radius = 0.0;
};

/**
 * Maximizes a concave `obj` subject to A x <= b, starting from a strictly feasible x0.
 *
 * `obj` must provide `double value(const VectorXd&)` (may return NaN or -inf outside its
 * domain) and `void derivatives(const VectorXd&, VectorXd& grad, MatrixXd& hess)`.
 */
template <class Objective>
BarrierResult maximize_concave(const Objective& obj, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& x0, const BarrierSettings& cfg = {}) {
  const Eigen::Index n = x0.size(), m = A.rows();
  require(A.cols() == n && b.size() == m, "barrier: dimension mismatch");
  BarrierResult res;
  res.x = x0;
  {
    const Eigen::VectorXd s0 = b - A * x0;
    require(m == 0 || s0.minCoeff() > 0.0, "barrier: start point is not strictly feasible");
  }

  auto phi = [&](const Eigen::VectorXd& x, double t) {
    const Eigen::VectorXd s = b - A * x;
    if (m > 0 && s.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    const double f = obj.value(x);
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    return -t * f - s.array().log().sum();
  };

  Eigen::VectorXd grad(n), g(n), dx(n);
  Eigen::MatrixXd hess(n, n), H(n, n);
  double t = cfg.t0;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    res.outer_iterations = outer + 1;
    double cur = phi(res.x, t);
    for (int it = 0; it < cfg.max_newton; ++it) {
      const Eigen::VectorXd s = b - A * res.x;
      const Eigen::VectorXd d = s.cwiseInverse();
      obj.derivatives(res.x, grad, hess);
      g = -t * grad + A.transpose() * d;
      H = -t * hess + A.transpose() * d.cwiseAbs2().asDiagonal() * A;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      dx = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        // Nearly singular: fall back to a regularized solve.
        const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        dx = -(H + reg * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(g);
      }
      ++res.newton_iterations;
      const double decrement = -g.dot(dx);
      // The second test stops once phi can no longer resolve the predicted decrease.
      if (!(decrement > 2.0 * cfg.newton_tol) || decrement <= 1e-13 * std::abs(cur)) break;

      double step = 1.0;
      const Eigen::VectorXd adx = A * dx;
      for (Eigen::Index i = 0; i < m; ++i)
        if (adx[i] > 0.0) step = std::min(step, 0.99 * s[i] / adx[i]);
      bool moved = false;
      while (step > 1e-16) {
        const Eigen::VectorXd trial = res.x + step * dx;
        const double next = phi(trial, t);
        if (next < cur && next <= cur - 0.25 * step * decrement) {
          res.x = trial;
          cur = next;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // limited by floating-point resolution of phi
    }
    const double f = obj.value(res.x);
    if (static_cast<double>(m) / t <= cfg.gap_tol * std::max(1.0, std::abs(f))) {
      res.converged = true;
      break;
    }
    t *= cfg.t_factor;
  }
  res.value = obj.value(res.x);
  res.min_slack = m > 0 ? (b - A * res.x).minCoeff() : std::numeric_limits<double>::infinity();
  return res;
}

namespace detail {

struct LinearObjective {
  Eigen::VectorXd c;
  double value(const Eigen::VectorXd& x) const { return c.dot(x); }
  void derivatives(const Eigen::VectorXd&, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    g = c;
    h.setZero(c.size(), c.size());
  }
};

}  // namespace detail

/// Maximizes c^T x over A x <= b from a strictly feasible start (bounded feasible set assumed).
inline BarrierResult maximize_linear(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                     const Eigen::VectorXd& x0, const BarrierSettings& cfg = {}) {
  return maximize_concave(detail::LinearObjective{c}, A, b, x0, cfg);
}

/**
 * Chebyshev center of {A x <= b}, with the radius capped at `max_radius` to keep the
 * auxiliary LP bounded. `x_guess` need not be feasible. A nonpositive radius means the set
 * has no interior.
 */
inline InteriorPoint chebyshev_center(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                      const Eigen::VectorXd& x_guess, double max_radius,
                                      const BarrierSettings& cfg = {}) {
  const Eigen::Index n = A.cols(), m = A.rows();
  Eigen::MatrixXd Aa = Eigen::MatrixXd::Zero(m + 1, n + 1);
  Eigen::VectorXd ba(m + 1);
  Aa.topLeftCorner(m, n) = A;
  for (Eigen::Index i = 0; i < m; ++i) Aa(i, n) = A.row(i).norm();
  ba.head(m) = b;
  Aa(m, n) = 1.0;
  ba[m] = max_radius;

  Eigen::VectorXd z(n + 1);
  z.head(n) = x_guess;
  double r0 = max_radius;
  for (Eigen::Index i = 0; i < m; ++i)
    if (Aa(i, n) > 0.0) r0 = std::min(r0, (b[i] - A.row(i).dot(x_guess)) / Aa(i, n));
  z[n] = r0 - std::max(1.0, std::abs(r0));

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[n] = 1.0;
  const auto res = maximize_linear(c, Aa, ba, z, cfg);
  return {res.x.head(n), res.x[n]};
}

}  // namespace fdran
