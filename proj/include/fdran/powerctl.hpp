/**
 * \file fdran/powerctl.hpp
 *
 * \brief Uplink power control for a fixed association.
 *
 * `slmdb` maximizes the energy efficiency by successive lower-bound maximization: at each
 * anchor the rates are sandwiched between a concave lower bound and a convex upper bound
 * (first-order expansions of the two log terms), which turns the ratio into a
 * concave-convex fractional program solved by Dinkelbach's method. Each Dinkelbach step is a
 * smooth concave program over a polytope, handled by the barrier solver.
 *
 * FiPC, QoPC and EIPC are the cheap controllers used inside the matching loop.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fdran/barrier.hpp"
#include "fdran/common.hpp"
#include "fdran/netmodel.hpp"
#include "fdran/powermodel.hpp"

namespace fdran {

struct QosSpec {
  Eigen::VectorXd r_min_bps;
  Eigen::VectorXd gamma;
  double p_max_w = 0.1;
};

struct SolverSettings {
  double slm_tol = 1e-3;          // relative EE improvement that ends the outer loop
  double dinkelbach_tol = 1e-6;   // relative change of pi that ends Dinkelbach
  double inner_tol = 1e-8;        // barrier duality-gap proxy, relative
  int max_outer = 100;
  int max_dinkelbach = 50;
  int max_newton = 200;
  double barrier_t0 = 10.0;
  double barrier_factor = 50.0;
  double feasibility_tol = 1e-9;  // on normalized QoS residuals
  double qos_rate_tol = 1e-6;     // relative slack allowed when checking R_k >= R_min
  int stall_rounds = 3;

  void validate() const {
    require(slm_tol > 0 && dinkelbach_tol > 0 && inner_tol > 0 && feasibility_tol > 0 && qos_rate_tol >= 0,
            "solver: tolerances must be > 0");
    require(max_outer >= 1 && max_dinkelbach >= 1 && max_newton >= 1, "solver: iteration caps must be >= 1");
    require(barrier_t0 > 0 && barrier_factor > 1, "solver: barrier parameters out of range");
  }

  BarrierSettings barrier() const {
    BarrierSettings b;
    b.gap_tol = inner_tol;
    b.max_newton = max_newton;
    b.t0 = barrier_t0;
    b.t_factor = barrier_factor;
    return b;
  }
};

/// SINR thresholds equivalent to the minimum rates, 2^{R_min / (tau_u/tau_c B)} - 1.
inline Eigen::VectorXd gamma_thresholds(const Eigen::VectorXd& r_min, const FrameConfig& frame) {
  const double c = frame.rate_prefactor();
  Eigen::VectorXd g(r_min.size());
  for (Eigen::Index k = 0; k < r_min.size(); ++k) {
    require(r_min[k] >= 0.0, "qos: minimum rates must be >= 0");
    g[k] = std::expm1(r_min[k] / c * std::log(2.0));
  }
  return g;
}

inline QosSpec make_qos(const Eigen::VectorXd& r_min, const FrameConfig& frame, double p_max_w) {
  require(p_max_w > 0.0, "qos: p_max_w must be > 0");
  return {r_min, gamma_thresholds(r_min, frame), p_max_w};
}

/// r_k(P) = gamma_k (sum_k' P_k' E|IS_{k,k'}|^2 + sigma^2 E{NS_k}) - (1 + gamma_k) P_k |E{DS_k}|^2.
/// An unserved UE gets gamma_k, which is positive exactly when it has a rate requirement.
inline Eigen::VectorXd qos_residual(const Eigen::VectorXd& p, const EffectiveChannel& ch, const QosSpec& qos) {
  check_powers(p, ch.K);
  Eigen::VectorXd r(ch.K);
  for (int k = 0; k < ch.K; ++k) {
    if (!ch.served[k]) {
      r[k] = qos.gamma[k];
      continue;
    }
    r[k] = qos.gamma[k] * ch.total(p, k) - (1.0 + qos.gamma[k]) * p[k] * ch.desired_sq[k];
  }
  return r;
}

inline Eigen::VectorXd qos_residual(const Eigen::VectorXd& p, const Association& assoc, const CoefficientTensor& tensor,
                                    const FrameConfig& frame, const QosSpec& qos) {
  return qos_residual(p, effective_channel(assoc, tensor, frame), qos);
}

/// True when every UE reaches its minimum rate up to a relative tolerance.
inline bool qos_satisfied(const Eigen::VectorXd& rates, const QosSpec& qos, double rel_tol) {
  for (Eigen::Index k = 0; k < rates.size(); ++k)
    if (rates[k] < qos.r_min_bps[k] * (1.0 - rel_tol)) return false;
  return true;
}

/// Everything the controllers need for one association.
struct PowerProblem {
  EffectiveChannel ch;
  AffinePowerForm form;
  QosSpec qos;

  PowerProblem(EffectiveChannel c, AffinePowerForm f, QosSpec q)
      : ch(std::move(c)), form(std::move(f)), qos(std::move(q)) {
    require(qos.r_min_bps.size() == ch.K && qos.gamma.size() == ch.K, "power problem: QoS has wrong length");
    require(static_cast<int>(form.alpha_per_k.size()) == ch.K, "power problem: power form has wrong length");
  }

  double energy_efficiency(const Eigen::VectorXd& p) const {
    return fdran::energy_efficiency(p, uplink_rate(p, ch), form);
  }
};

/// Anchor of the first-order expansions, with the cached totals T_k and denominators D_k.
struct SurrogatePoint {
  Eigen::VectorXd p_anchor;
  Eigen::VectorXd total;        // T_k = sum_k' P_k' E|IS_{k,k'}|^2 + sigma^2 E{NS_k}
  Eigen::VectorXd denominator;  // D_k = T_k - P_k |E{DS_k}|^2

  static SurrogatePoint at(const Eigen::VectorXd& p, const EffectiveChannel& ch) {
    check_powers(p, ch.K);
    SurrogatePoint s{p, Eigen::VectorXd::Zero(ch.K), Eigen::VectorXd::Zero(ch.K)};
    for (int k = 0; k < ch.K; ++k) {
      if (!ch.served[k]) continue;
      s.total[k] = ch.total(p, k);
      s.denominator[k] = ch.interference_plus_noise(p, k);
      require(s.denominator[k] > 0.0, "surrogate: nonpositive interference-plus-noise");
    }
    return s;
  }
};

struct RateBounds {
  Eigen::VectorXd r_hat;  // convex upper bound
  Eigen::VectorXd r_bar;  // concave lower bound
};

/// Upper and lower rate bounds, both tight at the anchor.
inline RateBounds taylor_bounds(const Eigen::VectorXd& p, const SurrogatePoint& anchor, const EffectiveChannel& ch) {
  check_powers(p, ch.K);
  constexpr double ln2 = 0.69314718055994530942;
  RateBounds rb{Eigen::VectorXd::Zero(ch.K), Eigen::VectorXd::Zero(ch.K)};
  const Eigen::VectorXd dp = p - anchor.p_anchor;
  for (int k = 0; k < ch.K; ++k) {
    if (!ch.served[k]) continue;
    const double t = ch.total(p, k);
    const double d = ch.interference_plus_noise(p, k);
    const double dt = ch.interference.row(k).dot(dp);
    const double dd = dt - ch.desired_sq[k] * dp[k];
    const double f_hat = std::log2(anchor.total[k]) + dt / (anchor.total[k] * ln2);
    const double g_hat = std::log2(anchor.denominator[k]) + dd / (anchor.denominator[k] * ln2);
    rb.r_hat[k] = ch.prefactor * (f_hat - std::log2(d));
    rb.r_bar[k] = ch.prefactor * (std::log2(t) - g_hat);
  }
  return rb;
}

/// Surrogate ratio sum_k R_bar_k / P_N(P, R_hat).
inline double surrogate_ee(const Eigen::VectorXd& p, const SurrogatePoint& anchor, const PowerProblem& prob) {
  const auto rb = taylor_bounds(p, anchor, prob.ch);
  return rb.r_bar.sum() / prob.form.evaluate(p, rb.r_hat);
}

struct PowerDiagnostics {
  int outer_iterations = 0;
  int dinkelbach_iterations = 0;
  int newton_iterations = 0;
  std::vector<double> ee_trace;                // EE(P^(n)), starting at the initial power
  std::vector<std::vector<double>> pi_traces;  // one Dinkelbach pi sequence per outer step
  bool capped = false;
};

struct PowerSolution {
  Eigen::VectorXd p;
  double ee = 0.0;
  Eigen::VectorXd rates;
  bool feasible = false;
  PowerBreakdown breakdown;
  PowerDiagnostics diagnostics;
};

struct QopcResult {
  Eigen::VectorXd p;
  bool feasible = false;
  double max_residual = 0.0;  // optimal phase-I value on normalized residuals
};

namespace detail {

/// The problem restricted to served UEs, in normalized variables x = P / P_max.
struct Reduced {
  std::vector<int> idx;
  Eigen::MatrixXd inter;  // E|IS|^2 * P_max over served pairs
  Eigen::VectorXd ds;     // |E{DS}|^2 * P_max
  Eigen::VectorXd noise;
  Eigen::VectorXd gamma;
  Eigen::VectorXd alpha_w;  // alpha_k * c / R_ref
  Eigen::VectorXd delta;
  double p_max = 0.0;
  double prefactor = 0.0;
  bool unserved_with_demand = false;

  // Normalized QoS rows a_k x + b_k <= 0, over every served UE.
  Eigen::MatrixXd qa;
  Eigen::VectorXd qb;

  explicit Reduced(const PowerProblem& prob) {
    const auto& ch = prob.ch;
    for (int k = 0; k < ch.K; ++k) {
      if (ch.served[k]) idx.push_back(k);
      else if (prob.qos.gamma[k] > 0.0) unserved_with_demand = true;
    }
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    p_max = prob.qos.p_max_w;
    prefactor = ch.prefactor;
    inter.resize(n, n);
    ds.resize(n);
    noise.resize(n);
    gamma.resize(n);
    alpha_w.resize(n);
    delta.resize(n);
    qa.resize(n, n);
    qb.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = idx[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) inter(i, j) = ch.interference(k, idx[static_cast<std::size_t>(j)]) * p_max;
      ds[i] = ch.desired_sq[k] * p_max;
      noise[i] = ch.noise[k];
      gamma[i] = prob.qos.gamma[k];
      alpha_w[i] = prob.form.alpha_per_k[static_cast<std::size_t>(k)] * prefactor / prob.form.r_ref_bps;
      delta[i] = prob.form.delta_per_k[static_cast<std::size_t>(k)];
      Eigen::RowVectorXd row = gamma[i] * inter.row(i);
      row[i] -= (1.0 + gamma[i]) * ds[i];
      double b = gamma[i] * noise[i];
      const double scale = std::max(row.cwiseAbs().maxCoeff(), b);
      if (scale > 0.0) {
        row /= scale;
        b /= scale;
      }
      qa.row(i) = row;
      qb[i] = b;
    }
  }

  Eigen::Index n() const { return static_cast<Eigen::Index>(idx.size()); }

  Eigen::VectorXd to_x(const Eigen::VectorXd& p) const {
    Eigen::VectorXd x(n());
    for (Eigen::Index i = 0; i < n(); ++i) x[i] = p[idx[static_cast<std::size_t>(i)]] / p_max;
    return x;
  }
  Eigen::VectorXd to_p(const Eigen::VectorXd& x, int K) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
    for (Eigen::Index i = 0; i < n(); ++i) p[idx[static_cast<std::size_t>(i)]] = std::clamp(x[i], 0.0, 1.0) * p_max;
    return p;
  }

  /// Box rows plus QoS rows (UEs with gamma > 0 only), the latter relaxed by `relax`.
  void polytope(double relax, Eigen::MatrixXd& A, Eigen::VectorXd& b) const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n(); ++i)
      if (gamma[i] > 0.0) rows.push_back(i);
    const Eigen::Index m = 2 * n() + static_cast<Eigen::Index>(rows.size());
    A = Eigen::MatrixXd::Zero(m, n());
    b = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < n(); ++i) {
      A(i, i) = 1.0;
      b[i] = 1.0;
      A(n() + i, i) = -1.0;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      A.row(2 * n() + static_cast<Eigen::Index>(r)) = qa.row(rows[r]);
      b[2 * n() + static_cast<Eigen::Index>(r)] = -qb[rows[r]] + relax;
    }
  }
};

constexpr double kLn2 = 0.69314718055994530942;

/// Parametric objective divided by the rate prefactor:
/// sum_k (log2 T_k - g_hat_k) - pi~ (c0 + sum_k w_k (f_hat_k - log2 D_k) + sum_k delta_k P_max x_k).
struct ParametricObjective {
  const Reduced* red = nullptr;
  double pi_scaled = 0.0;
  double c0 = 0.0;
  Eigen::VectorXd x0, t0, d0;

  double value(const Eigen::VectorXd& x) const {
    const auto& r = *red;
    const Eigen::VectorXd dx = x - x0;
    double u = 0.0, pn = c0;
    for (Eigen::Index k = 0; k < r.n(); ++k) {
      const double t = r.inter.row(k).dot(x) + r.noise[k];
      const double d = t - r.ds[k] * x[k];
      if (!(t > 0.0) || !(d > 0.0)) return -std::numeric_limits<double>::infinity();
      const double dt = r.inter.row(k).dot(dx);
      const double dd = dt - r.ds[k] * dx[k];
      const double g_hat = std::log2(d0[k]) + dd / (d0[k] * kLn2);
      const double f_hat = std::log2(t0[k]) + dt / (t0[k] * kLn2);
      u += std::log2(t) - g_hat;
      pn += r.alpha_w[k] * (f_hat - std::log2(d)) + r.delta[k] * r.p_max * x[k];
    }
    return u - pi_scaled * pn;
  }

  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    const auto& r = *red;
    const Eigen::Index n = r.n();
    g.setZero(n);
    h.setZero(n, n);
    Eigen::VectorXd a(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::VectorXd irow = r.inter.row(k).transpose();
      a = irow;
      a[k] -= r.ds[k];
      const double t = irow.dot(x) + r.noise[k];
      const double d = t - r.ds[k] * x[k];
      // log2 T_k - g_hat_k
      g += irow / (t * kLn2) - a / (d0[k] * kLn2);
      h -= irow * irow.transpose() / (t * t * kLn2);
      // -pi~ w_k (f_hat_k - log2 D_k)
      const double w = pi_scaled * r.alpha_w[k];
      g -= w * (irow / (t0[k] * kLn2) - a / (d * kLn2));
      h -= w * a * a.transpose() / (d * d * kLn2);
      g[k] -= pi_scaled * r.delta[k] * r.p_max;
    }
  }
};

}  // namespace detail

/// Per-association solver state: the reduced problem and a cached interior point.
class PowerSolver {
 public:
  PowerSolver(const PowerProblem& prob, const SolverSettings& settings)
      : prob_(prob), settings_(settings), red_(prob) {
    settings_.validate();
    red_.polytope(relax(), A_, b_);
  }

  const PowerProblem& problem() const { return prob_; }
  const SolverSettings& settings() const { return settings_; }

  QopcResult qopc() const {
    const int K = prob_.ch.K;
    QopcResult out;
    out.p = Eigen::VectorXd::Zero(K);
    if (red_.unserved_with_demand) {
      out.feasible = false;
      out.max_residual = std::numeric_limits<double>::infinity();
      return out;
    }
    const Eigen::Index n = red_.n();
    if (n == 0) {
      out.feasible = true;
      return out;
    }
    // Phase I over (x, s): min s s.t. a_k x + b_k <= s, 0 <= x <= 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, n + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = 1.0;
      b[i] = 1.0;
      A(n + i, i) = -1.0;
      A.row(2 * n + i).head(n) = red_.qa.row(i);
      A(2 * n + i, n) = -1.0;
      b[2 * n + i] = -red_.qb[i];
    }
    Eigen::VectorXd z(n + 1);
    z.head(n).setConstant(0.5);
    z[n] = (red_.qa * z.head(n) + red_.qb).maxCoeff() + 1.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
    c[n] = -1.0;
    auto bs = settings_.barrier();
    bs.gap_tol = std::min(bs.gap_tol, 0.1 * settings_.feasibility_tol);
    const auto res = maximize_linear(c, A, b, z, bs);
    newton_ += res.newton_iterations;
    Eigen::VectorXd x = res.x.head(n).cwiseMax(0.0).cwiseMin(1.0);
    out.max_residual = (red_.qa * x + red_.qb).maxCoeff();
    out.feasible = out.max_residual <= settings_.feasibility_tol;
    if (out.feasible) {
      if (auto xm = minimal_power()) x = *xm;
    }
    out.p = red_.to_p(x, K);
    return out;
  }

  PowerSolution fixed(const Eigen::VectorXd& p) const {
    PowerSolution s;
    s.p = p;
    finish(s);
    return s;
  }

  /// Maximizer of U(P) = sum R_bar - pi P_N(P, R_hat) over the QoS polytope.
  Eigen::VectorXd solve_parametric(double pi, const SurrogatePoint& anchor) const {
    const Eigen::Index n = red_.n();
    if (n == 0) return Eigen::VectorXd::Zero(prob_.ch.K);
    detail::ParametricObjective obj;
    obj.red = &red_;
    obj.pi_scaled = pi / red_.prefactor;
    obj.c0 = prob_.form.c0_w;
    obj.x0 = red_.to_x(anchor.p_anchor);
    obj.t0.resize(n);
    obj.d0.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      obj.t0[i] = anchor.total[red_.idx[static_cast<std::size_t>(i)]];
      obj.d0[i] = anchor.denominator[red_.idx[static_cast<std::size_t>(i)]];
    }
    const auto res = maximize_concave(obj, A_, b_, start_point(obj.x0), settings_.barrier());
    newton_ += res.newton_iterations;
    return red_.to_p(res.x, prob_.ch.K);
  }

  struct DinkelbachResult {
    Eigen::VectorXd p;
    double pi = 0.0;
    std::vector<double> pi_trace;
    std::vector<double> f_trace;  // F(pi) at each solved parametric problem
    int iterations = 0;
    bool capped = false;
  };

  /// Dinkelbach iterations on the surrogate ratio at `anchor_p`, starting from its value there.
  DinkelbachResult dinkelbach(const Eigen::VectorXd& anchor_p) const {
    const auto anchor = SurrogatePoint::at(anchor_p, prob_.ch);
    DinkelbachResult out;
    out.p = anchor_p;
    out.pi = surrogate_ee(anchor_p, anchor, prob_);
    out.pi_trace.push_back(out.pi);
    int stall = 0;
    bool done = false;
    for (int it = 0; it < settings_.max_dinkelbach; ++it) {
      out.iterations = it + 1;
      const Eigen::VectorXd p = solve_parametric(out.pi, anchor);
      const auto rb = taylor_bounds(p, anchor, prob_.ch);
      const double num = rb.r_bar.sum();
      const double den = prob_.form.evaluate(p, rb.r_hat);
      out.f_trace.push_back(num - out.pi * den);
      const double ratio = num / den;
      if (!(ratio > out.pi)) {
        // F(pi) <= 0 up to the inner accuracy: pi is optimal.
        done = true;
        break;
      }
      const double prev = out.pi;
      out.p = p;
      out.pi = ratio;
      out.pi_trace.push_back(ratio);
      if (ratio - prev <= settings_.dinkelbach_tol * std::abs(ratio)) {
        done = true;
        break;
      }
      stall = (ratio - prev <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(ratio)) ? stall + 1 : 0;
      if (stall >= settings_.stall_rounds) {
        done = true;
        break;
      }
    }
    out.capped = !done;
    return out;
  }

  /// Successive lower-bound maximization from `p0`, or from the QoPC point when omitted.
  PowerSolution slmdb(std::optional<Eigen::VectorXd> p0 = std::nullopt) const {
    PowerSolution sol;
    if (!p0) {
      const auto q = qopc();
      if (!q.feasible) {
        sol.p = q.p;
        finish(sol);
        sol.feasible = false;
        return sol;
      }
      p0 = q.p;
    }
    check_powers(*p0, prob_.ch.K);
    Eigen::VectorXd p = *p0;
    for (int k = 0; k < prob_.ch.K; ++k)
      if (!prob_.ch.served[k]) p[k] = 0.0;
    double ee = prob_.energy_efficiency(p);
    auto& diag = sol.diagnostics;
    diag.ee_trace.push_back(ee);
    int stall = 0;
    bool done = false;
    for (int n = 0; n < settings_.max_outer; ++n) {
      diag.outer_iterations = n + 1;
      const auto dk = dinkelbach(p);
      diag.dinkelbach_iterations += dk.iterations;
      diag.pi_traces.push_back(dk.pi_trace);
      diag.capped = diag.capped || dk.capped;
      const double next = prob_.energy_efficiency(dk.p);
      if (!(next >= ee)) {
        // Only possible through inner inaccuracy; keep the better point.
        done = true;
        break;
      }
      const double gain = ee > 0.0 ? (next - ee) / ee : (next > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      p = dk.p;
      ee = next;
      diag.ee_trace.push_back(ee);
      if (gain <= settings_.slm_tol) {
        done = true;
        break;
      }
      stall = gain <= 4.0 * std::numeric_limits<double>::epsilon() ? stall + 1 : 0;
      if (stall >= settings_.stall_rounds) {
        done = true;
        break;
      }
    }
    diag.capped = diag.capped || !done;
    diag.newton_iterations = newton_;
    sol.p = p;
    finish(sol);
    return sol;
  }

  int newton_iterations() const { return newton_; }

 private:
  double relax() const { return 10.0 * settings_.feasibility_tol; }

  /// Componentwise-minimal power meeting every QoS constraint with equality.
  std::optional<Eigen::VectorXd> minimal_power() const {
    const Eigen::Index n = red_.n();
    std::vector<Eigen::Index> g;
    for (Eigen::Index i = 0; i < n; ++i)
      if (red_.gamma[i] > 0.0) g.push_back(i);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (g.empty()) return x;
    const Eigen::Index m = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) A(i, j) = -red_.gamma[g[i]] * red_.inter(g[i], g[j]);
      A(i, i) += (1.0 + red_.gamma[g[i]]) * red_.ds[g[i]];
      rhs[i] = red_.gamma[g[i]] * red_.noise[g[i]];
    }
    const Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
    if (!sol.allFinite()) return std::nullopt;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sol[i] < -1e-12 || sol[i] > 1.0 + 1e-9) return std::nullopt;
      x[g[i]] = std::clamp(sol[i], 0.0, 1.0);
    }
    return x;
  }

  Eigen::VectorXd start_point(const Eigen::VectorXd& x_anchor) const {
    const double margin = 1e-12;
    if ((b_ - A_ * x_anchor).minCoeff() > margin) return x_anchor;
    const Eigen::VectorXd& c = center();
    for (double w : {0.01, 0.1, 0.5, 1.0}) {
      const Eigen::VectorXd x = (1.0 - w) * x_anchor + w * c;
      if ((b_ - A_ * x).minCoeff() > margin) return x;
    }
    throw Error("power control: QoS polytope has no interior");
  }

  const Eigen::VectorXd& center() const {
    if (!center_) {
      const auto ip = chebyshev_center(A_, b_, Eigen::VectorXd::Constant(red_.n(), 0.5), 1.0, settings_.barrier());
      require(ip.radius > 0.0, "power control: QoS polytope has no interior");
      center_ = ip.x;
    }
    return *center_;
  }

  void finish(PowerSolution& s) const {
    s.rates = uplink_rate(s.p, prob_.ch);
    s.breakdown = network_power(s.p, s.rates, prob_.form);
    s.ee = s.rates.sum() / s.breakdown.total_w;
    s.feasible = qos_satisfied(s.rates, prob_.qos, settings_.qos_rate_tol);
  }

  const PowerProblem& prob_;
  SolverSettings settings_;
  detail::Reduced red_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  mutable std::optional<Eigen::VectorXd> center_;
  mutable int newton_ = 0;
};

inline PowerSolution slmdb(const PowerProblem& prob, const SolverSettings& settings,
                           std::optional<Eigen::VectorXd> p0 = std::nullopt) {
  return PowerSolver(prob, settings).slmdb(std::move(p0));
}

inline QopcResult qopc(const PowerProblem& prob, const SolverSettings& settings) {
  return PowerSolver(prob, settings).qopc();
}

/// Every UE at full power.
inline Eigen::VectorXd fipc(int K, const QosSpec& qos) { return Eigen::VectorXd::Constant(K, qos.p_max_w); }

/// Channel inversion on statistical gains: P_k = min_j ||beta_j||^2 / ||beta_k||^2 * P_max, where
/// beta_k collects trace(R_{m,k}) over the serving UBSs. Unserved UEs get zero power.
inline Eigen::VectorXd eipc(const Association& assoc, const CorrelationSet& corr, const QosSpec& qos) {
  require(assoc.M() == corr.M && assoc.K() == corr.K, "eipc: dimension mismatch");
  const int K = corr.K;
  Eigen::VectorXd gain = Eigen::VectorXd::Zero(K);
  double min_gain = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    for (int m : assoc.serving(k)) {
      const double tr = corr.at(m, k).trace().real();
      gain[k] += tr * tr;
    }
    if (gain[k] > 0.0) min_gain = std::min(min_gain, gain[k]);
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k)
    if (gain[k] > 0.0) p[k] = min_gain / gain[k] * qos.p_max_w;
  return p;
}

}  // namespace fdran
