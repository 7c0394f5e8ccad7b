/**
 * \file fdran/matching.hpp
 *
 * \brief UE association and UBS sleeping: TriMSM swap matching, baseline rules and an
 * exhaustive-search oracle.
 *
 * Every UE and UBS shares one preference over matchings: first a smaller total QoS shortfall,
 * then a strictly larger network energy efficiency. With shared preferences a swap is
 * blocking exactly when the swapped matching is lexicographically better, which keeps the
 * stability test a single comparison.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdran/common.hpp"
#include "fdran/netmodel.hpp"
#include "fdran/powerctl.hpp"
#include "fdran/powermodel.hpp"

namespace fdran {

enum class PowerMode { slmdb, fipc, qopc, eipc };

inline std::string to_string(PowerMode m) {
  switch (m) {
    case PowerMode::slmdb: return "slmdb";
    case PowerMode::fipc: return "fipc";
    case PowerMode::qopc: return "qopc";
    case PowerMode::eipc: return "eipc";
  }
  return "?";
}

inline PowerMode parse_power_mode(const std::string& s) {
  if (s == "slmdb") return PowerMode::slmdb;
  if (s == "fipc") return PowerMode::fipc;
  if (s == "qopc") return PowerMode::qopc;
  if (s == "eipc") return PowerMode::eipc;
  throw Error("unknown power mode '" + s + "'");
}

/// One drop with all precomputed statistics.
struct ProblemContext {
  ScenarioParams scenario;
  FrameConfig frame;
  Topology topology;
  CorrelationSet corr;
  CoefficientTensor tensor;
  PowerConfig power;
  QosSpec qos;
  SolverSettings solver;

  int M() const { return corr.M; }
  int K() const { return corr.K; }
  int L() const { return scenario.L; }
  int N() const { return scenario.N; }
};

/// Builds a drop from scenario parameters; the per-UE minimum rate is shared by all UEs.
inline ProblemContext make_context(const ScenarioParams& scenario, const FrameConfig& frame, const PowerConfig& power,
                                   double r_min_bps, double p_max_w, const SolverSettings& solver) {
  ProblemContext ctx;
  ctx.scenario = scenario;
  ctx.frame = frame;
  ctx.topology = generate_topology(scenario);
  ctx.corr = build_correlation(ctx.topology, frame);
  ctx.tensor = mmse_statistics(ctx.corr, frame);
  ctx.power = power;
  ctx.qos = make_qos(Eigen::VectorXd::Constant(scenario.K, r_min_bps), frame, p_max_w);
  ctx.solver = solver;
  return ctx;
}

/// Builds a context around given statistics (the scenario supplies M, K, L and N only).
inline ProblemContext make_context(const ScenarioParams& scenario, const FrameConfig& frame, CorrelationSet corr,
                                   CoefficientTensor tensor, const PowerConfig& power, const QosSpec& qos,
                                   const SolverSettings& solver) {
  require(corr.M == scenario.M && corr.K == scenario.K, "context: statistics do not match the scenario");
  require(tensor.M == scenario.M && tensor.K == scenario.K, "context: tensor does not match the scenario");
  ProblemContext ctx;
  ctx.scenario = scenario;
  ctx.frame = frame;
  ctx.corr = std::move(corr);
  ctx.tensor = std::move(tensor);
  ctx.power = power;
  ctx.qos = qos;
  ctx.solver = solver;
  return ctx;
}

struct Matching {
  Association assoc;
  int L = 1;
  int N = 1;

  Matching() = default;
  Matching(Association a, int l, int n) : assoc(std::move(a)), L(l), N(n) {}

  bool valid() const { return assoc.within_caps(L, N); }
  friend bool operator==(const Matching& a, const Matching& b) { return a.assoc == b.assoc; }
};

inline Matching empty_matching(const ProblemContext& ctx) {
  return Matching(Association(ctx.M(), ctx.K()), ctx.L(), ctx.N());
}

/// NONE slot in a move.
inline constexpr int kNone = -1;

enum class MoveKind { exchange, add, remove, replace };

inline std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::exchange: return "exchange";
    case MoveKind::add: return "add";
    case MoveKind::remove: return "remove";
    case MoveKind::replace: return "replace";
  }
  return "?";
}

/**
 * UE i gives up bs_m and takes bs_n; UE j (if any) does the opposite.
 *
 * exchange: both UEs concrete, m in S(i), n in S(j).
 * replace:  j = NONE, m in S(i), n a UBS outside S(i).
 * remove:   j = NONE, n = NONE.
 * add:      j = NONE, m = NONE.
 */
struct SwapMove {
  int ue_i = kNone;
  int ue_j = kNone;
  int bs_m = kNone;
  int bs_n = kNone;
  MoveKind kind = MoveKind::exchange;

  friend bool operator==(const SwapMove&, const SwapMove&) = default;
};

/// True when the move leaves the matching unchanged (a UBS swapped with itself).
inline bool is_identity(const SwapMove& mv) {
  return (mv.bs_m != kNone && mv.bs_m == mv.bs_n) || (mv.ue_j != kNone && mv.ue_i == mv.ue_j);
}

/// Structural check against the current matching, including the capacity caps afterwards.
inline bool move_valid(const Matching& mt, const SwapMove& mv) {
  const auto& a = mt.assoc;
  const int M = a.M(), K = a.K();
  auto ue_ok = [K](int k) { return k >= 0 && k < K; };
  auto bs_ok = [M](int m) { return m >= 0 && m < M; };
  if (!ue_ok(mv.ue_i) || is_identity(mv)) return false;
  const int i = mv.ue_i, m = mv.bs_m, n = mv.bs_n;
  switch (mv.kind) {
    case MoveKind::exchange:
      return ue_ok(mv.ue_j) && bs_ok(m) && bs_ok(n) && a(m, i) && a(n, mv.ue_j) && !a(n, i) && !a(m, mv.ue_j);
    case MoveKind::replace:
      return mv.ue_j == kNone && bs_ok(m) && bs_ok(n) && a(m, i) && !a(n, i) && a.ubs_degree(n) < mt.N;
    case MoveKind::remove:
      return mv.ue_j == kNone && bs_ok(m) && n == kNone && a(m, i);
    case MoveKind::add:
      return mv.ue_j == kNone && m == kNone && bs_ok(n) && !a(n, i) && a.ubs_degree(n) < mt.N &&
             a.ue_degree(i) < mt.L;
  }
  return false;
}

/// The swapped matching; rejects structurally invalid moves.
inline Matching apply_move(const Matching& mt, const SwapMove& mv) {
  require(move_valid(mt, mv), "swap move is structurally invalid");
  Matching out = mt;
  auto& a = out.assoc;
  if (mv.bs_m != kNone) a.set(mv.bs_m, mv.ue_i, false);
  if (mv.bs_n != kNone) a.set(mv.bs_n, mv.ue_i, true);
  if (mv.ue_j != kNone) {
    a.set(mv.bs_n, mv.ue_j, false);
    a.set(mv.bs_m, mv.ue_j, true);
  }
  return out;
}

/// Candidate moves for UE i against partner j (kNone for the single-UE moves), in sweep order.
inline std::vector<SwapMove> candidate_moves(const Matching& mt, int i, int j) {
  const auto& a = mt.assoc;
  std::vector<SwapMove> out;
  std::vector<int> own = a.serving(i);
  if (j != kNone) {
    for (int m : own)
      for (int n : a.serving(j)) {
        SwapMove mv{i, j, m, n, MoveKind::exchange};
        if (move_valid(mt, mv)) out.push_back(mv);
      }
    return out;
  }
  std::vector<int> slots_m = own;
  slots_m.push_back(kNone);
  for (int m : slots_m) {
    for (int n = 0; n <= a.M(); ++n) {
      const int bn = n == a.M() ? kNone : n;
      if (m == kNone && bn == kNone) continue;
      SwapMove mv{i, kNone, m, bn, MoveKind::replace};
      if (m == kNone) mv.kind = MoveKind::add;
      else if (bn == kNone) mv.kind = MoveKind::remove;
      if (move_valid(mt, mv)) out.push_back(mv);
    }
  }
  return out;
}

/// Every candidate move of a matching, in the deterministic sweep order.
inline std::vector<SwapMove> all_moves(const Matching& mt) {
  std::vector<SwapMove> out;
  const int K = mt.assoc.K();
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      auto v = candidate_moves(mt, i, j);
      out.insert(out.end(), v.begin(), v.end());
    }
    auto v = candidate_moves(mt, i, kNone);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

struct Evaluation {
  double ee = 0.0;
  bool qos_ok = false;
  double shortfall = 0.0;  // sum_k max(0, R_min,k (1 - tol) - R_k), bit/s
  PowerSolution power;
};

/// Strict lexicographic preference: smaller shortfall, then larger EE.
inline bool preferred(const Evaluation& a, const Evaluation& b) {
  if (a.shortfall != b.shortfall) return a.shortfall < b.shortfall;
  return a.ee > b.ee;
}

/// Power control plus EE evaluation, cached exactly by (mode, matching).
class Evaluator {
 public:
  explicit Evaluator(const ProblemContext& ctx) : ctx_(ctx) {}

  const Evaluation& evaluate(const Association& assoc, PowerMode mode) {
    auto key = std::make_pair(static_cast<int>(mode), assoc.fingerprint());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ++solves_;
    return cache_.emplace(std::move(key), compute(assoc, mode)).first->second;
  }

  std::size_t solves() const { return solves_; }
  const ProblemContext& context() const { return ctx_; }

 private:
  Evaluation compute(const Association& assoc, PowerMode mode) const {
    PowerProblem prob(effective_channel(assoc, ctx_.tensor, ctx_.frame), build_affine_form(assoc, ctx_.power), ctx_.qos);
    PowerSolver solver(prob, ctx_.solver);
    Evaluation ev;
    bool controller_ok = true;
    switch (mode) {
      case PowerMode::slmdb:
        ev.power = solver.slmdb();
        break;
      case PowerMode::fipc: {
        Eigen::VectorXd p = fipc(ctx_.K(), ctx_.qos);
        for (int k = 0; k < ctx_.K(); ++k)
          if (!prob.ch.served[k]) p[k] = 0.0;
        ev.power = solver.fixed(p);
        break;
      }
      case PowerMode::qopc: {
        const auto q = solver.qopc();
        controller_ok = q.feasible;
        ev.power = solver.fixed(q.p);
        break;
      }
      case PowerMode::eipc:
        ev.power = solver.fixed(eipc(assoc, ctx_.corr, ctx_.qos));
        break;
    }
    const double tol = ctx_.solver.qos_rate_tol;
    for (int k = 0; k < ctx_.K(); ++k)
      ev.shortfall += std::max(0.0, ctx_.qos.r_min_bps[k] * (1.0 - tol) - ev.power.rates[k]);
    ev.qos_ok = controller_ok && ev.power.feasible && ev.shortfall == 0.0;
    ev.power.feasible = ev.qos_ok;
    ev.ee = ev.power.ee;
    return ev;
  }

  const ProblemContext& ctx_;
  std::map<std::pair<int, std::string>, Evaluation> cache_;
  std::size_t solves_ = 0;
};

inline Evaluation evaluate(const Matching& mt, PowerMode mode, const ProblemContext& ctx) {
  Evaluator ev(ctx);
  return ev.evaluate(mt.assoc, mode);
}

struct PreferenceOutcome {
  double ee_before = 0.0;
  double ee_after = 0.0;
  bool qos_ok_before = false;
  bool qos_ok_after = false;
  bool approved = false;
};

/// Extra admissibility rule layered on top of the preference (used by the no-sleeping variant).
enum class SleepPolicy { allow, keep_all_active };

inline bool admissible(const Matching& after, SleepPolicy policy) {
  if (policy == SleepPolicy::allow) return true;
  return after.assoc.active_count() == after.assoc.M();
}

inline PreferenceOutcome is_swap_blocking(const Matching& mt, const SwapMove& mv, PowerMode mode, Evaluator& ev,
                                          SleepPolicy policy = SleepPolicy::allow) {
  const Evaluation before = ev.evaluate(mt.assoc, mode);
  PreferenceOutcome out;
  out.ee_before = before.ee;
  out.qos_ok_before = before.qos_ok;
  if (is_identity(mv)) {
    out.ee_after = before.ee;
    out.qos_ok_after = before.qos_ok;
    return out;
  }
  const Matching after = apply_move(mt, mv);
  if (!after.valid() || !admissible(after, policy)) {
    out.ee_after = before.ee;
    out.qos_ok_after = before.qos_ok;
    return out;
  }
  const Evaluation& a = ev.evaluate(after.assoc, mode);
  out.ee_after = a.ee;
  out.qos_ok_after = a.qos_ok;
  out.approved = preferred(a, before);
  return out;
}

/// True when no candidate move is swap-blocking.
inline bool verify_stability(const Matching& mt, PowerMode mode, Evaluator& ev,
                             SleepPolicy policy = SleepPolicy::allow) {
  for (const auto& mv : all_moves(mt))
    if (is_swap_blocking(mt, mv, mode, ev, policy).approved) return false;
  return true;
}

struct MatchingSettings {
  double recp_delta = 95.0;  // percent
  int max_sweeps = 1000;
};

struct SolutionReport {
  Matching matching;
  PowerSolution power;
  double ee = 0.0;
  int swap_count = 0;
  int sweeps = 0;
  std::size_t evaluation_count = 0;
  int candidates = 0;  // matchings enumerated by the exhaustive search
  bool stable = false;
  bool infeasible = true;
  double init_ee = 0.0;        // initial matching under SLMDB
  bool init_feasible = false;
  std::vector<SwapMove> applied;
};

namespace detail {

/// UBS indices by descending gain for UE k, ties by lower index.
inline std::vector<int> ranked_ubs(const CorrelationSet& corr, int k) {
  std::vector<int> order(static_cast<std::size_t>(corr.M));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return corr.beta(a, k) > corr.beta(b, k); });
  return order;
}

}  // namespace detail

/// Per UE in index order: strongest available UBSs until their cumulative gain reaches
/// delta percent of the UE's total gain, at most L of them. Full UBSs are skipped.
inline Matching recp_init(const CorrelationSet& corr, int L, int N, double delta_percent) {
  require(delta_percent > 0.0 && delta_percent <= 100.0, "recp: delta must lie in (0, 100]");
  Matching mt(Association(corr.M, corr.K), L, N);
  for (int k = 0; k < corr.K; ++k) {
    const double target = delta_percent / 100.0 * corr.beta.col(k).sum() * (1.0 - 1e-12);
    double acc = 0.0;
    int taken = 0;
    for (int m : detail::ranked_ubs(corr, k)) {
      if (acc >= target || taken >= L) break;
      if (mt.assoc.ubs_degree(m) >= N) continue;
      mt.assoc.set(m, k, true);
      acc += corr.beta(m, k);
      ++taken;
    }
  }
  return mt;
}

/// Each UE takes its single strongest available UBS.
inline Matching llsf_assoc(const CorrelationSet& corr, int L, int N) {
  Matching mt(Association(corr.M, corr.K), L, N);
  for (int k = 0; k < corr.K; ++k)
    for (int m : detail::ranked_ubs(corr, k))
      if (mt.assoc.ubs_degree(m) < N) {
        mt.assoc.set(m, k, true);
        break;
      }
  return mt;
}

/// Each UE takes the available UBSs with gain >= 30% of its largest gain, strongest L of them.
inline Matching tsap_assoc(const CorrelationSet& corr, int L, int N, double threshold = 0.3) {
  Matching mt(Association(corr.M, corr.K), L, N);
  for (int k = 0; k < corr.K; ++k) {
    const double floor = threshold * corr.beta.col(k).maxCoeff();
    int taken = 0;
    for (int m : detail::ranked_ubs(corr, k)) {
      if (taken >= L || corr.beta(m, k) < floor) break;
      if (mt.assoc.ubs_degree(m) >= N) continue;
      mt.assoc.set(m, k, true);
      ++taken;
    }
  }
  return mt;
}

namespace detail {

inline SolutionReport finalize(const Matching& mt, PowerMode mode, Evaluator& ev, SolutionReport rep,
                               SleepPolicy policy) {
  rep.matching = mt;
  rep.stable = rep.stable && verify_stability(mt, mode, ev, policy);
  const Evaluation& fin = ev.evaluate(mt.assoc, PowerMode::slmdb);
  rep.power = fin.power;
  rep.ee = fin.ee;
  rep.infeasible = !fin.qos_ok;
  rep.evaluation_count = ev.solves();
  return rep;
}

}  // namespace detail

/// Swap matching from `init`: sweeps over all candidate moves, applying each approved move
/// immediately, until a full sweep approves nothing. Non-SLMDB modes get a final SLMDB pass.
inline SolutionReport swap_matching(const Matching& init, PowerMode mode, Evaluator& ev, const MatchingSettings& cfg,
                                    SleepPolicy policy = SleepPolicy::allow) {
  require(init.valid(), "matching: initial matching violates the caps");
  SolutionReport rep;
  const Evaluation& start = ev.evaluate(init.assoc, PowerMode::slmdb);
  rep.init_ee = start.ee;
  rep.init_feasible = start.qos_ok;
  Matching mt = init;
  const int K = mt.assoc.K();
  bool converged = false;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    rep.sweeps = sweep + 1;
    bool any = false;
    for (int i = 0; i < K; ++i) {
      for (int j = i + 1; j <= K; ++j) {
        const int partner = j == K ? kNone : j;
        for (const auto& mv : candidate_moves(mt, i, partner)) {
          if (!is_swap_blocking(mt, mv, mode, ev, policy).approved) continue;
          mt = apply_move(mt, mv);
          require(mt.valid(), "matching: caps violated after a move");
          rep.applied.push_back(mv);
          ++rep.swap_count;
          any = true;
          break;  // next pair
        }
      }
    }
    if (!any) {
      converged = true;
      break;
    }
  }
  rep.stable = converged;
  return detail::finalize(mt, mode, ev, std::move(rep), policy);
}

inline SolutionReport trimsm(const ProblemContext& ctx, PowerMode mode, const MatchingSettings& cfg = {}) {
  Evaluator ev(ctx);
  return swap_matching(recp_init(ctx.corr, ctx.L(), ctx.N(), cfg.recp_delta), mode, ev, cfg);
}

/// Evaluates a fixed association with SLMDB power control (no swapping).
inline SolutionReport evaluate_fixed(const ProblemContext& ctx, const Matching& mt) {
  Evaluator ev(ctx);
  SolutionReport rep;
  rep.matching = mt;
  const Evaluation& e = ev.evaluate(mt.assoc, PowerMode::slmdb);
  rep.power = e.power;
  rep.ee = e.ee;
  rep.infeasible = !e.qos_ok;
  rep.init_ee = e.ee;
  rep.init_feasible = e.qos_ok;
  rep.evaluation_count = ev.solves();
  return rep;
}

/// RECP start extended so that every UBS serves at least one UE: each idle UBS, in index
/// order, takes the strongest UE that still has room. Returns nullopt when M > K L.
inline std::optional<Matching> covering_init(const CorrelationSet& corr, int L, int N, double delta_percent) {
  if (corr.M > corr.K * L) return std::nullopt;
  Matching mt = recp_init(corr, L, N, delta_percent);
  for (int m = 0; m < corr.M; ++m) {
    if (mt.assoc.active(m)) continue;
    int best = kNone;
    for (int k = 0; k < corr.K; ++k)
      if (mt.assoc.ue_degree(k) < L && (best == kNone || corr.beta(m, k) > corr.beta(m, best))) best = k;
    if (best == kNone) {
      // Every UE is full: take a link from a UE whose other UBSs stay active without it.
      for (int k = 0; k < corr.K && best == kNone; ++k)
        for (int mo : mt.assoc.serving(k))
          if (mt.assoc.ubs_degree(mo) >= 2) {
            mt.assoc.set(mo, k, false);
            best = k;
            break;
          }
      if (best == kNone) return std::nullopt;
    }
    mt.assoc.set(m, best, true);
  }
  if (!mt.valid()) return std::nullopt;
  return mt;
}

/// TriMSM with every UBS kept active.
inline SolutionReport nos_assoc(const ProblemContext& ctx, PowerMode mode, const MatchingSettings& cfg = {}) {
  const auto init = covering_init(ctx.corr, ctx.L(), ctx.N(), cfg.recp_delta);
  if (!init) {
    SolutionReport rep;
    rep.matching = recp_init(ctx.corr, ctx.L(), ctx.N(), cfg.recp_delta);
    rep.infeasible = true;
    rep.stable = false;
    return rep;
  }
  Evaluator ev(ctx);
  return swap_matching(*init, mode, ev, cfg, SleepPolicy::keep_all_active);
}

/// Size guard of the exhaustive search.
inline constexpr int kExhaustiveMaxLinks = 16;

/// Best feasible association over every S within the caps, each evaluated with SLMDB. Ties go
/// to fewer active UBSs, then the lexicographically smaller matrix. Without any feasible
/// association the least-shortfall one is reported as infeasible.
inline SolutionReport exhaustive_search(const ProblemContext& ctx) {
  const int M = ctx.M(), K = ctx.K();
  require(M * K <= kExhaustiveMaxLinks,
          "exhaustive search needs M*K <= " + std::to_string(kExhaustiveMaxLinks));
  Evaluator ev(ctx);
  std::optional<Matching> best;
  Evaluation best_ev;
  const std::uint32_t total = 1u << (M * K);
  int candidates = 0;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    Matching mt(Association(M, K), ctx.L(), ctx.N());
    for (int b = 0; b < M * K; ++b)
      if (mask >> b & 1u) mt.assoc.set(b / K, b % K, true);
    if (!mt.valid()) continue;
    ++candidates;
    const Evaluation& e = ev.evaluate(mt.assoc, PowerMode::slmdb);
    bool take = !best;
    if (!take) {
      if (e.qos_ok != best_ev.qos_ok) take = e.qos_ok;
      else if (!e.qos_ok) take = preferred(e, best_ev);
      else if (e.ee != best_ev.ee) take = e.ee > best_ev.ee;
      else if (mt.assoc.active_count() != best->assoc.active_count())
        take = mt.assoc.active_count() < best->assoc.active_count();
      else take = mt.assoc.fingerprint() < best->assoc.fingerprint();
    }
    if (take) {
      best = mt;
      best_ev = e;
    }
  }
  SolutionReport rep;
  rep.matching = *best;
  rep.power = best_ev.power;
  rep.ee = best_ev.ee;
  rep.infeasible = !best_ev.qos_ok;
  rep.stable = true;
  rep.candidates = candidates;
  rep.evaluation_count = ev.solves();
  rep.init_ee = rep.ee;
  rep.init_feasible = !rep.infeasible;
  return rep;
}

}  // namespace fdran
