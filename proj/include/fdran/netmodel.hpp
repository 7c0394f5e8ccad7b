/**
 * \file fdran/netmodel.hpp
 *
 * \brief Network drops, channel statistics and uplink rates.
 *
 * Channels are correlated Rayleigh, h_{m,k} ~ CN(0, R_{m,k}), estimated by MMSE from
 * orthogonal pilots and combined by normalized maximum-ratio combining. Every quantity the
 * optimizer needs is an ergodic expectation, so the per-link statistics are reduced once to a
 * CoefficientTensor and everything downstream works from that tensor.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "fdran/common.hpp"

namespace fdran {

struct ScenarioParams {
  int M = 16;  // UBSs
  int K = 5;   // UEs
  int N = 5;   // antennas per UBS, also the per-UBS association cap
  int L = 3;   // max UBSs per UE
  double area_side = 500.0;
  double pathloss_intercept_db = 30.5;
  double pathloss_exponent = 3.67;
  double shadowing_std_db = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    require(M >= 1, "scenario: M must be >= 1");
    require(K >= 1, "scenario: K must be >= 1");
    require(N >= 1, "scenario: N must be >= 1");
    require(L >= 1 && L <= M, "scenario: L must satisfy 1 <= L <= M");
    require(area_side > 0.0, "scenario: area_side must be positive");
    require(shadowing_std_db >= 0.0, "scenario: shadowing_std_db must be >= 0");
  }
};

struct FrameConfig {
  int tau_c = 190;
  int tau_p = 10;
  double bandwidth_hz = 20e6;
  double noise_power_w = dbm_to_watts(-94.0);
  double pilot_power_w = 0.1;

  int tau_u() const { return tau_c - tau_p; }
  /// Pre-log factor of the use-and-then-forget rate, tau_u / tau_c * B.
  double rate_prefactor() const {
    return static_cast<double>(tau_u()) / static_cast<double>(tau_c) * bandwidth_hz;
  }

  void validate() const {
    require(tau_p > 0 && tau_p < tau_c, "frame: need 0 < tau_p < tau_c");
    require(bandwidth_hz > 0.0, "frame: bandwidth_hz must be positive");
    require(noise_power_w > 0.0, "frame: noise_power_w must be positive");
    require(pilot_power_w >= 0.0, "frame: pilot_power_w must be >= 0");
  }
};

struct Topology {
  std::vector<Point> ubs_positions;
  std::vector<Point> ue_positions;
  ScenarioParams params;
};

/// Per-link spatial correlation. R is stored row-major over (m, k).
struct CorrelationSet {
  int M = 0;
  int K = 0;
  int N = 0;
  std::vector<Eigen::MatrixXcd> R;
  Eigen::MatrixXd beta;  // M x K, trace(R)/N

  const Eigen::MatrixXcd& at(int m, int k) const { return R[static_cast<std::size_t>(m * K + k)]; }
  Eigen::MatrixXcd& at(int m, int k) { return R[static_cast<std::size_t>(m * K + k)]; }

  /// Builds a set from explicit matrices; beta is derived.
  static CorrelationSet from_matrices(int M, int K, std::vector<Eigen::MatrixXcd> mats) {
    require(M >= 1 && K >= 1, "correlation: empty set");
    require(mats.size() == static_cast<std::size_t>(M * K), "correlation: expected M*K matrices");
    CorrelationSet c;
    c.M = M;
    c.K = K;
    c.N = static_cast<int>(mats.front().rows());
    c.R = std::move(mats);
    c.beta.resize(M, K);
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < K; ++k) {
        const auto& r = c.at(m, k);
        require(r.rows() == c.N && r.cols() == c.N, "correlation: inconsistent matrix size");
        c.beta(m, k) = r.trace().real() / c.N;
      }
    return c;
  }
};

/// Ergodic expectations of the normalized MR combiner.
struct CoefficientTensor {
  int M = 0;
  int K = 0;
  Eigen::MatrixXd mu;           // E{v_{m,k}^H h_{m,k}}
  std::vector<double> omega_;   // E{|v_{m,k}^H h_{m,k'}|^2}, indexed (m, k, k')
  Eigen::MatrixXd noise_coeff;  // E{||v_{m,k}||^2}

  CoefficientTensor() = default;
  CoefficientTensor(int m, int k)
      : M(m), K(k), mu(Eigen::MatrixXd::Zero(m, k)),
        omega_(static_cast<std::size_t>(m) * k * k, 0.0),
        noise_coeff(Eigen::MatrixXd::Ones(m, k)) {}

  double omega(int m, int k, int kp) const {
    return omega_[(static_cast<std::size_t>(m) * K + k) * K + kp];
  }
  double& omega(int m, int k, int kp) { return omega_[(static_cast<std::size_t>(m) * K + k) * K + kp]; }
};

struct MonteCarloTensor {
  CoefficientTensor estimate;
  CoefficientTensor std_error;     // noise_coeff holds the standard error of E{||v||^2}
  Eigen::MatrixXd mu_imag;         // imaginary part of the sample mean of v^H h
  Eigen::MatrixXd mu_imag_std_error;
  std::size_t samples = 0;
};

/// Binary M x K association S; the activity vector A is derived (A_m = max_k S_{m,k}).
class Association {
 public:
  Association() = default;
  Association(int M, int K) : M_(M), K_(K), s_(static_cast<std::size_t>(M) * K, 0) {}

  int M() const { return M_; }
  int K() const { return K_; }

  bool operator()(int m, int k) const { return s_[idx(m, k)] != 0; }
  void set(int m, int k, bool v) { s_[idx(m, k)] = v ? 1 : 0; }

  bool active(int m) const {
    for (int k = 0; k < K_; ++k)
      if ((*this)(m, k)) return true;
    return false;
  }
  std::vector<int> activity() const {
    std::vector<int> a(static_cast<std::size_t>(M_));
    for (int m = 0; m < M_; ++m) a[m] = active(m) ? 1 : 0;
    return a;
  }
  int active_count() const {
    int n = 0;
    for (int m = 0; m < M_; ++m) n += active(m) ? 1 : 0;
    return n;
  }
  /// Serving set M_k, ascending UBS index.
  std::vector<int> serving(int k) const {
    std::vector<int> out;
    for (int m = 0; m < M_; ++m)
      if ((*this)(m, k)) out.push_back(m);
    return out;
  }
  int ue_degree(int k) const {
    int n = 0;
    for (int m = 0; m < M_; ++m) n += (*this)(m, k) ? 1 : 0;
    return n;
  }
  int ubs_degree(int m) const {
    int n = 0;
    for (int k = 0; k < K_; ++k) n += (*this)(m, k) ? 1 : 0;
    return n;
  }
  /// Caps of constraints |M_k| <= L and |K_m| <= N.
  bool within_caps(int L, int N) const {
    for (int k = 0; k < K_; ++k)
      if (ue_degree(k) > L) return false;
    for (int m = 0; m < M_; ++m)
      if (ubs_degree(m) > N) return false;
    return true;
  }
  /// Canonical, exact key: one character per entry, row-major.
  std::string fingerprint() const {
    std::string f(s_.size(), '0');
    for (std::size_t i = 0; i < s_.size(); ++i) f[i] = s_[i] ? '1' : '0';
    return f;
  }
  friend bool operator==(const Association&, const Association&) = default;

 private:
  std::size_t idx(int m, int k) const { return static_cast<std::size_t>(m) * K_ + k; }
  int M_ = 0;
  int K_ = 0;
  std::vector<std::uint8_t> s_;
};

/// Generates a drop: UBS positions first, then UEs, i.i.d. uniform over the square.
inline Topology generate_topology(const ScenarioParams& params) {
  params.validate();
  Rng rng(params.seed);
  Topology t;
  t.params = params;
  auto draw = [&] { return Point{uniform01(rng) * params.area_side, uniform01(rng) * params.area_side}; };
  t.ubs_positions.reserve(static_cast<std::size_t>(params.M));
  for (int m = 0; m < params.M; ++m) t.ubs_positions.push_back(draw());
  t.ue_positions.reserve(static_cast<std::size_t>(params.K));
  for (int k = 0; k < params.K; ++k) t.ue_positions.push_back(draw());
  return t;
}

/// Torus distance on [0, side)^2.
inline double wrap_distance(Point a, Point b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return std::hypot(dx, dy);
}

/// Large-scale gain in dB at distance d (floored at 1 m), without shadowing.
inline double pathloss_gain_db(const ScenarioParams& p, double distance) {
  const double d = std::max(distance, 1.0);
  return -p.pathloss_intercept_db - 10.0 * p.pathloss_exponent * std::log10(d);
}

/// R_{m,k} = beta_{m,k} I_N with log-distance path loss and optional log-normal shadowing.
inline CorrelationSet build_correlation(const Topology& topo, const FrameConfig& frame) {
  frame.validate();
  const auto& p = topo.params;
  p.validate();
  require(static_cast<int>(topo.ubs_positions.size()) == p.M &&
              static_cast<int>(topo.ue_positions.size()) == p.K,
          "topology: position counts do not match M and K");
  Rng shadow_rng(mix_seed(p.seed ^ 0x5ADE5ADE5ADE5ADEull));
  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(static_cast<std::size_t>(p.M * p.K));
  for (int m = 0; m < p.M; ++m) {
    for (int k = 0; k < p.K; ++k) {
      double gain_db = pathloss_gain_db(p, wrap_distance(topo.ubs_positions[m], topo.ue_positions[k], p.area_side));
      if (p.shadowing_std_db > 0.0) gain_db += p.shadowing_std_db * standard_normal(shadow_rng);
      const double beta = db_to_linear(gain_db);
      mats.push_back(beta * Eigen::MatrixXcd::Identity(p.N, p.N));
    }
  }
  return CorrelationSet::from_matrices(p.M, p.K, std::move(mats));
}

namespace detail {

struct MmseLink {
  Eigen::MatrixXcd phi;   // estimate covariance
  Eigen::MatrixXcd gain;  // W with h_hat = W y, y = sqrt(p tau) h + n
  double trace_phi = 0.0;
};

inline MmseLink mmse_link(const Eigen::MatrixXcd& R, const FrameConfig& frame) {
  const double pt = frame.pilot_power_w * frame.tau_p;
  const Eigen::Index n = R.rows();
  const Eigen::MatrixXcd psi = pt * R + frame.noise_power_w * Eigen::MatrixXcd::Identity(n, n);
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(psi);
  require(ldlt.info() == Eigen::Success, "mmse: singular pilot covariance");
  // R and Psi are Hermitian, so R Psi^{-1} = (Psi^{-1} R)^H.
  const Eigen::MatrixXcd psi_inv_r = ldlt.solve(R);
  MmseLink link;
  link.phi = pt * R * psi_inv_r;
  link.phi = 0.5 * (link.phi + link.phi.adjoint()).eval();
  link.gain = std::sqrt(pt) * psi_inv_r.adjoint();
  link.trace_phi = link.phi.trace().real();
  return link;
}

}  // namespace detail

/// Closed-form MR statistics under MMSE estimation with orthogonal pilots.
inline CoefficientTensor mmse_statistics(const CorrelationSet& corr, const FrameConfig& frame) {
  frame.validate();
  require(corr.K <= frame.tau_p, "mmse: orthogonal pilots need K <= tau_p");
  CoefficientTensor t(corr.M, corr.K);
  for (int m = 0; m < corr.M; ++m) {
    for (int k = 0; k < corr.K; ++k) {
      const auto link = detail::mmse_link(corr.at(m, k), frame);
      if (link.trace_phi <= 0.0) {
        // No usable estimate: the combiner is zero.
        t.mu(m, k) = 0.0;
        for (int kp = 0; kp < corr.K; ++kp) t.omega(m, k, kp) = 0.0;
        continue;
      }
      t.mu(m, k) = std::sqrt(link.trace_phi);
      for (int kp = 0; kp < corr.K; ++kp) {
        const double cross = (corr.at(m, kp) * link.phi).trace().real() / link.trace_phi;
        t.omega(m, k, kp) = (kp == k) ? link.trace_phi + cross : cross;
      }
    }
  }
  return t;
}

/// Sample estimate of the same tensor from simulated channels, pilots and combiners.
///
/// Samples are processed in fixed-size chunks with per-chunk seeds and merged in chunk
/// order, so the result does not depend on `workers`. Standard errors treat the empirical
/// combiner normalizer as fixed.
inline MonteCarloTensor monte_carlo_statistics(const CorrelationSet& corr, const FrameConfig& frame,
                                               std::size_t samples, std::uint64_t seed,
                                               unsigned workers = 1) {
  frame.validate();
  require(samples >= 1, "monte carlo: samples must be >= 1");
  require(corr.K <= frame.tau_p, "monte carlo: orthogonal pilots need K <= tau_p");
  const int M = corr.M, K = corr.K, N = corr.N;
  const std::size_t links = static_cast<std::size_t>(M) * K;
  const double pt = frame.pilot_power_w * frame.tau_p;

  std::vector<Eigen::MatrixXcd> sqrt_r(links), gain(links);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      const std::size_t l = static_cast<std::size_t>(m) * K + k;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(corr.at(m, k));
      const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      sqrt_r[l] = eig.eigenvectors() * lam.asDiagonal();
      gain[l] = detail::mmse_link(corr.at(m, k), frame).gain;
    }

  // Per-chunk accumulators: for each (m,k): sum ||h_hat||^2 and its square, sum Re/Im of
  // h_hat^H h_k and their squares; for each (m,k,k'): sum |h_hat^H h_k'|^2 and its square.
  struct Acc {
    std::vector<double> norm, norm2, re, re2, im, im2, om, om2;
    explicit Acc(std::size_t links, int K)
        : norm(links), norm2(links), re(links), re2(links), im(links), im2(links),
          om(links * K), om2(links * K) {}
    void add(const Acc& o) {
      auto plus = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
      };
      plus(norm, o.norm); plus(norm2, o.norm2); plus(re, o.re); plus(re2, o.re2);
      plus(im, o.im); plus(im2, o.im2); plus(om, o.om); plus(om2, o.om2);
    }
  };

  constexpr std::size_t chunk = 2048;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<Acc> partial(chunks, Acc(links, K));

  auto run_chunk = [&](std::size_t c) {
    Rng rng(mix_seed(seed ^ mix_seed(c + 1)));
    Acc& acc = partial[c];
    const std::size_t begin = c * chunk, end = std::min(samples, begin + chunk);
    const double half = std::sqrt(0.5);
    auto cn = [&](Eigen::VectorXcd& v, double scale) {
      for (int i = 0; i < v.size(); ++i) {
        const double re = standard_normal(rng), im = standard_normal(rng);
        v[i] = std::complex<double>(re, im) * (half * scale);
      }
    };
    std::vector<Eigen::VectorXcd> h(links, Eigen::VectorXcd(N)), hhat(links, Eigen::VectorXcd(N));
    Eigen::VectorXcd z(N), noise(N);
    const double noise_std = std::sqrt(frame.noise_power_w);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t l = 0; l < links; ++l) {
        cn(z, 1.0);
        h[l] = sqrt_r[l] * z;
        cn(noise, noise_std);
        hhat[l] = gain[l] * (std::sqrt(pt) * h[l] + noise);
      }
      for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k) {
          const std::size_t l = static_cast<std::size_t>(m) * K + k;
          const double nn = hhat[l].squaredNorm();
          acc.norm[l] += nn;
          acc.norm2[l] += nn * nn;
          for (int kp = 0; kp < K; ++kp) {
            const std::complex<double> x = hhat[l].dot(h[static_cast<std::size_t>(m) * K + kp]);
            const double x2 = std::norm(x);
            acc.om[l * K + kp] += x2;
            acc.om2[l * K + kp] += x2 * x2;
            if (kp == k) {
              acc.re[l] += x.real();
              acc.re2[l] += x.real() * x.real();
              acc.im[l] += x.imag();
              acc.im2[l] += x.imag() * x.imag();
            }
          }
        }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }

  Acc total(links, K);
  for (const auto& p : partial) total.add(p);

  const double n = static_cast<double>(samples);
  auto mean_se = [n](double sum, double sum2) {
    const double mean = sum / n;
    if (n < 2.0) return std::pair{mean, 0.0};
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return std::pair{mean, std::sqrt(var / n)};
  };

  MonteCarloTensor out;
  out.samples = samples;
  out.estimate = CoefficientTensor(M, K);
  out.std_error = CoefficientTensor(M, K);
  out.mu_imag = Eigen::MatrixXd::Zero(M, K);
  out.mu_imag_std_error = Eigen::MatrixXd::Zero(M, K);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      const std::size_t l = static_cast<std::size_t>(m) * K + k;
      const double norm_mean = total.norm[l] / n;
      if (norm_mean <= 0.0) continue;
      const double scale = 1.0 / std::sqrt(norm_mean);
      // v = h_hat / sqrt(mean ||h_hat||^2), so E{||v||^2} is one by construction.
      out.estimate.noise_coeff(m, k) = 1.0;
      out.std_error.noise_coeff(m, k) = 0.0;
      auto [re, re_se] = mean_se(total.re[l], total.re2[l]);
      auto [im, im_se] = mean_se(total.im[l], total.im2[l]);
      out.estimate.mu(m, k) = re * scale;
      out.std_error.mu(m, k) = re_se * scale;
      out.mu_imag(m, k) = im * scale;
      out.mu_imag_std_error(m, k) = im_se * scale;
      for (int kp = 0; kp < K; ++kp) {
        auto [om, om_se] = mean_se(total.om[l * K + kp], total.om2[l * K + kp]);
        out.estimate.omega(m, k, kp) = om / norm_mean;
        out.std_error.omega(m, k, kp) = om_se / norm_mean;
      }
    }
  return out;
}

/// Association-specific reduction of the tensor to the quantities of the SINR expression.
///
/// For UE k: desired_sq = |E{DS_k}|^2, interference(k, k') = E{|IS_{k,k'}|^2},
/// noise = sigma^2 E{NS_k}. UEs with an empty serving set have all-zero rows.
struct EffectiveChannel {
  int K = 0;
  Eigen::VectorXd desired_sq;
  Eigen::MatrixXd interference;
  Eigen::VectorXd noise;
  std::vector<bool> served;
  double prefactor = 0.0;  // tau_u / tau_c * B

  /// Total received power plus noise, sum_k' P_k' E|IS_{k,k'}|^2 + sigma^2 E{NS_k}.
  double total(const Eigen::VectorXd& p, int k) const { return interference.row(k).dot(p) + noise[k]; }
  /// Interference-plus-noise, total minus the coherent desired part.
  double interference_plus_noise(const Eigen::VectorXd& p, int k) const {
    return total(p, k) - p[k] * desired_sq[k];
  }
};

inline EffectiveChannel effective_channel(const Association& assoc, const CoefficientTensor& tensor,
                                          const FrameConfig& frame) {
  require(assoc.M() == tensor.M && assoc.K() == tensor.K, "effective channel: dimension mismatch");
  const int M = tensor.M, K = tensor.K;
  EffectiveChannel ch;
  ch.K = K;
  ch.desired_sq = Eigen::VectorXd::Zero(K);
  ch.interference = Eigen::MatrixXd::Zero(K, K);
  ch.noise = Eigen::VectorXd::Zero(K);
  ch.served.assign(static_cast<std::size_t>(K), false);
  ch.prefactor = frame.rate_prefactor();
  for (int k = 0; k < K; ++k) {
    double ds = 0.0, mu_sq = 0.0, ns = 0.0;
    for (int m = 0; m < M; ++m) {
      if (!assoc(m, k)) continue;
      ch.served[k] = true;
      ds += tensor.mu(m, k);
      mu_sq += tensor.mu(m, k) * tensor.mu(m, k);
      ns += tensor.noise_coeff(m, k);
      for (int kp = 0; kp < K; ++kp) ch.interference(k, kp) += tensor.omega(m, k, kp);
    }
    // Cross-UBS terms of the coherent self-term: sum_{m != m'} mu_m mu_m' = ds^2 - sum mu^2.
    ch.interference(k, k) += ds * ds - mu_sq;
    ch.desired_sq[k] = ds * ds;
    ch.noise[k] = frame.noise_power_w * ns;
  }
  return ch;
}

inline void check_powers(const Eigen::VectorXd& p, int K) {
  require(p.size() == K, "power vector has wrong length");
  for (int k = 0; k < K; ++k) require(p[k] >= 0.0 && std::isfinite(p[k]), "power must be finite and >= 0");
}

inline Eigen::VectorXd sinr(const Eigen::VectorXd& p, const EffectiveChannel& ch) {
  check_powers(p, ch.K);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ch.K);
  for (int k = 0; k < ch.K; ++k) {
    if (!ch.served[k]) continue;
    const double num = p[k] * ch.desired_sq[k];
    if (num <= 0.0) continue;
    out[k] = num / ch.interference_plus_noise(p, k);
  }
  return out;
}

inline Eigen::VectorXd sinr(const Eigen::VectorXd& p, const Association& assoc, const CoefficientTensor& tensor,
                            const FrameConfig& frame) {
  return sinr(p, effective_channel(assoc, tensor, frame));
}

inline Eigen::VectorXd rates_from_sinr(const Eigen::VectorXd& s, double prefactor) {
  return (prefactor * (1.0 + s.array()).log2()).matrix();
}

inline Eigen::VectorXd uplink_rate(const Eigen::VectorXd& p, const EffectiveChannel& ch) {
  return rates_from_sinr(sinr(p, ch), ch.prefactor);
}

inline Eigen::VectorXd uplink_rate(const Eigen::VectorXd& p, const Association& assoc,
                                   const CoefficientTensor& tensor, const FrameConfig& frame) {
  return uplink_rate(p, effective_channel(assoc, tensor, frame));
}

}  // namespace fdran
