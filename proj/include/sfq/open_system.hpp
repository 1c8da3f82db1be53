#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "sfq/core.hpp"
#include "sfq/metrics.hpp"
#include "sfq/propagator.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

namespace sfq {

/// One noise realization. delta_theta is the kick-angle deviation axis in
/// thousandths: each run draws g ~ N(0, 1) and kicks with theta (1 + g dtheta / 1000).
struct NoiseConfig {
  double gamma = 0.0;         // 1/s
  double jitter_sigma = 0.0;  // s
  double delta_omega = 0.0;   // rad/s
  double delta_alpha = 0.0;   // rad/s
  double delta_theta = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(gamma >= 0.0)) throw ParameterError("gamma must be non-negative");
    if (!(jitter_sigma >= 0.0)) throw ParameterError("jitter sigma must be non-negative");
    if (!std::isfinite(delta_omega) || !std::isfinite(delta_alpha) ||
        !std::isfinite(delta_theta)) {
      throw ParameterError("noise deviations must be finite");
    }
  }
};

/// Column-stacked superoperator: vec(rho)[j + d k] = rho(j, k).
struct ChannelMap {
  CMatrix superop;
  double total_time = 0.0;
  int dim = 0;
  double frame_omega = 0.0;       // 0 means already in the qubit frame
  double max_trace_defect = 0.0;  // worst single step
};

/// Conjugation rho -> U rho U^dag.
inline CMatrix conjugation_superop(const CMatrix& u) {
  return Eigen::kroneckerProduct(u.conjugate(), u).eval();
}

/// Strictly upper-triangular part of the eigenbasis charge operator; lowers
/// the excitation number.
inline CMatrix lowering_part(const EigenModel& model) {
  return model.charge_op.triangularView<Eigen::StrictlyUpper>().toDenseMatrix();
}

/// L0 = -i[H, .] + gamma D[A] with D[A] rho = A rho A^dag - {A^dag A, rho} / 2.
inline CMatrix build_liouvillian(const EigenModel& model, double gamma) {
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be non-negative");
  const int d = model.levels();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix h = model.energies.cast<Complex>().asDiagonal();
  CMatrix l = -kI * (Eigen::kroneckerProduct(id, h).eval() -
                     Eigen::kroneckerProduct(h.transpose(), id).eval());
  if (gamma > 0.0) {
    const CMatrix a = lowering_part(model);
    const CMatrix ada = a.adjoint() * a;
    l += gamma * (Eigen::kroneckerProduct(a.conjugate(), a).eval() -
                  0.5 * Eigen::kroneckerProduct(id, ada).eval() -
                  0.5 * Eigen::kroneckerProduct(ada.transpose(), id).eval());
  }
  return l;
}

/// exp(L t) for many t. Uses L = V D V^-1 when V is well conditioned and the
/// factorization reproduces L; otherwise falls back to Pade scaling and squaring.
class GeneratorExponential {
 public:
  explicit GeneratorExponential(const CMatrix& l) : l_(l) {
    Eigen::ComplexEigenSolver<CMatrix> es(l);
    if (es.info() != Eigen::Success) return;
    const CMatrix& v = es.eigenvectors();
    Eigen::PartialPivLU<CMatrix> lu(v);
    const CMatrix vinv = lu.inverse();
    const double cond = v.norm() * vinv.norm();
    const double scale = std::max(1.0, l.norm());
    const double resid = (v * es.eigenvalues().asDiagonal() * vinv - l).norm() / scale;
    if (cond < 1e4 && resid < 1e-13) {
      diagonal_ = true;
      v_ = v;
      vinv_ = vinv;
      lambda_ = es.eigenvalues();
    }
  }

  CMatrix operator()(double t) const {
    if (!diagonal_) return (l_ * t).exp();
    const CVector e = (lambda_ * t).array().exp();
    return v_ * e.asDiagonal() * vinv_;
  }

  bool diagonalized() const { return diagonal_; }

 private:
  CMatrix l_;
  bool diagonal_ = false;
  CMatrix v_, vinv_;
  CVector lambda_;
};

/// max_k |Tr(S(E_jk)) - delta_jk| over the matrix units: zero for a
/// trace-preserving map.
inline double trace_defect(const CMatrix& superop, int dim) {
  double worst = 0.0;
  for (int col = 0; col < superop.cols(); ++col) {
    Complex tr(0.0, 0.0);
    for (int j = 0; j < dim; ++j) tr += superop(j + dim * j, col);
    const int jj = col % dim, kk = col / dim;
    worst = std::max(worst, std::abs(tr - (jj == kk ? 1.0 : 0.0)));
  }
  return worst;
}

/// Unitary channel of a closed-system propagator.
inline ChannelMap unitary_channel(const Propagator& p, const EigenModel& model) {
  ChannelMap c;
  c.superop = conjugation_superop(p.matrix);
  c.total_time = p.total_time;
  c.dim = static_cast<int>(p.matrix.rows());
  c.frame_omega = p.rotating_frame ? 0.0 : model.omega_01;
  c.max_trace_defect = trace_defect(c.superop, c.dim);
  return c;
}

/// Same model recalibrated to (omega_01 + d_omega, alpha + d_alpha).
inline EigenModel perturbed_model(const EigenModel& model, double delta_omega,
                                  double delta_alpha) {
  if (delta_omega == 0.0 && delta_alpha == 0.0) return model;
  const double w = model.omega_01 + delta_omega;
  const double a = model.anharmonicity_exact + delta_alpha;
  if (!model.spec) return ideal_two_level(w, model.zero_point_r, a);
  CalibrationOptions opts;
  opts.charge_dimension = model.spec->charge_dimension;
  opts.kept_levels = model.spec->kept_levels;
  opts.gate_charge = model.spec->gate_charge;
  opts.initial_guess = std::make_pair(model.spec->charging_energy, model.spec->josephson_energy);
  return build_model(calibrate(w, a, opts));
}

/// Kicks alternate with exp(L0 (t_i + t_delta_i)). Every merged waiting
/// interval draws its own jitter, clamped at zero duration. The qubit frame
/// stays the nominal clock frame whatever the deviations.
inline ChannelMap evolve_channel(const EigenModel& nominal, const PulseSchedule& s,
                                 const NoiseConfig& noise) {
  s.validate();
  noise.validate();
  const EigenModel model = perturbed_model(nominal, noise.delta_omega, noise.delta_alpha);
  const int d = model.levels();

  std::mt19937_64 rng(noise.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double g = normal(rng);
  const double kick_angle = s.kick_angle * (1.0 + g * noise.delta_theta / 1000.0);

  const CMatrix liouvillian = build_liouvillian(model, noise.gamma);
  const CMatrix kick = conjugation_superop(kick_unitary(model, kick_angle).matrix);

  ChannelMap c;
  c.dim = d;
  c.superop = CMatrix::Identity(d * d, d * d);
  c.max_trace_defect = trace_defect(kick, d);

  const GeneratorExponential generator(liouvillian);
  std::map<double, CMatrix> cache;
  auto waiting = [&](double t) -> const CMatrix& {
    auto it = cache.find(t);
    if (it == cache.end()) {
      CMatrix e = generator(t);
      c.max_trace_defect = std::max(c.max_trace_defect, trace_defect(e, d));
      it = cache.emplace(t, std::move(e)).first;
    }
    return it->second;
  };

  const BitString bits = expand_bits(s);
  std::size_t i = 0;
  while (i < bits.size()) {
    if (bits[i] == '1') c.superop = kick * c.superop;
    std::size_t j = i + 1;
    while (j < bits.size() && bits[j] == '0') ++j;
    double t = static_cast<double>(j - i) * s.clock.clock_period;
    if (noise.jitter_sigma > 0.0) t = std::max(0.0, t + noise.jitter_sigma * normal(rng));
    c.superop = waiting(t) * c.superop;
    if (noise.jitter_sigma > 0.0) cache.clear();
    i = j;
  }
  c.total_time = static_cast<double>(bits.size()) * s.clock.clock_period;
  c.frame_omega = kTwoPi / s.clock.qubit_period;
  return c;
}

/// Computational 4x4 block of the channel, moved to the qubit frame.
inline Eigen::Matrix4cd computational_block(const ChannelMap& c) {
  if (c.dim < 2 || c.superop.rows() != c.dim * c.dim) {
    throw ParameterError("channel superoperator has the wrong shape");
  }
  Eigen::Matrix4cd block;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      block(a, b) = c.superop((a % 2) + c.dim * (a / 2), (b % 2) + c.dim * (b / 2));
    }
  }
  if (c.frame_omega != 0.0) {
    Matrix2c f = Matrix2c::Identity();
    f(1, 1) = std::exp(Complex(0.0, c.frame_omega * c.total_time));
    block = Eigen::kroneckerProduct(f.conjugate(), f).eval() * block;
  }
  return block;
}

/// F_pro = Tr(S_G^dag S_Q) / 4, L1 = 1 - Tr[S_Q(P2)] / 2, F-bar from both.
inline GateReport channel_fidelity(const ChannelMap& c, const TargetGate& target) {
  const Eigen::Matrix4cd sq = computational_block(c);
  const Eigen::Matrix4cd sg = Eigen::kroneckerProduct(target.unitary.conjugate(), target.unitary);
  GateReport r;
  r.process_fidelity = (sg.adjoint() * sq).trace().real() / 4.0;
  const Eigen::Vector4cd p2(1.0, 0.0, 0.0, 1.0);
  const Eigen::Vector4cd out = sq * p2;
  r.leakage = 1.0 - (out(0) + out(3)).real() / 2.0;
  r.avg_fidelity = average_fidelity_from(r.process_fidelity, r.leakage);
  return r;
}

/// Choi matrix sum_jk |j><k| (x) S(|j><k|), with the input index first.
inline CMatrix choi_matrix(const ChannelMap& c) {
  const int d = c.dim;
  CMatrix choi = CMatrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const auto col = c.superop.col(j + d * k);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) choi(j * d + a, k * d + b) = col(a + d * b);
      }
    }
  }
  return choi;
}

/// Population of |1> under free decay from |1>, at each time.
inline std::vector<double> free_decay_populations(const EigenModel& model, double gamma,
                                                  const std::vector<double>& times) {
  const int d = model.levels();
  const CMatrix l = build_liouvillian(model, gamma);
  CVector rho = CVector::Zero(d * d);
  rho(1 + d * 1) = 1.0;
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(((l * t).exp() * rho)(1 + d * 1).real());
  return out;
}

/// Least-squares rate k of p(t) = p0 exp(-k t) from log-populations.
inline double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& pops) {
  if (times.size() != pops.size() || times.size() < 2) {
    throw ParameterError("decay fit needs at least two matching samples");
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(pops[i] > 0.0)) throw NumericalFailure("non-positive population in decay fit", pops[i]);
    const double y = std::log(pops[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  return -(n * sty - st * sy) / (n * stt - st * st);
}

// ---------------------------------------------------------------------------
// Robustness sweep

/// Spread of the sampled deviations around the nominal point. Signed
/// deviations are normal; jitter, kick-angle axis and gamma are half-normal.
struct SweepConfig {
  int samples = 1000;
  std::uint64_t seed = 1;
  double sd_delta_omega = mhz(2.0);
  double sd_delta_alpha = mhz(10.0);
  double sd_jitter = 1e-12;
  double sd_delta_theta = 1.0;
  double sd_gamma = 1.0 / 50e-6;
  std::vector<double> delta_omega_grid;  // scan for the best frequency offset
  int threads = 1;
};

struct RobustnessSample {
  int ramp_cycles = 0;
  int index = 0;
  NoiseConfig noise;
  double avg_fidelity = 0.0;
  double leakage = 0.0;
};

struct RobustnessSummary {
  int ramp_cycles = 0;
  double nominal_fidelity = 0.0;
  double median = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
  double best_delta_omega = 0.0;
  std::vector<double> scan_fidelity;  // per delta_omega_grid point
};

struct RobustnessResult {
  std::vector<RobustnessSample> samples;
  std::vector<RobustnessSummary> summaries;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

inline NoiseConfig draw_noise(const SweepConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NoiseConfig n;
  n.delta_omega = cfg.sd_delta_omega * normal(rng);
  n.delta_alpha = cfg.sd_delta_alpha * normal(rng);
  n.jitter_sigma = std::abs(cfg.sd_jitter * normal(rng));
  n.delta_theta = std::abs(cfg.sd_delta_theta * normal(rng));
  n.gamma = std::abs(cfg.sd_gamma * normal(rng));
  n.rng_seed = splitmix64(seed);
  return n;
}

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

template <class F>
void parallel_for(int count, int threads, F&& body) {
  const int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
}

}  // namespace detail

/// Samples every schedule (one per ramp length) at `cfg.samples` noise draws,
/// and scans delta_omega noiselessly for the best frequency offset.
inline RobustnessResult robustness_sweep(const EigenModel& model,
                                         const std::vector<PulseSchedule>& schedules,
                                         const SweepConfig& cfg, const TargetGate& target = {}) {
  if (cfg.samples < 0) throw ParameterError("sample count must be non-negative");
  RobustnessResult out;
  const int per = cfg.samples;
  const int ns = static_cast<int>(schedules.size());
  out.samples.resize(static_cast<std::size_t>(per * ns));
  for (int r = 0; r < ns; ++r) {
    for (int i = 0; i < per; ++i) {
      auto& row = out.samples[static_cast<std::size_t>(r * per + i)];
      row.ramp_cycles = static_cast<int>(schedules[static_cast<std::size_t>(r)].on_ramp.size());
      row.index = i;
      row.noise = draw_noise(cfg, sample_seed(cfg.seed, static_cast<std::uint64_t>(r),
                                              static_cast<std::uint64_t>(i)));
    }
  }
  detail::parallel_for(per * ns, cfg.threads, [&](int k) {
    auto& row = out.samples[static_cast<std::size_t>(k)];
    const GateReport rep = channel_fidelity(
        evolve_channel(model, schedules[static_cast<std::size_t>(k / per)], row.noise), target);
    row.avg_fidelity = rep.avg_fidelity;
    row.leakage = rep.leakage;
  });

  const int ng = static_cast<int>(cfg.delta_omega_grid.size());
  std::vector<double> scan(static_cast<std::size_t>(ns * ng), 0.0);
  detail::parallel_for(ns * ng, cfg.threads, [&](int k) {
    NoiseConfig n;
    n.delta_omega = cfg.delta_omega_grid[static_cast<std::size_t>(k % ng)];
    scan[static_cast<std::size_t>(k)] =
        channel_fidelity(evolve_channel(model, schedules[static_cast<std::size_t>(k / ng)], n),
                         target)
            .avg_fidelity;
  });

  for (int r = 0; r < ns; ++r) {
    const auto& s = schedules[static_cast<std::size_t>(r)];
    RobustnessSummary sum;
    sum.ramp_cycles = static_cast<int>(s.on_ramp.size());
    sum.nominal_fidelity = channel_fidelity(evolve_channel(model, s, NoiseConfig{}), target).avg_fidelity;
    std::vector<double> f;
    for (int i = 0; i < per; ++i) f.push_back(out.samples[static_cast<std::size_t>(r * per + i)].avg_fidelity);
    sum.median = detail::quantile(f, 0.5);
    sum.p05 = detail::quantile(f, 0.05);
    sum.p95 = detail::quantile(f, 0.95);
    int best = -1;
    for (int gi = 0; gi < ng; ++gi) {
      const double v = scan[static_cast<std::size_t>(r * ng + gi)];
      sum.scan_fidelity.push_back(v);
      if (best < 0 || v > sum.scan_fidelity[static_cast<std::size_t>(best)]) best = gi;
    }
    sum.best_delta_omega = best >= 0 ? cfg.delta_omega_grid[static_cast<std::size_t>(best)] : 0.0;
    out.summaries.push_back(std::move(sum));
  }
  return out;
}

}  // namespace sfq
