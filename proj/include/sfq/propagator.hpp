#pragma once

#include <cmath>
#include <string_view>

#include "sfq/core.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

namespace sfq {

/// Unitary on the truncated transmon space.
struct Propagator {
  CMatrix matrix;
  double total_time = 0.0;
  bool rotating_frame = false;  // already expressed in the omega_01 frame

  double unitarity_residual() const {
    return (matrix.adjoint() * matrix -
            CMatrix::Identity(matrix.rows(), matrix.cols()))
        .norm();
  }
};

inline constexpr std::string_view kQubitFrame = "rotating@omega01";

/// Computational-subspace block, in the frame rotating at omega_01.
struct ProjectedGate {
  Matrix2c u;
  std::string_view frame = kQubitFrame;
};

/// Instantaneous SFQ kick exp(+i theta'/2 n) with theta' = theta / r.
inline Propagator kick_unitary(const EigenModel& model, double kick_angle) {
  if (!(kick_angle > 0.0 && kick_angle < 0.5)) {
    throw ParameterError("kick angle must lie in (0, 0.5), got " +
                         std::to_string(kick_angle));
  }
  const double scaled = kick_angle / model.zero_point_r;
  return Propagator{hermitian_exp_i(model.charge_op, 0.5 * scaled), 0.0};
}

inline CVector free_phases(const EigenModel& model, double t) {
  CVector ph(model.levels());
  for (int k = 0; k < model.levels(); ++k) {
    ph(k) = std::exp(Complex(0.0, -model.energies(k) * t));
  }
  return ph;
}

inline Propagator free_evolution(const EigenModel& model, double t) {
  if (t < 0.0) throw ParameterError("free evolution time must be non-negative");
  return Propagator{free_phases(model, t).asDiagonal().toDenseMatrix(), t};
}

/// Product of kicks and waits for an arbitrary bit pattern: for each tick a
/// '1' kicks first, then every tick waits T_c. Consecutive waits are merged.
inline Propagator bits_propagator(const EigenModel& model, const BitString& bits,
                                  const ClockConfig& clock, double kick_angle) {
  const int d = model.levels();
  Propagator p{CMatrix::Identity(d, d), 0.0};
  if (bits.empty()) return p;
  const CMatrix kick = kick_unitary(model, kick_angle).matrix;

  std::size_t i = 0;
  while (i < bits.size()) {
    if (bits[i] == '1') p.matrix = kick * p.matrix;
    // Wait through this tick and every following empty tick.
    std::size_t j = i + 1;
    while (j < bits.size() && bits[j] == '0') ++j;
    const double wait = static_cast<double>(j - i) * clock.clock_period;
    p.matrix = free_phases(model, wait).asDiagonal() * p.matrix;
    i = j;
  }
  p.total_time = static_cast<double>(bits.size()) * clock.clock_period;
  return p;
}

inline Propagator sequence_propagator(const EigenModel& model, const PulseSchedule& s) {
  s.validate();
  return bits_propagator(model, expand_bits(s), s.clock, s.kick_angle);
}

/// Top-left 2x2 block times diag(1, exp(i omega_01 t)); the frame factor is
/// the identity for whole-cycle schedules.
inline ProjectedGate project_computational(const Propagator& p, const EigenModel& model) {
  Matrix2c block = p.matrix.topLeftCorner(2, 2);
  if (p.rotating_frame) return ProjectedGate{block};
  const Complex frame = std::exp(Complex(0.0, model.omega_01 * p.total_time));
  block.col(1) *= frame;
  return ProjectedGate{block};
}

/// Constant-amplitude drive in the rotating-wave approximation: the exact
/// ladder E_k - k omega_01 plus (i/2) Omega0 (b^dag - b), with b^dag - b taken
/// from the nearest-neighbour part of i n / r. Cross-check only.
inline Propagator rwa_drive_propagator(const EigenModel& model, double drive_amplitude,
                                       double t) {
  if (!(std::abs(drive_amplitude) < std::abs(model.anharmonicity_exact) / 2.0) &&
      model.levels() > 2) {
    throw ParameterError("RWA drive amplitude must stay below |alpha|/2");
  }
  if (t < 0.0) throw ParameterError("drive time must be non-negative");
  const int d = model.levels();
  CMatrix h = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    h(k, k) = model.energies(k) - k * model.omega_01;
    if (k + 1 < d) {
      h(k, k + 1) = -0.5 * drive_amplitude / model.zero_point_r * model.charge_op(k, k + 1);
      h(k + 1, k) = std::conj(h(k, k + 1));
    }
  }
  return Propagator{hermitian_exp_i(h, -t), t, true};
}

}  // namespace sfq
