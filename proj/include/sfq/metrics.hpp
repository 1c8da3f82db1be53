#pragma once

#include <array>
#include <cmath>
#include <tuple>
#include <utility>

#include "sfq/core.hpp"
#include "sfq/propagator.hpp"

namespace sfq {

/// Target R_Y(theta) = cos(theta/2) I - i sin(theta/2) Y.
struct TargetGate {
  double theta_target = kPi;
  Matrix2c unitary = ry(kPi);

  static TargetGate y_rotation(double angle) { return TargetGate{angle, ry(angle)}; }
};

/// U_Q = (1 - delta)(c_I I - i c_X X - i c_Y Y - i c_Z Z), sum |c|^2 = 1.
/// With this sign convention R_Y(t) has c_I = cos(t/2), c_Y = sin(t/2).
struct PauliDecomposition {
  double delta = 0.0;
  std::array<Complex, 4> c{};  // I, X, Y, Z

  Complex c_i() const { return c[0]; }
  Complex c_x() const { return c[1]; }
  Complex c_y() const { return c[2]; }
  Complex c_z() const { return c[3]; }
};

struct GateReport {
  double avg_fidelity = 0.0;
  double process_fidelity = 0.0;
  double leakage = 0.0;  // L1
  double delta = 0.0;
  std::array<Complex, 4> pauli{};
  double err_discrete = 0.0;
  double err_phase = 0.0;

  double error() const { return 1.0 - avg_fidelity; }
};

inline double process_fidelity(const Matrix2c& u, const TargetGate& t) {
  return std::norm((t.unitary.adjoint() * u).trace()) / 4.0;
}

/// L = 1 - Tr(U_Q U_Q^dag) / 2
inline double leakage(const Matrix2c& u) { return 1.0 - u.squaredNorm() / 2.0; }

inline double average_fidelity_from(double f_pro, double l1) {
  return (2.0 * f_pro + 1.0 - l1) / 3.0;
}

/// Fidelity fields only (F_pro, L1, F-bar).
inline GateReport average_fidelity(const ProjectedGate& g, const TargetGate& t) {
  GateReport r;
  r.process_fidelity = process_fidelity(g.u, t);
  r.leakage = leakage(g.u);
  r.avg_fidelity = average_fidelity_from(r.process_fidelity, r.leakage);
  return r;
}

inline PauliDecomposition pauli_decompose(const ProjectedGate& g) {
  const Matrix2c& u = g.u;
  std::array<Complex, 4> d{
      u.trace() / 2.0,
      kI * (pauli::x() * u).trace() / 2.0,
      kI * (pauli::y() * u).trace() / 2.0,
      kI * (pauli::z() * u).trace() / 2.0,
  };
  double norm2 = 0.0;
  for (const auto& v : d) norm2 += std::norm(v);
  const double scale = std::sqrt(norm2);
  if (scale < 1e-12) throw DegenerateGate("projected gate is numerically zero");

  // Global phase from sqrt(det U): exact for any phase times SU(2), and
  // well-conditioned even when c_I is small.
  const Complex det = u.determinant();
  Complex phase = std::abs(det) > 1e-300 ? std::sqrt(det / std::abs(det)) : Complex(1, 0);
  for (auto& v : d) v /= phase;
  const bool use_identity = std::abs(d[0]) >= 1e-9;
  const double lead = use_identity ? d[0].real() : d[2].real();
  if (lead < 0.0) {
    for (auto& v : d) v = -v;
  }

  PauliDecomposition p;
  p.delta = 1.0 - scale;
  for (int i = 0; i < 4; ++i) p.c[i] = d[i] / scale;
  return p;
}

/// (err_discrete, err_phase) = (|c_Y - sin(theta_t/2)|^2, |c_Z|^2). The overall
/// sign of the coefficients is aligned with the target first.
inline std::pair<double, double> error_split(const PauliDecomposition& p,
                                             const TargetGate& t) {
  const double ci = std::cos(t.theta_target / 2), sy = std::sin(t.theta_target / 2);
  Complex cy = p.c_y();
  if ((p.c_i() * ci + cy * sy).real() < 0.0) cy = -cy;
  return {std::norm(cy - sy), std::norm(p.c_z())};
}

inline std::pair<double, double> error_split(const ProjectedGate& g, const TargetGate& t) {
  return error_split(pauli_decompose(g), t);
}

/// Every GateReport field. Checks the trace leakage L against 2 delta - delta^2.
inline GateReport evaluate_gate(const ProjectedGate& g, const TargetGate& t) {
  GateReport r = average_fidelity(g, t);
  const PauliDecomposition p = pauli_decompose(g);
  const double l1 = 2.0 * p.delta - p.delta * p.delta;
  if (std::abs(l1 - r.leakage) > 1e-10) {
    throw NumericalFailure("leakage from the trace and from the Pauli norm disagree",
                           std::abs(l1 - r.leakage));
  }
  r.delta = p.delta;
  r.pauli = p.c;
  std::tie(r.err_discrete, r.err_phase) = error_split(p, t);
  return r;
}

}  // namespace sfq
