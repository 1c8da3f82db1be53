#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "sfq/core.hpp"

namespace sfq {

/// Physical parameters of a fixed-frequency transmon. Energies are angular
/// frequencies in rad/s.
struct TransmonSpec {
  double charging_energy = 0.0;   // E_C
  double josephson_energy = 0.0;  // E_J
  double gate_charge = 0.0;       // n_g
  int charge_dimension = 201;     // odd, symmetric grid -(d-1)/2 .. (d-1)/2
  int kept_levels = 7;

  double ratio() const { return josephson_energy / charging_energy; }

  void validate() const {
    if (!(charging_energy > 0.0)) throw InvalidSpec("E_C must be positive");
    if (!(josephson_energy > 0.0)) throw InvalidSpec("E_J must be positive");
    if (!(ratio() > 20.0)) {
      throw InvalidSpec("E_J/E_C = " + std::to_string(ratio()) +
                        " is outside the transmon regime (> 20)");
    }
    if (charge_dimension < 3) throw InvalidSpec("charge_dimension must be >= 3");
    if (charge_dimension % 2 == 0) throw InvalidSpec("charge_dimension must be odd");
    if (kept_levels < 2 || kept_levels > charge_dimension) {
      throw InvalidSpec("kept_levels must lie in [2, charge_dimension]");
    }
  }
};

/// Diagonalized transmon truncated to its lowest levels. Immutable once built;
/// shared read-only by every propagator and search worker.
struct EigenModel {
  std::optional<TransmonSpec> spec;  // empty for the ideal two-level model
  RVector energies;                  // rad/s, energies[0] == 0
  CMatrix charge_op;                 // n in the eigenbasis, Im n[k][k+1] > 0
  double omega_01 = 0.0;
  double anharmonicity_exact = 0.0;  // omega_01 - omega_12 (positive for a transmon)
  double zero_point_r = 0.0;

  int levels() const { return static_cast<int>(energies.size()); }
  double qubit_period() const { return kTwoPi / omega_01; }
  double omega_12() const { return energies(2) - energies(1); }
};

/// Zero-point charge fluctuation r = (1/2)(E_J / 2E_C)^{1/4}.
inline double zero_point_fluctuation(double charging_energy, double josephson_energy) {
  return 0.5 * std::pow(josephson_energy / (2.0 * charging_energy), 0.25);
}

/// 4E_C(n - n_g)^2 - E_J cos(phi) in the charge basis.
inline RMatrix build_charge_hamiltonian(const TransmonSpec& spec) {
  const int d = spec.charge_dimension;
  if (d < 3) throw InvalidSpec("charge_dimension must be >= 3");
  RMatrix h = RMatrix::Zero(d, d);
  const int half = (d - 1) / 2;
  for (int i = 0; i < d; ++i) {
    const double n = static_cast<double>(i - half) - spec.gate_charge;
    h(i, i) = 4.0 * spec.charging_energy * n * n;
    if (i + 1 < d) {
      h(i, i + 1) = -0.5 * spec.josephson_energy;
      h(i + 1, i) = -0.5 * spec.josephson_energy;
    }
  }
  return h;
}

inline EigenModel diagonalize_and_project(const RMatrix& h, const TransmonSpec& spec) {
  spec.validate();
  if (h.rows() != spec.charge_dimension || h.cols() != spec.charge_dimension) {
    throw InvalidSpec("Hamiltonian dimension does not match the spec");
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  const RMatrix& vecs = es.eigenvectors();
  const RVector& vals = es.eigenvalues();
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("charge-basis eigensolver did not converge",
                           (h * vecs - vecs * vals.asDiagonal()).norm());
  }

  const int d = spec.charge_dimension;
  const int keep = spec.kept_levels;
  const int half = (d - 1) / 2;
  RVector charges(d);
  for (int i = 0; i < d; ++i) charges(i) = static_cast<double>(i - half);

  const RMatrix v = vecs.leftCols(keep);
  const RMatrix n_real = v.transpose() * charges.asDiagonal() * v;

  // Gauge: eigenvector k gets phase i^k s_k with real signs s_k chosen so
  // every <k|n|k+1> is positive imaginary.
  static constexpr std::array<Complex, 4> kPowersOfI{
      Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
  std::vector<Complex> phase(keep);
  double sign = 1.0;
  phase[0] = 1.0;
  for (int k = 0; k + 1 < keep; ++k) {
    if (n_real(k, k + 1) < 0.0) sign = -sign;
    phase[k + 1] = kPowersOfI[(k + 1) % 4] * sign;
  }

  EigenModel model;
  model.spec = spec;
  model.energies = vals.head(keep).array() - vals(0);
  model.charge_op.resize(keep, keep);
  for (int j = 0; j < keep; ++j) {
    for (int k = 0; k < keep; ++k) {
      model.charge_op(j, k) = std::conj(phase[j]) * phase[k] * n_real(j, k);
    }
  }
  model.omega_01 = model.energies(1);
  model.anharmonicity_exact =
      keep >= 3 ? 2.0 * model.energies(1) - model.energies(2) : 0.0;
  model.zero_point_r = zero_point_fluctuation(spec.charging_energy, spec.josephson_energy);
  return model;
}

inline EigenModel build_model(const TransmonSpec& spec) {
  return diagonalize_and_project(build_charge_hamiltonian(spec), spec);
}

/// Two-level qubit with n = [[0, i r], [-i r, 0]], so a kick of angle theta
/// rotates by exactly theta. Used as the analytic oracle model.
inline EigenModel ideal_two_level(double omega_01, double zero_point_r = 1.0,
                                  double anharmonicity = 0.0) {
  EigenModel model;
  model.energies = RVector(2);
  model.energies << 0.0, omega_01;
  model.charge_op = CMatrix::Zero(2, 2);
  model.charge_op(0, 1) = kI * zero_point_r;
  model.charge_op(1, 0) = -kI * zero_point_r;
  model.omega_01 = omega_01;
  model.anharmonicity_exact = anharmonicity;
  model.zero_point_r = zero_point_r;
  return model;
}

namespace detail {

// Lowest `count` eigenvalues of the tridiagonal charge Hamiltonian, shifted
// so the ground state is zero. Eigenvalues only, O(d^2).
inline RVector lowest_levels(const TransmonSpec& spec, int count) {
  const int d = spec.charge_dimension;
  const int half = (d - 1) / 2;
  RVector diag(d);
  RVector sub = RVector::Constant(d - 1, -0.5 * spec.josephson_energy);
  for (int i = 0; i < d; ++i) {
    const double n = static_cast<double>(i - half) - spec.gate_charge;
    diag(i) = 4.0 * spec.charging_energy * n * n;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    // The implicit QR sweep occasionally stalls on the nearly degenerate
    // +-n charge pairs; the dense solver reduces differently and converges.
    es.compute(build_charge_hamiltonian(spec), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw NumericalFailure("charge-basis eigensolver did not converge", 0.0);
    }
  }
  return es.eigenvalues().head(count).array() - es.eigenvalues()(0);
}

}  // namespace detail

struct CalibrationOptions {
  int charge_dimension = 201;
  int kept_levels = 7;
  double gate_charge = 0.0;
  std::optional<std::pair<double, double>> initial_guess;  // (E_C, E_J)
  int max_iterations = 100;
  double tolerance = kTwoPi * 1e3;  // 1 kHz, the acceptance bound
};

/// Solve for (E_C, E_J) so the exactly diagonalized spectrum has the requested
/// omega_01 and omega_01 - omega_12. Newton iteration with a finite-difference
/// Jacobian; iterates well past `tolerance` until the residual reaches the
/// eigensolver noise floor.
inline TransmonSpec calibrate(double target_omega01, double target_alpha,
                              const CalibrationOptions& opts = {}) {
  if (!(target_omega01 > 0.0) || !(target_alpha > 0.0)) {
    throw ParameterError("calibration targets must be positive");
  }
  if (!(target_alpha < target_omega01 / 10.0)) {
    throw ParameterError("anharmonicity target must be below omega01/10");
  }

  TransmonSpec spec;
  spec.charge_dimension = opts.charge_dimension;
  spec.kept_levels = opts.kept_levels;
  spec.gate_charge = opts.gate_charge;
  if (opts.initial_guess) {
    spec.charging_energy = opts.initial_guess->first;
    spec.josephson_energy = opts.initial_guess->second;
  } else {
    spec.charging_energy = target_alpha;
    spec.josephson_energy = 69.0 * target_alpha;
  }

  auto residual = [&](double ec, double ej) {
    TransmonSpec s = spec;
    s.charging_energy = ec;
    s.josephson_energy = ej;
    const RVector e = detail::lowest_levels(s, 3);
    const double w01 = e(1);
    const double w12 = e(2) - e(1);
    return Eigen::Vector2d(w01 - target_omega01, (w01 - w12) - target_alpha);
  };

  // Stop once the residual sits at the floating-point floor of the solver.
  const double floor = kTwoPi * 1e-2;
  Eigen::Vector2d x(spec.charging_energy, spec.josephson_energy);
  Eigen::Vector2d r = residual(x(0), x(1));
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (r.cwiseAbs().maxCoeff() < floor) break;
    Eigen::Matrix2d jac;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d xp = x;
      const double h = 1e-7 * x(c);
      xp(c) += h;
      jac.col(c) = (residual(xp(0), xp(1)) - r) / h;
    }
    Eigen::Vector2d step = jac.fullPivLu().solve(-r);
    // Keep E_C, E_J positive.
    double scale = 1.0;
    while ((x + scale * step).minCoeff() <= 0.0 && scale > 1e-6) scale *= 0.5;
    const Eigen::Vector2d next = x + scale * step;
    const Eigen::Vector2d r_next = residual(next(0), next(1));
    if (r_next.cwiseAbs().maxCoeff() >= r.cwiseAbs().maxCoeff() &&
        r.cwiseAbs().maxCoeff() < opts.tolerance) {
      break;  // stagnated below the acceptance bound
    }
    x = next;
    r = r_next;
  }
  if (!(r.cwiseAbs().maxCoeff() < opts.tolerance) || !r.allFinite()) {
    throw CalibrationFailure("transmon calibration did not converge", r(0), r(1));
  }
  spec.charging_energy = x(0);
  spec.josephson_energy = x(1);
  spec.validate();
  return spec;
}

}  // namespace sfq
