#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sfq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Angular frequency in rad/s from a frequency in GHz.
constexpr double ghz(double f) { return kTwoPi * f * 1e9; }
constexpr double mhz(double f) { return kTwoPi * f * 1e6; }
constexpr double to_ghz(double omega) { return omega / (kTwoPi * 1e9); }

// Error hierarchy. ValidationError covers bad inputs (CLI exit 2),
// NumericalError covers solver breakdowns (CLI exit 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DecodeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NoCandidates : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public NumericalError {
 public:
  NumericalFailure(const std::string& what, double residual)
      : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class CalibrationFailure : public NumericalError {
 public:
  CalibrationFailure(const std::string& what, double omega_residual,
                     double alpha_residual)
      : NumericalError(what + " (residuals: omega01 " +
                       std::to_string(omega_residual) + " rad/s, alpha " +
                       std::to_string(alpha_residual) + " rad/s)"),
        omega_residual_(omega_residual),
        alpha_residual_(alpha_residual) {}
  double omega_residual() const { return omega_residual_; }
  double alpha_residual() const { return alpha_residual_; }

 private:
  double omega_residual_;
  double alpha_residual_;
};

class DegenerateGate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace pauli {
inline Matrix2c identity() { return Matrix2c::Identity(); }
inline Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix2c y() {
  Matrix2c m;
  m << 0, -kI, kI, 0;
  return m;
}
inline Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

/// exp(-i angle/2 Y)
inline Matrix2c ry(double angle) {
  Matrix2c m;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  m << c, -s, s, c;
  return m;
}

/// exp(-i angle/2 X)
inline Matrix2c rx(double angle) {
  Matrix2c m;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  m << c, Complex(0, -s), Complex(0, -s), c;
  return m;
}

/// exp(-i angle/2 Z)
inline Matrix2c rz(double angle) {
  Matrix2c m;
  m << std::exp(Complex(0, -angle / 2)), 0, 0, std::exp(Complex(0, angle / 2));
  return m;
}

/// Exponential of i*scale*H for a Hermitian H, via its eigendecomposition.
/// Unitary to machine precision, unlike a Padé approximant.
inline CMatrix hermitian_exp_i(const CMatrix& h, double scale) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("Hermitian eigensolver did not converge", h.norm());
  }
  CVector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(kI * (scale * es.eigenvalues()(k)));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace sfq
