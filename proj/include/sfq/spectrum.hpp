#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sfq/core.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

namespace sfq {

/// |S(omega)| of a kick sequence treated as a Dirac comb. Frequencies are in
/// units of omega_01.
struct SpectrumTable {
  std::vector<double> freq_grid;
  std::vector<double> magnitude;
  double leak_freq = 0.0;
};

/// 2048 points over [0.5, 1.5].
inline std::vector<double> default_grid(int points = 2048, double lo = 0.5, double hi = 1.5) {
  if (points < 2 || !(hi > lo)) throw ParameterError("frequency grid needs >= 2 points and hi > lo");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

/// S(omega) = sum over kick ticks m of exp(2 pi i m omega / S).
inline Complex spectrum_at(const BitString& bits, const ClockConfig& clock, double omega) {
  Complex sum(0.0, 0.0);
  const double step = kTwoPi * omega / clock.multiplier;
  for (std::size_t m = 0; m < bits.size(); ++m) {
    if (bits[m] == '1') sum += std::polar(1.0, step * static_cast<double>(m));
  }
  return sum;
}

inline SpectrumTable pulse_spectrum(const BitString& bits, const ClockConfig& clock,
                                    const std::vector<double>& freq_grid) {
  SpectrumTable t;
  t.freq_grid = freq_grid;
  t.magnitude.reserve(freq_grid.size());
  for (double w : freq_grid) {
    if (w < 0.0 || w > clock.multiplier) {
      throw ParameterError("spectrum grid must lie within [0, clock multiplier]");
    }
    t.magnitude.push_back(std::abs(spectrum_at(bits, clock, w)));
  }
  return t;
}

inline SpectrumTable pulse_spectrum(const BitString& bits, const ClockConfig& clock,
                                    const std::vector<double>& freq_grid,
                                    const EigenModel& model) {
  SpectrumTable t = pulse_spectrum(bits, clock, freq_grid);
  t.leak_freq = model.omega_12() / model.omega_01;
  return t;
}

/// omega_12 / omega_01 = (omega_01 - alpha) / omega_01.
inline double leak_frequency(const EigenModel& model) {
  return (model.omega_01 - model.anharmonicity_exact) / model.omega_01;
}

/// |S_noramp(omega_leak)| / |S_ramped(omega_leak)|; +inf when the ramped
/// sequence has an exact zero there.
inline double leakage_suppression_ratio(const BitString& bits_noramp,
                                        const BitString& bits_ramped,
                                        const ClockConfig& clock, const EigenModel& model) {
  if (bits_noramp.empty() || bits_ramped.empty()) {
    throw ParameterError("spectral ratio needs two non-empty sequences");
  }
  const double w = leak_frequency(model);
  const double num = std::abs(spectrum_at(bits_noramp, clock, w));
  const double den = std::abs(spectrum_at(bits_ramped, clock, w));
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

/// Bare train with one kick per qubit period.
inline BitString bare_train_bits(const ClockConfig& clock, int kicks) {
  BitString bits;
  const std::string cycle = "1" + std::string(static_cast<std::size_t>(clock.multiplier - 1), '0');
  for (int i = 0; i < kicks; ++i) bits += cycle;
  return bits;
}

}  // namespace sfq
