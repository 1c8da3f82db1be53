#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sfq/optimizer.hpp"
#include "sfq/spectrum.hpp"
#include "test_support.hpp"

using namespace sfq;
using testing_support::calibrated_model;

namespace {

const ClockConfig kClock4 = ClockConfig::from_omega(4, ghz(5.0));

}  // namespace

TEST(Spectrum, BareTrainResonance) {
  const BitString bits = bare_train_bits(kClock4, 37);
  EXPECT_NEAR(std::abs(spectrum_at(bits, kClock4, 1.0)), 37.0, 1e-10);
  EXPECT_NEAR(std::abs(spectrum_at(bits, kClock4, 0.0)), 37.0, 1e-12);
}

TEST(Spectrum, SingleKickIsFlat) {
  const SpectrumTable t = pulse_spectrum("0010", kClock4, default_grid(64, 0.0, 4.0));
  for (double v : t.magnitude) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Spectrum, DefaultGrid) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 2048u);
  EXPECT_DOUBLE_EQ(g.front(), 0.5);
  EXPECT_DOUBLE_EQ(g.back(), 1.5);
  EXPECT_THROW(default_grid(1), ParameterError);
}

TEST(Spectrum, MatchesDtftOracle) {
  std::mt19937_64 rng(11);
  BitString bits;
  for (int i = 0; i < 400; ++i) bits += (rng() % 3 == 0) ? '1' : '0';
  const SpectrumTable t = pulse_spectrum(bits, kClock4, default_grid());
  for (std::size_t i = 0; i < t.freq_grid.size(); ++i) {
    EXPECT_NEAR(t.magnitude[i], oracle::dtft_magnitude(bits, 4, t.freq_grid[i]), 1e-12);
  }
}

TEST(Spectrum, BoundedPeriodicAndShiftInvariant) {
  const BitString bits = "0100" + std::string("1000") + "1000" + "1100" + "0001";
  const int kicks = 6;
  for (double w : {0.3, 0.77, 1.2, 2.9}) {
    const double a = std::abs(spectrum_at(bits, kClock4, w));
    EXPECT_LE(a, kicks + 1e-12);
    EXPECT_NEAR(a, std::abs(spectrum_at(bits, kClock4, w + 4.0)), 1e-12);
    EXPECT_NEAR(a, std::abs(spectrum_at("000" + bits, kClock4, w)), 1e-12);
  }
  EXPECT_THROW(pulse_spectrum(bits, kClock4, {4.5}), ParameterError);
}

TEST(Spectrum, LeakFrequency) {
  const EigenModel& m = calibrated_model();
  EXPECT_NEAR(leak_frequency(m), 0.95, 1e-6);
  EXPECT_NEAR(leak_frequency(m), m.omega_12() / m.omega_01, 1e-14);
  const SpectrumTable t = pulse_spectrum("1000", kClock4, {1.0}, m);
  EXPECT_DOUBLE_EQ(t.leak_freq, leak_frequency(m));
}

TEST(Spectrum, RatioEdgeCases) {
  const EigenModel& m = calibrated_model();
  const BitString bits = bare_train_bits(kClock4, 20);
  EXPECT_DOUBLE_EQ(leakage_suppression_ratio(bits, bits, kClock4, m), 1.0);
  EXPECT_THROW(leakage_suppression_ratio("", bits, kClock4, m), ParameterError);
  // A kick-free sequence has an exactly vanishing spectrum.
  EXPECT_EQ(leakage_suppression_ratio(bits, "0000", kClock4, m),
            std::numeric_limits<double>::infinity());
}

TEST(Spectrum, RampsSuppressLeakageComponent) {
  const EigenModel& m = calibrated_model();
  const double w = leak_frequency(m);
  double previous = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 4; ++n) {
    SearchSpace sp;
    sp.clock = ClockConfig::from_omega(4, m.omega_01);
    sp.ramp_cycles = n;
    sp.train_window = default_train_window(kPi, 0.03);
    const PulseSchedule s = search(m, TargetGate::y_rotation(kPi), sp).best_schedule;
    const double mag = std::abs(spectrum_at(expand_bits(s), s.clock, w));
    EXPECT_LE(mag, previous * 1.1) << "n=" << n;
    previous = mag;
    if (n == 4) {
      // The dip sits within 0.01 of the leak frequency.
      const SpectrumTable t = pulse_spectrum(expand_bits(s), s.clock, default_grid(), m);
      bool dip = false;
      for (std::size_t i = 1; i + 1 < t.magnitude.size(); ++i) {
        const bool local_min = t.magnitude[i] <= t.magnitude[i - 1] && t.magnitude[i] <= t.magnitude[i + 1];
        if (local_min && std::abs(t.freq_grid[i] - w) < 0.01) dip = true;
      }
      EXPECT_TRUE(dip);
      const double ratio = leakage_suppression_ratio(bare_train_bits(s.clock, s.total_kicks()),
                                                     expand_bits(s), s.clock, m);
      EXPECT_GT(ratio, 10.0);
    }
  }
}
