// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sfq/sfq.hpp"

using namespace sfq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Runs one criterion; an escaping exception counts as a failure.
void criterion(int id, const std::string& what, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, what, std::string("exception: ") + e.what());
  }
}

SearchSpace space_for(const EigenModel& m, int clock, int cycles, double target) {
  SearchSpace sp;
  sp.clock = ClockConfig::from_omega(clock, m.omega_01);
  sp.kick_angle = 0.03;
  sp.ramp_cycles = cycles;
  sp.train_window = default_train_window(target, sp.kick_angle);
  sp.objective = Objective::AverageFidelity;
  sp.threads = 1;
  return sp;
}

RampSearchResult best_gate(const EigenModel& m, int clock, int cycles, double target) {
  return search(m, TargetGate::y_rotation(target), space_for(m, clock, cycles, target));
}

PulseSchedule random_schedule(std::mt19937_64& rng, const EigenModel& m, int clock, int max_train) {
  PulseSchedule s;
  s.clock = ClockConfig::from_omega(clock, m.omega_01);
  s.kick_angle = 0.03;
  std::uniform_int_distribution<int> cycles(0, 5), letter(0, s.clock.alphabet_size() - 1),
      train(0, max_train);
  const int n = cycles(rng);
  for (int k = 0; k < n; ++k) s.on_ramp.push_back(alphabet_cycle(s.clock, letter(rng)));
  s.train_length = train(rng);
  return s;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  EigenModel model;

  criterion(1, "calibration", [&] {
    const auto t0 = Clock::now();
    model = build_model(calibrate(ghz(5.0), mhz(250.0)));
    const double dt = seconds_since(t0);
    const double d01 = std::abs(model.omega_01 - ghz(5.0)) / kTwoPi;
    const double dalpha = std::abs(model.anharmonicity_exact - mhz(250.0)) / kTwoPi;
    const double ratio = model.spec->ratio();
    const bool ok = d01 <= 1e3 && dalpha <= 1e3 && ratio >= 60 && ratio <= 80 && dt < 5.0;
    report(1, ok, "calibration",
           fmt("EJ/EC=%.3f |d w01|=%.2e Hz |d alpha|=%.2e Hz", ratio, d01, dalpha) +
               fmt(" in %.2f s", dt));
  });
  if (model.levels() == 0) {
    std::printf("calibration failed; remaining criteria skipped\n");
    return 1;
  }

  RampSearchResult four4;
  criterion(2, "4x 4-cycle R_Y(pi) error", [&] {
    const auto t0 = Clock::now();
    four4 = best_gate(model, 4, 4, kPi);
    const double dt = seconds_since(t0);
    const bool count_ok = four4.candidates_evaluated == 256u * 31u;
    const double err = four4.report.error();
    report(2, count_ok && err <= 1e-4 && dt < 60.0, "4x 4-cycle R_Y(pi) error",
           fmt("error=%.3e (bound 1e-4) N=%.0f", err, four4.best_schedule.train_length) +
               " ramp=" + ramp_to_string(four4.best_schedule.on_ramp) +
               fmt(" candidates=%.0f in %.2f s", static_cast<double>(four4.candidates_evaluated), dt));
  });

  RampSearchResult four5, eight5;
  criterion(3, "8x vs 4x, 5-cycle ramps", [&] {
    four5 = best_gate(model, 4, 5, kPi);
    eight5 = best_gate(model, 8, 5, kPi);
    const double e4 = four5.report.error(), e8 = eight5.report.error();
    const double gain = e4 / e8;
    std::string detail = fmt("err4x=%.3e err8x=%.3e improvement=%.2fx (need >= 5x)", e4, e8, gain);
    if (gain >= 10.0) detail += ", full 10x met";
    report(3, e8 <= 0.2 * e4, "8x vs 4x, 5-cycle ramps", detail);
  });

  criterion(4, "compact encoding", [&] {
    bool ok = true;
    std::string detail;
    for (const RampSearchResult* r : {&four5, &eight5}) {
      const PulseSchedule& s = r->best_schedule;
      const int expected = s.clock.multiplier == 4 ? 17 : 22;
      const int bits = encode_compact(s).bit_count();
      ok = ok && s.train_length <= 127 && bits == expected;
      detail += fmt("%.0fx: N=%.0f bits=%.0f; ", s.clock.multiplier, s.train_length, bits);
    }
    long roundtrips = 0, mismatches = 0;
    for (int clock : {4, 8}) {
      const ClockConfig c = ClockConfig::from_omega(clock, model.omega_01);
      for (int n = 0; n <= 2; ++n) {
        for (const Ramp& ramp : enumerate_ramps(c, n, n)) {
          for (int N = 0; N <= 127; ++N) {
            PulseSchedule s;
            s.clock = c;
            s.kick_angle = 0.03;
            s.on_ramp = ramp;
            s.train_length = N;
            const CompactEncoding e = encode_compact(s);
            CompactEncoding wire = CompactEncoding::with_header(e.header());
            wire.bits = CompactEncoding::bits_from_hex(e.to_hex(), e.bit_count());
            const PulseSchedule d = decode_compact(wire, c, 0.03);
            ++roundtrips;
            if (!(d.on_ramp == s.on_ramp) || d.train_length != N || !(encode_compact(d).bits == e.bits)) {
              ++mismatches;
            }
          }
        }
      }
    }
    ok = ok && mismatches == 0;
    report(4, ok, "compact encoding",
           detail + fmt("roundtrip %.0f/%.0f", static_cast<double>(roundtrips - mismatches),
                        static_cast<double>(roundtrips)));
  });

  criterion(5, "spectral suppression", [&] {
    const auto t0 = Clock::now();
    const PulseSchedule& s = four4.best_schedule;
    const BitString ramped = expand_bits(s);
    const BitString bare = bare_train_bits(s.clock, s.total_kicks());
    const double ratio = leakage_suppression_ratio(bare, ramped, s.clock, model);
    const double dt = seconds_since(t0);
    const double w = leak_frequency(model);
    const double oracle_ratio = oracle::dtft_magnitude(bare, 4, w) / oracle::dtft_magnitude(ramped, 4, w);
    const bool ok = ratio > 10.0 && std::abs(ratio - oracle_ratio) <= 1e-9 * oracle_ratio && dt < 1.0;
    report(5, ok, "spectral suppression",
           fmt("|S_train|/|S_ramped| at w=%.4f: %.2f in %.3f s", w, ratio, dt));
  });

  criterion(6, "ramp monotonicity", [&] {
    bool ok = true;
    std::string detail;
    for (int clock : {4, 8}) {
      for (double target : {kPi / 4, kPi / 2, kPi}) {
        double prev = -1.0;
        for (int n = 0; n <= 5; ++n) {
          const double f = best_gate(model, clock, n, target).report.avg_fidelity;
          if (f < prev - 1e-12) {
            ok = false;
            detail += fmt("drop at %.0fx theta=%.4f n=%.0f; ", clock, target, n);
          }
          prev = std::max(prev, f);
        }
        detail += fmt("%.0fx/%.3f: %.2e ", clock, target, 1.0 - prev);
      }
    }
    report(6, ok, "ramp monotonicity", "best error at n=5 " + detail);
  });

  criterion(7, "closed/open consistency", [&] {
    std::mt19937_64 rng(7);
    const TargetGate target = TargetGate::y_rotation(kPi);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const PulseSchedule s = random_schedule(rng, model, i % 2 ? 8 : 4, 120);
      const double closed =
          average_fidelity(project_computational(sequence_propagator(model, s), model), target).avg_fidelity;
      const double open = channel_fidelity(evolve_channel(model, s, NoiseConfig{}), target).avg_fidelity;
      worst = std::max(worst, std::abs(open - closed));
    }
    report(7, worst <= 1e-8, "closed/open consistency", fmt("max |dF| = %.2e over 20 schedules", worst));
  });

  criterion(8, "two-level oracle", [&] {
    std::mt19937_64 rng(8);
    const EigenModel two = ideal_two_level(model.omega_01);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int clock = i % 2 ? 8 : 4;
      const PulseSchedule s = random_schedule(rng, two, clock, 150);
      const Matrix2c u = project_computational(sequence_propagator(two, s), two).u;
      const oracle::M2 ref = oracle::two_level_product(expand_bits(s), clock, 0.03);
      worst = std::max(worst, (u - ref).norm());
    }
    report(8, worst <= 1e-12, "two-level oracle", fmt("max ||U - U_oracle|| = %.2e over 100", worst));
  });

  criterion(9, "Lindblad physics", [&] {
    std::mt19937_64 rng(9);
    double defect = 0.0;
    for (int i = 0; i < 10; ++i) {
      const PulseSchedule s = random_schedule(rng, model, i % 2 ? 8 : 4, 120);
      NoiseConfig noise;
      noise.gamma = 1.0 / 20e-6;
      noise.jitter_sigma = i % 2 ? 2e-12 : 0.0;
      noise.rng_seed = static_cast<std::uint64_t>(i);
      defect = std::max(defect, evolve_channel(model, s, noise).max_trace_defect);
    }
    const double gamma = 1.0 / 50e-6, r = model.zero_point_r;
    const EigenModel two = ideal_two_level(model.omega_01, r);
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(k * 5e-6);
    const double t1 = 1.0 / fit_decay_rate(times, free_decay_populations(two, gamma, times));
    const double expected = 1.0 / (gamma * r * r);
    const double rel = std::abs(t1 / expected - 1.0);
    report(9, defect <= 1e-9 && rel <= 0.02, "Lindblad physics",
           fmt("max trace defect %.2e; T1=%.3f us vs %.3f us", defect, t1 * 1e6, expected * 1e6));
  });

  criterion(10, "robustness sweep", [&] {
    const auto t0 = Clock::now();
    std::vector<PulseSchedule> schedules;
    for (int n : {0, 2, 5}) schedules.push_back(best_gate(model, 8, n, kPi).best_schedule);
    SweepConfig cfg;
    cfg.samples = 100;
    cfg.seed = 1;
    cfg.threads = 1;
    cfg.delta_omega_grid.clear();
    const double step = mhz(0.5);
    for (int k = -12; k <= 12; ++k) cfg.delta_omega_grid.push_back(k * step);
    const RobustnessResult r = robustness_sweep(model, schedules, cfg, TargetGate::y_rotation(kPi));
    const double dt = seconds_since(t0);
    const double w0 = r.summaries.front().best_delta_omega, w5 = r.summaries.back().best_delta_omega;
    const bool ok = dt < 300.0 && r.samples.size() == 300 && w0 != 0.0 && std::abs(w5) < step;
    std::string detail = fmt("dw*(0)=%.2f MHz dw*(5)=%.2f MHz in %.1f s", w0 / mhz(1.0), w5 / mhz(1.0), dt);
    for (const auto& s : r.summaries) {
      detail += fmt("; n=%.0f median F=%.5f", s.ramp_cycles, s.median);
    }
    report(10, ok, "robustness sweep", detail);
  });

  std::printf("%d of 10 criteria failed, %.1f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
