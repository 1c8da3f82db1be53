// Calibrates a 5 GHz transmon, searches the 4x clock for the best R_Y(pi)
// with a four-cycle ramp, and prints the schedule and its error budget.

#include <cstdio>

#include "sfq/metrics.hpp"
#include "sfq/optimizer.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

int main() {
  using namespace sfq;
  const EigenModel model = build_model(calibrate(ghz(5.0), mhz(250.0)));

  SearchSpace space;
  space.clock = ClockConfig::from_omega(4, model.omega_01);
  space.ramp_cycles = 4;
  space.train_window = default_train_window(kPi, space.kick_angle);

  const TargetGate target = TargetGate::y_rotation(kPi);
  const RampSearchResult best = search(model, target, space);
  const CompactEncoding code = encode_compact(best.best_schedule);

  std::printf("E_J/E_C      %.3f\n", model.spec->ratio());
  std::printf("on-ramp      %s\n", ramp_to_string(best.best_schedule.on_ramp).c_str());
  std::printf("train N      %d\n", best.best_schedule.train_length);
  std::printf("gate error   %.3e\n", best.report.error());
  std::printf("leakage      %.3e\n", best.report.leakage);
  std::printf("phase error  %.3e\n", best.report.err_phase);
  std::printf("register     %d bits, 0x%s\n", code.bit_count(), code.to_hex().c_str());
  return 0;
}
