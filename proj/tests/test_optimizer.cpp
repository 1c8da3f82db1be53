#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sfq/optimizer.hpp"
#include "test_support.hpp"

using namespace sfq;
using testing_support::calibrated_model;

namespace {

SearchSpace space(const EigenModel& m, int s, int n, double target = kPi) {
  SearchSpace sp;
  sp.clock = ClockConfig::from_omega(s, m.omega_01);
  sp.ramp_cycles = n;
  sp.train_window = default_train_window(target, sp.kick_angle);
  return sp;
}

}  // namespace

TEST(Enumerate, Counts) {
  const ClockConfig c4 = ClockConfig::from_omega(4, ghz(5.0));
  const ClockConfig c8 = ClockConfig::from_omega(8, ghz(5.0));
  const auto empty = enumerate_ramps(c4, 0);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_TRUE(empty[0].empty());
  EXPECT_EQ(enumerate_ramps(c4, 5).size(), 1024u);
  EXPECT_EQ(enumerate_ramps(c8, 3).size(), 512u);
  EXPECT_THROW(enumerate_ramps(c4, 6), SizeError);
  EXPECT_EQ(enumerate_ramps(c4, 6, 8).size(), 4096u);
  EXPECT_THROW(enumerate_ramps(c4, 2, 9), SizeError);
}

TEST(Enumerate, LexicographicOrder) {
  const ClockConfig c4 = ClockConfig::from_omega(4, ghz(5.0));
  const auto ramps = enumerate_ramps(c4, 2);
  EXPECT_EQ(ramp_to_string(ramps[0]), "0000,0000");
  EXPECT_EQ(ramp_to_string(ramps[1]), "0000,1000");
  EXPECT_EQ(ramp_to_string(ramps[4]), "1000,0000");
  EXPECT_EQ(ramp_to_string(ramps[15]), "1100,1100");
  for (std::size_t i = 0; i < ramps.size(); ++i) EXPECT_EQ(ramps[i], ramp_from_index(c4, 2, i));
}

TEST(SearchSpace, CandidateCount) {
  const SearchSpace sp = space(calibrated_model(), 4, 4);
  EXPECT_EQ(sp.train_window.size(), 31);
  EXPECT_EQ(sp.candidate_count(), 256u * 31u);
  EXPECT_EQ(default_train_window(0.05, 0.03).lo, 0);
}

TEST(DragPrune, NetXKicks) {
  Ramp zeros(3, RampCycle::from_string("0000"));
  EXPECT_DOUBLE_EQ(net_x_kicks(zeros), 0.0);
  Ramp x3(3, RampCycle::from_string("0100"));
  EXPECT_NEAR(net_x_kicks(x3), 3.0, 1e-15);
  EXPECT_NEAR(net_x_kicks({RampCycle::from_string("11100000")}), std::sqrt(0.5) + 1.0, 1e-15);
}

TEST(DragPrune, BandCentre) {
  const EigenModel& m = calibrated_model();
  const ClockConfig c = ClockConfig::from_omega(4, m.omega_01);
  const double unit = 1.0 / (m.anharmonicity_exact * c.qubit_period);
  EXPECT_NEAR(unit, 3.18, 0.01);
  Ramp zeros(3, RampCycle::from_string("0000"));
  EXPECT_TRUE(drag_prune_predicate(zeros, c, m, DragPrune{0.0, 1.0}));
  EXPECT_FALSE(drag_prune_predicate(zeros, c, m, DragPrune{0.5, 1.0}));
  Ramp x3(3, RampCycle::from_string("0100"));
  EXPECT_TRUE(drag_prune_predicate(x3, c, m, DragPrune{0.8, 1.2}));
}

TEST(Search, TwoLevelBareTrain) {
  const EigenModel m = ideal_two_level(ghz(5.0));
  SearchSpace sp = space(m, 4, 0);
  sp.train_window = TrainWindow{95, 115};
  const RampSearchResult r = search(m, TargetGate::y_rotation(kPi), sp);
  EXPECT_NEAR(r.best_schedule.train_length, 105, 1);
  EXPECT_EQ(r.candidates_evaluated, 21u);
}

TEST(Search, MatchesBruteForceOracle) {
  const EigenModel m = ideal_two_level(ghz(5.0));
  const TargetGate target = TargetGate::y_rotation(kPi / 2);
  SearchSpace sp = space(m, 4, 1, kPi / 2);
  const RampSearchResult r = search(m, target, sp);

  const char* alphabet[] = {"0000", "1000", "0100", "1100"};
  const char* mirrors[] = {"0000", "1000", "0001", "1001"};
  double best = -1;
  int best_kicks = 0;
  for (int a = 0; a < 4; ++a) {
    for (int n = sp.train_window.lo; n <= sp.train_window.hi; ++n) {
      std::string bits = alphabet[a];
      for (int i = 0; i < n; ++i) bits += "1000";
      bits += mirrors[a];
      const double f = oracle::avg_fidelity(oracle::two_level_product(bits, 4, 0.03), oracle::ry(kPi / 2));
      const int kicks = static_cast<int>(std::count(bits.begin(), bits.end(), '1'));
      if (f > best + 1e-15 || (std::abs(f - best) <= 1e-15 && kicks < best_kicks)) {
        best = f;
        best_kicks = kicks;
      }
    }
  }
  EXPECT_NEAR(r.report.avg_fidelity, best, 1e-12);
  EXPECT_EQ(r.best_schedule.total_kicks(), best_kicks);
}

TEST(Search, ReportBeatsEveryCandidate) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 4, 2);
  sp.record_per_ramp = true;
  const RampSearchResult r = search(m, TargetGate::y_rotation(kPi), sp);
  ASSERT_EQ(r.per_ramp_bests.size(), 16u);
  for (const auto& b : r.per_ramp_bests) EXPECT_LE(b.avg_fidelity, r.report.avg_fidelity + 1e-12);
}

TEST(Search, DeterministicAcrossThreadCounts) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 8, 2);
  const RampSearchResult one = search(m, TargetGate::y_rotation(kPi), sp);
  for (int threads : {2, 3, 7}) {
    sp.threads = threads;
    const RampSearchResult many = search(m, TargetGate::y_rotation(kPi), sp);
    EXPECT_EQ(many.best_schedule.on_ramp, one.best_schedule.on_ramp);
    EXPECT_EQ(many.best_schedule.train_length, one.best_schedule.train_length);
    EXPECT_EQ(many.report.avg_fidelity, one.report.avg_fidelity);
    EXPECT_EQ(many.candidates_evaluated, one.candidates_evaluated);
  }
}

TEST(Search, NestedMonotonicity) {
  const EigenModel& m = calibrated_model();
  double previous = 0;
  for (int n = 0; n <= 5; ++n) {
    const double f = search(m, TargetGate::y_rotation(kPi), space(m, 4, n)).report.avg_fidelity;
    EXPECT_GE(f, previous - 1e-12) << "n=" << n;
    previous = f;
  }
}

TEST(Search, PruningNeverInventsCandidates) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 4, 3);
  const RampSearchResult full = search(m, TargetGate::y_rotation(kPi), sp);
  sp.drag_prune = DragPrune{0.25, 1.5};
  const RampSearchResult pruned = search(m, TargetGate::y_rotation(kPi), sp);
  EXPECT_LE(pruned.report.avg_fidelity, full.report.avg_fidelity + 1e-15);
  EXPECT_LT(pruned.candidates_evaluated, full.candidates_evaluated);
  const bool same = pruned.best_schedule.on_ramp == full.best_schedule.on_ramp &&
                    pruned.best_schedule.train_length == full.best_schedule.train_length;
  EXPECT_EQ(pruned.prune_changed_winner, !same);
}

TEST(Search, EmptyPrunedSpace) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 4, 1);
  sp.drag_prune = DragPrune{1.9, 2.0};
  EXPECT_THROW(search(m, TargetGate::y_rotation(kPi), sp), NoCandidates);
}

TEST(Search, InvalidSpaces) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 4, 6);
  EXPECT_THROW(search(m, TargetGate::y_rotation(kPi), sp), SizeError);
  sp = space(m, 4, 1);
  sp.train_window = TrainWindow{10, 5};
  EXPECT_THROW(search(m, TargetGate::y_rotation(kPi), sp), ParameterError);
}

TEST(Search, AlternateObjectives) {
  const EigenModel& m = calibrated_model();
  SearchSpace sp = space(m, 4, 2);
  const RampSearchResult avg = search(m, TargetGate::y_rotation(kPi), sp);
  sp.objective = Objective::Leakage;
  const RampSearchResult leak = search(m, TargetGate::y_rotation(kPi), sp);
  sp.objective = Objective::Phase;
  const RampSearchResult phase = search(m, TargetGate::y_rotation(kPi), sp);
  EXPECT_LE(leak.report.leakage, avg.report.leakage);
  EXPECT_LE(phase.report.err_phase, avg.report.err_phase);
  EXPECT_EQ(objective_from_string("phase"), Objective::Phase);
  EXPECT_THROW(objective_from_string("speed"), ParameterError);
}

TEST(AngleSweep, TableShapeAndTrend) {
  const EigenModel& m = calibrated_model();
  const auto rows = angle_sweep(m, space(m, 4, 0), {kPi}, {0, 1, 2, 3, 4, 5});
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].fidelity, rows[i - 1].fidelity - 1e-12);
    EXPECT_EQ(rows[i].ramp_cycles, static_cast<int>(i));
  }
  EXPECT_EQ(rows[5].bit_count, 17);
  EXPECT_THROW(angle_sweep(m, space(m, 4, 0), {0.0}, {0}), ParameterError);
}

TEST(AngleSweep, SmallAnglesAreDiscretizationLimited) {
  const EigenModel& m = calibrated_model();
  const auto rows = angle_sweep(m, space(m, 4, 0), {0.01}, {0});
  EXPECT_GT(rows[0].err_discrete, rows[0].err_phase);
  EXPECT_GT(rows[0].err_discrete, rows[0].leakage);
}
