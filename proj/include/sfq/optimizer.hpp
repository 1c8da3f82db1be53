#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sfq/core.hpp"
#include "sfq/metrics.hpp"
#include "sfq/propagator.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

namespace sfq {

enum class Objective { AverageFidelity, Leakage, Phase };

inline std::string to_string(Objective o) {
  switch (o) {
    case Objective::AverageFidelity: return "avg";
    case Objective::Leakage: return "leakage";
    case Objective::Phase: return "phase";
  }
  return "avg";
}

inline Objective objective_from_string(const std::string& s) {
  if (s == "avg") return Objective::AverageFidelity;
  if (s == "leakage") return Objective::Leakage;
  if (s == "phase") return Objective::Phase;
  throw ParameterError("unknown objective '" + s + "' (expected avg, leakage or phase)");
}

/// Inclusive range of train lengths.
struct TrainWindow {
  int lo = 0;
  int hi = 0;
  int size() const { return hi - lo + 1; }
};

/// round(theta_t / theta) +- half_width, clipped at zero.
inline TrainWindow default_train_window(double theta_target, double kick_angle,
                                        int half_width = 15) {
  const int center = static_cast<int>(std::lround(theta_target / kick_angle));
  return TrainWindow{std::max(0, center - half_width), center + half_width};
}

/// Band of DRAG coefficients c for the quantized condition n_x = c / (alpha T).
struct DragPrune {
  double c_lo = 0.0;
  double c_hi = 2.0;
};

inline constexpr int kDefaultRampCap = 5;
inline constexpr int kHardRampCap = 8;

struct SearchSpace {
  ClockConfig clock;
  int ramp_cycles = 0;
  TrainWindow train_window;
  double kick_angle = 0.03;
  std::optional<DragPrune> drag_prune;
  Objective objective = Objective::AverageFidelity;
  int threads = 1;
  int ramp_cap = kDefaultRampCap;
  bool record_per_ramp = false;
  bool verify_prune = true;

  std::size_t candidate_count() const {
    std::size_t ramps = 1;
    for (int i = 0; i < ramp_cycles; ++i) ramps *= static_cast<std::size_t>(clock.alphabet_size());
    return ramps * static_cast<std::size_t>(std::max(0, train_window.size()));
  }
};

struct RampBest {
  Ramp ramp;
  int train_length = 0;
  double avg_fidelity = 0.0;
  double score = 0.0;
};

struct RampSearchResult {
  PulseSchedule best_schedule;
  GateReport report;
  std::size_t candidates_evaluated = 0;
  std::vector<RampBest> per_ramp_bests;
  bool prune_changed_winner = false;
};

inline std::size_t ramp_count(const ClockConfig& clock, int n) {
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) count *= static_cast<std::size_t>(clock.alphabet_size());
  return count;
}

/// The index-th ramp in lexicographic order (first cycle most significant).
inline Ramp ramp_from_index(const ClockConfig& clock, int n, std::size_t index) {
  const auto a = static_cast<std::size_t>(clock.alphabet_size());
  Ramp r(static_cast<std::size_t>(n));
  for (int j = n - 1; j >= 0; --j) {
    r[static_cast<std::size_t>(j)] = alphabet_cycle(clock, static_cast<int>(index % a));
    index /= a;
  }
  return r;
}

inline std::vector<Ramp> enumerate_ramps(const ClockConfig& clock, int n,
                                         int cap = kDefaultRampCap) {
  if (cap > kHardRampCap) throw SizeError("ramp cap exceeds the hard limit of 8");
  if (n < 0 || n > cap) {
    throw SizeError("ramp length " + std::to_string(n) + " outside [0, " +
                    std::to_string(cap) + "]");
  }
  std::vector<Ramp> out;
  const std::size_t count = ramp_count(clock, n);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ramp_from_index(clock, n, i));
  return out;
}

/// Net X-quadrature kick count of an on-ramp: sum of sin(2 pi k / S) over kicks.
inline double net_x_kicks(const Ramp& ramp) {
  double nx = 0.0;
  for (const auto& c : ramp) {
    for (int k = 0; k < c.slots; ++k) {
      if (c.kick(k)) nx += std::sin(kTwoPi * k / c.slots);
    }
  }
  return nx;
}

/// Keeps ramps whose n_x lies in [c_lo, c_hi] / (alpha T).
inline bool drag_prune_predicate(const Ramp& ramp, const ClockConfig& clock,
                                 const EigenModel& model, const DragPrune& band) {
  const double unit = 1.0 / (model.anharmonicity_exact * clock.qubit_period);
  const double nx = net_x_kicks(ramp);
  constexpr double kSlack = 1e-9;
  return nx >= band.c_lo * unit - kSlack && nx <= band.c_hi * unit + kSlack;
}

namespace detail {

struct Candidate {
  double score = -1e300;  // larger is better
  double avg_fidelity = 0.0;
  int kicks = 0;
  std::size_t ramp_index = 0;
  int train_length = 0;
  bool valid = false;

  // Total order: score, then fewer kicks, smaller ramp index, smaller N.
  bool better_than(const Candidate& o) const {
    if (!o.valid) return valid;
    if (!valid) return false;
    if (score != o.score) return score > o.score;
    if (kicks != o.kicks) return kicks < o.kicks;
    if (ramp_index != o.ramp_index) return ramp_index < o.ramp_index;
    return train_length < o.train_length;
  }
};

inline double objective_score(const Matrix2c& uq, const TargetGate& target, Objective obj,
                              double* avg_out) {
  const double f_pro = process_fidelity(uq, target);
  const double l = leakage(uq);
  const double avg = average_fidelity_from(f_pro, l);
  *avg_out = avg;
  switch (obj) {
    case Objective::AverageFidelity: return avg;
    case Objective::Leakage: return -l;
    case Objective::Phase: {
      try {
        return -std::norm(pauli_decompose(ProjectedGate{uq}).c_z());
      } catch (const DegenerateGate&) {
        return -1e300;
      }
    }
  }
  return avg;
}

// Shared read-only tables for one search: cycle unitaries and train powers.
struct SearchTables {
  std::vector<CMatrix> cycle;     // by alphabet index
  std::vector<CMatrix> mirrored;  // mirror of each alphabet cycle
  std::vector<CMatrix> train;     // C^N for N in the window
};

inline SearchTables build_tables(const EigenModel& model, const SearchSpace& space) {
  SearchTables t;
  const auto& clock = space.clock;
  for (int i = 0; i < clock.alphabet_size(); ++i) {
    const RampCycle c = alphabet_cycle(clock, i);
    t.cycle.push_back(bits_propagator(model, c.to_string(), clock, space.kick_angle).matrix);
    t.mirrored.push_back(
        bits_propagator(model, mirror_cycle(c).to_string(), clock, space.kick_angle).matrix);
  }
  const BitString train_cycle = "1" + std::string(static_cast<std::size_t>(clock.multiplier - 1), '0');
  const CMatrix step = bits_propagator(model, train_cycle, clock, space.kick_angle).matrix;
  const int d = model.levels();
  CMatrix power = CMatrix::Identity(d, d);
  for (int n = 0; n < space.train_window.lo; ++n) power = step * power;
  for (int n = space.train_window.lo; n <= space.train_window.hi; ++n) {
    t.train.push_back(power);
    power = step * power;
  }
  return t;
}

struct WorkerResult {
  Candidate best;
  std::vector<std::pair<std::size_t, Candidate>> per_ramp;
  std::size_t evaluated = 0;
};

inline WorkerResult search_range(const EigenModel& model, const TargetGate& target,
                                 const SearchSpace& space, const SearchTables& tables,
                                 const std::vector<std::size_t>& ramps, std::size_t begin,
                                 std::size_t end) {
  WorkerResult out;
  const int d = model.levels();
  const int n = space.ramp_cycles;
  const auto a = static_cast<std::size_t>(space.clock.alphabet_size());
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (std::size_t r = begin; r < end; ++r) {
    const std::size_t index = ramps[r];
    std::size_t rest = index;
    int ramp_kick_count = 0;
    for (int j = n - 1; j >= 0; --j) {
      digits[static_cast<std::size_t>(j)] = static_cast<int>(rest % a);
      rest /= a;
      ramp_kick_count += std::popcount(static_cast<unsigned>(digits[static_cast<std::size_t>(j)]));
    }
    CMatrix on = CMatrix::Identity(d, d);
    CMatrix off = CMatrix::Identity(d, d);
    for (int j = 0; j < n; ++j) {
      const auto idx = static_cast<std::size_t>(digits[static_cast<std::size_t>(j)]);
      on = tables.cycle[idx] * on;
      off = off * tables.mirrored[idx];
    }
    const Eigen::MatrixXcd rows = off.topRows(2);
    const Eigen::MatrixXcd cols = on.leftCols(2);

    Candidate ramp_best;
    for (int w = 0; w < space.train_window.size(); ++w) {
      const Matrix2c uq = rows * tables.train[static_cast<std::size_t>(w)] * cols;
      Candidate c;
      c.valid = true;
      c.score = objective_score(uq, target, space.objective, &c.avg_fidelity);
      c.train_length = space.train_window.lo + w;
      c.kicks = c.train_length + 2 * ramp_kick_count;
      c.ramp_index = index;
      ++out.evaluated;
      if (c.better_than(ramp_best)) ramp_best = c;
    }
    if (ramp_best.better_than(out.best)) out.best = ramp_best;
    if (space.record_per_ramp) out.per_ramp.emplace_back(index, ramp_best);
  }
  return out;
}

}  // namespace detail

/// Exhaustive search over every (on-ramp, N) pair in the space. The winner is
/// independent of the thread count: workers own static index blocks and the
/// reduction uses a total order.
inline RampSearchResult search(const EigenModel& model, const TargetGate& target,
                               const SearchSpace& space) {
  if (space.clock.multiplier != 4 && space.clock.multiplier != 8) {
    throw ParameterError("clock multiplier must be 4 or 8");
  }
  if (space.ramp_cap > kHardRampCap) throw SizeError("ramp cap exceeds the hard limit of 8");
  if (space.ramp_cycles < 0 || space.ramp_cycles > space.ramp_cap) {
    throw SizeError("ramp length " + std::to_string(space.ramp_cycles) + " outside [0, " +
                    std::to_string(space.ramp_cap) + "]");
  }
  if (space.train_window.lo < 0 || space.train_window.size() <= 0) {
    throw ParameterError("train window must be a non-empty range of non-negative lengths");
  }
  if (model.levels() < 2) throw ParameterError("model needs at least two levels");

  const std::size_t total = ramp_count(space.clock, space.ramp_cycles);
  std::vector<std::size_t> ramps;
  ramps.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (space.drag_prune) {
      const Ramp r = ramp_from_index(space.clock, space.ramp_cycles, i);
      if (!drag_prune_predicate(r, space.clock, model, *space.drag_prune)) continue;
    }
    ramps.push_back(i);
  }
  if (ramps.empty()) throw NoCandidates("no ramps survive the DRAG pruning band");

  const detail::SearchTables tables = detail::build_tables(model, space);
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, space.threads)), 1, ramps.size());
  std::vector<detail::WorkerResult> parts(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (ramps.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(ramps.size(), w * chunk);
      const std::size_t e = std::min(ramps.size(), b + chunk);
      auto job = [&, w, b, e] {
        parts[w] = detail::search_range(model, target, space, tables, ramps, b, e);
      };
      if (workers == 1) {
        job();
      } else {
        pool.emplace_back(job);
      }
    }
  }

  RampSearchResult result;
  detail::Candidate best;
  for (const auto& p : parts) {
    if (p.best.better_than(best)) best = p.best;
    result.candidates_evaluated += p.evaluated;
    for (const auto& [index, c] : p.per_ramp) {
      result.per_ramp_bests.push_back(RampBest{ramp_from_index(space.clock, space.ramp_cycles, index),
                                               c.train_length, c.avg_fidelity, c.score});
    }
  }

  PulseSchedule s;
  s.clock = space.clock;
  s.kick_angle = space.kick_angle;
  s.on_ramp = ramp_from_index(space.clock, space.ramp_cycles, best.ramp_index);
  s.train_length = best.train_length;
  result.best_schedule = s;
  result.report =
      evaluate_gate(project_computational(sequence_propagator(model, s), model), target);

  if (space.drag_prune && space.verify_prune) {
    SearchSpace full = space;
    full.drag_prune.reset();
    full.record_per_ramp = false;
    const RampSearchResult reference = search(model, target, full);
    result.prune_changed_winner =
        reference.best_schedule.on_ramp != s.on_ramp ||
        reference.best_schedule.train_length != s.train_length;
  }
  return result;
}

struct SweepRow {
  double angle = 0.0;
  int clock_multiplier = 4;
  int ramp_cycles = 0;
  double fidelity = 0.0;
  double error = 0.0;
  double leakage = 0.0;
  double err_discrete = 0.0;
  double err_phase = 0.0;
  int train_length = 0;
  std::string ramp;
  int bit_count = 0;
};

/// Best gate per (angle, ramp length). `base` supplies the clock, kick angle,
/// objective and threads; each angle gets the default train window unless
/// `window` is given.
inline std::vector<SweepRow> angle_sweep(const EigenModel& model, const SearchSpace& base,
                                         const std::vector<double>& angles,
                                         const std::vector<int>& ramp_lengths,
                                         std::optional<TrainWindow> window = std::nullopt) {
  std::vector<SweepRow> rows;
  for (double angle : angles) {
    if (!(angle > 0.0 && angle < kTwoPi)) {
      throw ParameterError("sweep angles must lie in (0, 2 pi)");
    }
    const TargetGate target = TargetGate::y_rotation(angle);
    for (int n : ramp_lengths) {
      SearchSpace space = base;
      space.ramp_cycles = n;
      space.train_window = window.value_or(default_train_window(angle, base.kick_angle));
      space.record_per_ramp = false;
      const RampSearchResult res = search(model, target, space);
      SweepRow row;
      row.angle = angle;
      row.clock_multiplier = base.clock.multiplier;
      row.ramp_cycles = n;
      row.fidelity = res.report.avg_fidelity;
      row.error = res.report.error();
      row.leakage = res.report.leakage;
      row.err_discrete = res.report.err_discrete;
      row.err_phase = res.report.err_phase;
      row.train_length = res.best_schedule.train_length;
      row.ramp = ramp_to_string(res.best_schedule.on_ramp);
      row.bit_count = encode_compact(res.best_schedule).bit_count();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace sfq
