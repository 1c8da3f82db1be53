#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sfq/sfq.hpp"

#ifndef SFQ_VERSION
#define SFQ_VERSION "0.0.0"
#endif

namespace sfq::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3, kIo = 4 };

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Run configuration: every setting is a key=value string so that config
// files, flags and embedded result headers share one representation.

struct Setting {
  const char* key;
  const char* value;
  const char* help;
};

inline const std::vector<Setting>& settings() {
  static const std::vector<Setting> table{
      {"omega01_ghz", "5", "qubit frequency omega_01/2pi in GHz"},
      {"alpha_mhz", "250", "anharmonicity (omega_01 - omega_12)/2pi in MHz"},
      {"charge_dimension", "201", "charge-basis truncation (odd)"},
      {"levels", "7", "eigenlevels kept"},
      {"clock", "4", "clock multiplier (4 or 8)"},
      {"kick_angle", "0.03", "qubit-subspace rotation per kick"},
      {"target_angle", "pi", "target R_Y angle, e.g. pi/2 or 1.2"},
      {"ramp_cycles", "4", "on-ramp length searched by optimize"},
      {"train_window", "auto", "train lengths lo:hi, or auto"},
      {"objective", "avg", "avg, leakage or phase"},
      {"prune_c", "none", "DRAG pruning band c_lo:c_hi, or none"},
      {"ramp", "-", "on-ramp cycles, comma separated ('-' for none)"},
      {"train_length", "auto", "train length N for simulate/spectrum/encode"},
      {"schedule", "", "schedule JSON file (overrides ramp/train_length)"},
      {"angles", "pi/16,pi/8,3pi/16,pi/4,5pi/16,3pi/8,7pi/16,pi/2,9pi/16,5pi/8,11pi/16,3pi/4,13pi/16,7pi/8,15pi/16,pi",
       "sweep target angles"},
      {"cycles", "0,1,2,3,4,5", "ramp lengths for sweep"},
      {"robust_cycles", "0,1,2,3,5", "ramp lengths for robustness"},
      {"grid_points", "2048", "spectrum grid points"},
      {"grid_lo", "0.5", "spectrum grid start (units of omega_01)"},
      {"grid_hi", "1.5", "spectrum grid end (units of omega_01)"},
      {"samples", "1000", "robustness samples per ramp length"},
      {"seed", "1", "random seed"},
      {"sd_delta_omega_mhz", "2", "frequency deviation sd (MHz)"},
      {"sd_delta_alpha_mhz", "10", "anharmonicity deviation sd (MHz)"},
      {"sd_jitter_ps", "1", "jitter sigma scale (ps, half-normal)"},
      {"sd_delta_theta", "1", "kick-angle axis scale (thousandths, half-normal)"},
      {"sd_gamma_per_us", "0.02", "decay rate scale (1/us, half-normal)"},
      {"scan_delta_omega_mhz", "-6:6:0.5", "frequency offset scan lo:hi:step (MHz)"},
      {"threads", "1", "worker threads"},
  };
  return table;
}

// Keys that do not change results; kept out of the hash and embedded config.
inline bool is_volatile(const std::string& key) { return key == "threads"; }

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap default_config() {
  ConfigMap m;
  for (const auto& s : settings()) m[s.key] = s.value;
  return m;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline void set_key(ConfigMap& m, const std::string& key, const std::string& value) {
  if (!m.count(key)) throw ParameterError("unknown config key '" + key + "'");
  m[key] = value;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Plain key=value lines with '#' comments. A JSON result file or a CSV
/// result file is also accepted; its embedded config is used.
inline void load_config(ConfigMap& m, const std::string& path) {
  const std::string text = read_file(path);
  const std::string head = trim(text.substr(0, 64));
  if (!head.empty() && head[0] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParameterError("malformed JSON config '" + path + "': " + e.what());
    }
    if (!j.contains("meta") || !j["meta"].contains("config")) {
      throw ParameterError("JSON config '" + path + "' has no meta.config");
    }
    for (const auto& [k, v] : j["meta"]["config"].items()) set_key(m, k, v.get<std::string>());
    return;
  }
  const bool csv_result = text.rfind("# tool=", 0) == 0;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv_result) {
      if (line.rfind("# config ", 0) != 0) continue;
      line = line.substr(9);
    }
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    set_key(m, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string canonical(const ConfigMap& m) {
  std::string s;
  for (const auto& [k, v] : m) {
    if (!is_volatile(k)) s += k + "=" + v + "\n";
  }
  return s;
}

inline std::string config_hash(const ConfigMap& m) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical(m));
  return os.str();
}

// ---------------------------------------------------------------------------
// Value parsing

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParameterError(key + ": expected a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos != v.size() || n < INT32_MIN || n > INT32_MAX) throw std::invalid_argument(v);
    return static_cast<int>(n);
  } catch (const std::exception&) {
    throw ParameterError(key + ": expected an integer, got '" + v + "'");
  }
}

/// "pi", "pi/2", "3pi/4", "3*pi/4", "-pi/8" or a plain number of radians.
inline double parse_angle(const std::string& text) {
  const std::string s = trim(text);
  const auto p = s.find("pi");
  if (p == std::string::npos) return parse_double("angle", s);
  std::string coef = s.substr(0, p);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double num = 1.0;
  if (coef == "-") {
    num = -1.0;
  } else if (!coef.empty()) {
    num = parse_double("angle", coef);
  }
  std::string rest = s.substr(p + 2);
  double den = 1.0;
  if (!rest.empty()) {
    if (rest[0] != '/') throw ParameterError("angle: cannot parse '" + s + "'");
    den = parse_double("angle", rest.substr(1));
    if (den == 0.0) throw ParameterError("angle: zero denominator in '" + s + "'");
  }
  return num * kPi / den;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& t : split(v, ',')) out.push_back(parse_int(key, t));
  return out;
}

inline std::pair<double, double> parse_range(const std::string& key, const std::string& v) {
  const auto parts = split(v, ':');
  if (parts.size() != 2) throw ParameterError(key + ": expected lo:hi, got '" + v + "'");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

inline Ramp parse_ramp(const std::string& v, const ClockConfig& clock) {
  Ramp r;
  if (trim(v) == "-" || trim(v).empty()) return r;
  for (const auto& t : split(v, ',')) {
    RampCycle c = RampCycle::from_string(t);
    if (!c.in_alphabet(clock)) {
      throw ParameterError("ramp cycle " + t + " is not in the " +
                           std::to_string(clock.multiplier) + "x alphabet");
    }
    r.push_back(c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Typed view of a ConfigMap

struct RunConfig {
  ConfigMap raw;
  int threads = 1;

  const std::string& get(const std::string& k) const { return raw.at(k); }
  double num(const std::string& k) const { return parse_double(k, get(k)); }
  int integer(const std::string& k) const { return parse_int(k, get(k)); }

  int clock_multiplier() const {
    const int c = integer("clock");
    if (c != 4 && c != 8) throw ParameterError("clock must be 4 or 8");
    return c;
  }
  double kick_angle() const { return num("kick_angle"); }
  std::uint64_t seed() const {
    try {
      return std::stoull(get("seed"));
    } catch (const std::exception&) {
      throw ParameterError("seed: expected a non-negative integer");
    }
  }
};

inline EigenModel make_model(const RunConfig& c) {
  CalibrationOptions opts;
  opts.charge_dimension = c.integer("charge_dimension");
  opts.kept_levels = c.integer("levels");
  return build_model(calibrate(ghz(c.num("omega01_ghz")), mhz(c.num("alpha_mhz")), opts));
}

inline PulseSchedule make_schedule(const RunConfig& c, const EigenModel& model) {
  if (!c.get("schedule").empty()) {
    json j;
    try {
      j = json::parse(read_file(c.get("schedule")));
    } catch (const json::exception& e) {
      throw ParameterError(std::string("malformed schedule file: ") + e.what());
    }
    if (j.contains("schedule")) j = j["schedule"];
    return io::schedule_from_json(j, model.omega_01);
  }
  PulseSchedule s;
  s.clock = ClockConfig::from_omega(c.clock_multiplier(), model.omega_01);
  s.kick_angle = c.kick_angle();
  s.on_ramp = parse_ramp(c.get("ramp"), s.clock);
  if (c.get("train_length") == "auto") {
    throw ParameterError("train_length is required (or pass --schedule)");
  }
  s.train_length = c.integer("train_length");
  s.validate();
  return s;
}

inline SearchSpace make_space(const RunConfig& c, const EigenModel& model, double target) {
  SearchSpace sp;
  sp.clock = ClockConfig::from_omega(c.clock_multiplier(), model.omega_01);
  sp.kick_angle = c.kick_angle();
  sp.ramp_cycles = c.integer("ramp_cycles");
  sp.objective = objective_from_string(c.get("objective"));
  sp.threads = c.threads;
  if (c.get("train_window") == "auto") {
    sp.train_window = default_train_window(target, sp.kick_angle);
  } else {
    const auto [lo, hi] = parse_range("train_window", c.get("train_window"));
    sp.train_window = TrainWindow{static_cast<int>(lo), static_cast<int>(hi)};
  }
  if (c.get("prune_c") != "none") {
    const auto [lo, hi] = parse_range("prune_c", c.get("prune_c"));
    if (lo < 0.0 || hi > 2.0 || lo > hi) throw ParameterError("prune_c must satisfy 0 <= lo <= hi <= 2");
    sp.drag_prune = DragPrune{lo, hi};
  }
  return sp;
}

inline std::vector<double> make_scan(const RunConfig& c) {
  const auto parts = split(c.get("scan_delta_omega_mhz"), ':');
  if (parts.size() != 3) throw ParameterError("scan_delta_omega_mhz: expected lo:hi:step");
  const double lo = parse_double("scan", parts[0]), hi = parse_double("scan", parts[1]),
               step = parse_double("scan", parts[2]);
  if (!(step > 0.0) || hi < lo) throw ParameterError("scan_delta_omega_mhz: need step > 0, hi >= lo");
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(mhz(lo + i * step));
  return g;
}

inline SweepConfig make_sweep_config(const RunConfig& c) {
  SweepConfig s;
  s.samples = c.integer("samples");
  if (s.samples < 0) throw ParameterError("samples must be non-negative");
  s.seed = c.seed();
  s.sd_delta_omega = mhz(c.num("sd_delta_omega_mhz"));
  s.sd_delta_alpha = mhz(c.num("sd_delta_alpha_mhz"));
  s.sd_jitter = c.num("sd_jitter_ps") * 1e-12;
  s.sd_delta_theta = c.num("sd_delta_theta");
  s.sd_gamma = c.num("sd_gamma_per_us") * 1e6;
  s.delta_omega_grid = make_scan(c);
  s.threads = c.threads;
  return s;
}

// ---------------------------------------------------------------------------
// Result headers and output

inline json meta(const RunConfig& c) {
  json cfg = json::object();
  for (const auto& [k, v] : c.raw) {
    if (!is_volatile(k)) cfg[k] = v;
  }
  return json{{"tool", "sfqctl"},
              {"version", SFQ_VERSION},
              {"config_hash", config_hash(c.raw)},
              {"seed", c.get("seed")},
              {"config", cfg}};
}

inline std::string csv_header(const RunConfig& c) {
  std::string s = "# tool=sfqctl version=" + std::string(SFQ_VERSION) +
                  " config_hash=" + config_hash(c.raw) + " seed=" + c.get("seed") + "\n";
  for (const auto& [k, v] : c.raw) {
    if (!is_volatile(k)) s += "# config " + k + "=" + v + "\n";
  }
  return s;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  void write(const std::string& text) const {
    if (path_.empty()) {
      fallback_ << text;
      return;
    }
    const std::filesystem::path p(path_);
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path_ + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

inline json report_json(const GateReport& r, const ProjectedGate& g) {
  json j = io::to_json(r);
  j["u_q"] = io::complex_matrix(g.u);
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
  RunConfig cfg;
  std::string out;
  std::string outdir;
  std::string format = "json";
  std::string hex;
  std::string bits;
  int bit_count = -1;
  int header = -1;
  std::ostream* stdout_ = &std::cout;
};

inline void cmd_calibrate(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  json j{{"meta", meta(ctx.cfg)}, {"model", io::to_json(m)}};
  Output(ctx.out, *ctx.stdout_).write(j.dump(2) + "\n");
}

inline void cmd_simulate(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  const PulseSchedule s = make_schedule(ctx.cfg, m);
  const TargetGate target = TargetGate::y_rotation(parse_angle(ctx.cfg.get("target_angle")));
  const Propagator p = sequence_propagator(m, s);
  const ProjectedGate g = project_computational(p, m);
  GateReport r;
  try {
    r = evaluate_gate(g, target);
  } catch (const DegenerateGate&) {
    r = average_fidelity(g, target);
  }
  if (ctx.format == "csv") {
    Output(ctx.out, *ctx.stdout_)
        .write(csv_header(ctx.cfg) + "N,ramp," + io::kReportCsvHeader + "\n" +
               std::to_string(s.train_length) + ",\"" + ramp_to_string(s.on_ramp) + "\"," +
               io::to_csv_row(r) + "\n");
    return;
  }
  json j{{"meta", meta(ctx.cfg)},
         {"schedule", io::to_json(s)},
         {"report", report_json(r, g)},
         {"unitarity_residual", p.unitarity_residual()}};
  Output(ctx.out, *ctx.stdout_).write(j.dump(2) + "\n");
}

inline void cmd_optimize(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  const double angle = parse_angle(ctx.cfg.get("target_angle"));
  const TargetGate target = TargetGate::y_rotation(angle);
  const SearchSpace sp = make_space(ctx.cfg, m, angle);
  const RampSearchResult res = search(m, target, sp);
  if (res.prune_changed_winner) {
    std::cerr << "warning: DRAG pruning changed the winning schedule\n";
  }
  if (ctx.format == "csv") {
    Output(ctx.out, *ctx.stdout_)
        .write(csv_header(ctx.cfg) + "N,ramp," + io::kReportCsvHeader + "\n" +
               std::to_string(res.best_schedule.train_length) + ",\"" +
               ramp_to_string(res.best_schedule.on_ramp) + "\"," + io::to_csv_row(res.report) +
               "\n");
    return;
  }
  json j{{"meta", meta(ctx.cfg)},
         {"schedule", io::to_json(res.best_schedule)},
         {"report", io::to_json(res.report)},
         {"encoding", io::to_json(encode_compact(res.best_schedule))},
         {"candidates_evaluated", res.candidates_evaluated},
         {"prune_changed_winner", res.prune_changed_winner}};
  Output(ctx.out, *ctx.stdout_).write(j.dump(2) + "\n");
}

inline std::vector<double> parse_angles(const RunConfig& c) {
  std::vector<double> a;
  for (const auto& t : split(c.get("angles"), ',')) a.push_back(parse_angle(t));
  if (a.empty()) throw ParameterError("angles list is empty");
  return a;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = std::string(io::kSweepCsvHeader) + "\n";
  for (const auto& r : rows) s += io::to_csv_row(r) + "\n";
  return s;
}

inline void cmd_sweep(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  SearchSpace base = make_space(ctx.cfg, m, kPi);
  std::optional<TrainWindow> window;
  if (ctx.cfg.get("train_window") != "auto") window = base.train_window;
  const auto rows = angle_sweep(m, base, parse_angles(ctx.cfg),
                                parse_int_list("cycles", ctx.cfg.get("cycles")), window);
  Output(ctx.out, *ctx.stdout_).write(csv_header(ctx.cfg) + sweep_csv(rows));
}

inline std::vector<double> make_grid(const RunConfig& c) {
  return default_grid(c.integer("grid_points"), c.num("grid_lo"), c.num("grid_hi"));
}

inline void cmd_spectrum(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  const PulseSchedule s = make_schedule(ctx.cfg, m);
  const BitString bits = expand_bits(s);
  const SpectrumTable t = pulse_spectrum(bits, s.clock, make_grid(ctx.cfg), m);
  std::string csv = csv_header(ctx.cfg) + "omega,magnitude\n";
  for (std::size_t i = 0; i < t.freq_grid.size(); ++i) {
    csv += io::fmt(t.freq_grid[i]) + "," + io::fmt(t.magnitude[i]) + "\n";
  }
  Output(ctx.out, *ctx.stdout_).write(csv);
  json summary{{"leak_freq", leak_frequency(m)},
               {"magnitude_at_leak", std::abs(spectrum_at(bits, s.clock, leak_frequency(m)))}};
  if (s.total_kicks() > 0) {
    summary["ratio_vs_train"] =
        leakage_suppression_ratio(bare_train_bits(s.clock, s.total_kicks()), bits, s.clock, m);
  } else {
    summary["ratio_vs_train"] = nullptr;
  }
  *ctx.stdout_ << summary.dump() << "\n";
}

/// Best nominal R_Y(target) schedule for each ramp length.
inline std::vector<PulseSchedule> optimized_schedules(const RunConfig& c, const EigenModel& m,
                                                      const std::vector<int>& lengths,
                                                      double angle) {
  std::vector<PulseSchedule> out;
  for (int n : lengths) {
    SearchSpace sp = make_space(c, m, angle);
    sp.ramp_cycles = n;
    out.push_back(search(m, TargetGate::y_rotation(angle), sp).best_schedule);
  }
  return out;
}

inline std::string robustness_csv(const RobustnessResult& r) {
  std::string s =
      "cycles,sample,delta_omega_mhz,delta_alpha_mhz,jitter_ps,delta_theta,gamma_per_us,"
      "fidelity,L1\n";
  for (const auto& row : r.samples) {
    s += std::to_string(row.ramp_cycles) + "," + std::to_string(row.index) + "," +
         io::fmt(row.noise.delta_omega / mhz(1.0)) + "," +
         io::fmt(row.noise.delta_alpha / mhz(1.0)) + "," + io::fmt(row.noise.jitter_sigma * 1e12) +
         "," + io::fmt(row.noise.delta_theta) + "," + io::fmt(row.noise.gamma * 1e-6) + "," +
         io::fmt(row.avg_fidelity) + "," + io::fmt(row.leakage) + "\n";
  }
  return s;
}

inline json robustness_summary(const RobustnessResult& r) {
  json arr = json::array();
  for (const auto& s : r.summaries) {
    arr.push_back({{"cycles", s.ramp_cycles},
                   {"nominal_fidelity", s.nominal_fidelity},
                   {"median", s.median},
                   {"p05", s.p05},
                   {"p95", s.p95},
                   {"best_delta_omega_mhz", s.best_delta_omega / mhz(1.0)}});
  }
  return arr;
}

inline RobustnessResult run_robustness(const RunConfig& c, const EigenModel& m) {
  const auto lengths = parse_int_list("robust_cycles", c.get("robust_cycles"));
  const auto schedules = optimized_schedules(c, m, lengths, kPi);
  return robustness_sweep(m, schedules, make_sweep_config(c), TargetGate::y_rotation(kPi));
}

inline void cmd_robustness(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  const RobustnessResult r = run_robustness(ctx.cfg, m);
  Output(ctx.out, *ctx.stdout_).write(csv_header(ctx.cfg) + robustness_csv(r));
  json j{{"meta", meta(ctx.cfg)}, {"summary", robustness_summary(r)}};
  *ctx.stdout_ << j.dump() << "\n";
}

inline void cmd_encode(const Context& ctx) {
  const EigenModel m = make_model(ctx.cfg);
  const PulseSchedule s = make_schedule(ctx.cfg, m);
  json j{{"meta", meta(ctx.cfg)},
         {"schedule", io::to_json(s)},
         {"encoding", io::to_json(encode_compact(s))}};
  Output(ctx.out, *ctx.stdout_).write(j.dump(2) + "\n");
}

inline void cmd_decode(const Context& ctx) {
  if (ctx.header < 0 || ctx.header > 255) throw DecodeError("--header (0-255) is required");
  CompactEncoding e = CompactEncoding::with_header(static_cast<std::uint8_t>(ctx.header));
  if (!ctx.bits.empty()) {
    for (char ch : ctx.bits) {
      if (ch != '0' && ch != '1') throw DecodeError("--bits must contain only 0/1");
      e.bits.push_back(ch == '1');
    }
  } else if (!ctx.hex.empty()) {
    e.bits = CompactEncoding::bits_from_hex(ctx.hex, ctx.bit_count);
  } else {
    throw DecodeError("pass --bits or --hex with --bit-count");
  }
  const double omega = ghz(ctx.cfg.num("omega01_ghz"));
  const PulseSchedule s =
      decode_compact(e, ClockConfig::from_omega(ctx.cfg.clock_multiplier(), omega), ctx.cfg.kick_angle());
  json j{{"meta", meta(ctx.cfg)}, {"schedule", io::to_json(s)}};
  Output(ctx.out, *ctx.stdout_).write(j.dump(2) + "\n");
}

inline void cmd_reproduce(const Context& ctx) {
  const std::string dir = ctx.outdir.empty() ? "figures" : ctx.outdir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const EigenModel m = make_model(ctx.cfg);
  const auto angles = parse_angles(ctx.cfg);
  const std::string header = csv_header(ctx.cfg);
  auto file = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };

  // Fig. 3: configured clock, ramp lengths 0..5.
  SearchSpace base = make_space(ctx.cfg, m, kPi);
  const auto fig3 = angle_sweep(m, base, angles, {0, 1, 2, 3, 4, 5});
  Output(file("fig3_angle_sweep.csv"), *ctx.stdout_).write(header + sweep_csv(fig3));

  // Fig. 4: both clocks, ramp lengths 1, 3, 5.
  std::string fig4 = header + "clock," + io::kSweepCsvHeader + "\n";
  for (int clock : {4, 8}) {
    SearchSpace sp = base;
    sp.clock = ClockConfig::from_omega(clock, m.omega_01);
    for (const auto& r : angle_sweep(m, sp, angles, {1, 3, 5})) {
      fig4 += std::to_string(clock) + "," + io::to_csv_row(r) + "\n";
    }
  }
  Output(file("fig4_error_analysis.csv"), *ctx.stdout_).write(fig4);

  // Fig. 5: robustness on the 8x clock.
  RunConfig eight = ctx.cfg;
  eight.raw["clock"] = "8";
  const RobustnessResult rob = run_robustness(eight, m);
  Output(file("fig5_robustness.csv"), *ctx.stdout_).write(header + robustness_csv(rob));

  // Fig. 6: spectra of the optimized 4x R_Y(pi) schedules and a bare train.
  RunConfig four = ctx.cfg;
  four.raw["clock"] = "4";
  const auto schedules = optimized_schedules(four, m, {0, 1, 2, 3, 4}, kPi);
  const auto grid = make_grid(ctx.cfg);
  const ClockConfig c4 = schedules.front().clock;
  std::vector<SpectrumTable> tables;
  tables.push_back(pulse_spectrum(bare_train_bits(c4, schedules.back().total_kicks()), c4, grid, m));
  for (const auto& s : schedules) tables.push_back(pulse_spectrum(expand_bits(s), c4, grid, m));
  std::string fig6 = header + "omega,train,n0,n1,n2,n3,n4\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fig6 += io::fmt(grid[i]);
    for (const auto& t : tables) fig6 += "," + io::fmt(t.magnitude[i]);
    fig6 += "\n";
  }
  Output(file("fig6_spectrum.csv"), *ctx.stdout_).write(fig6);

  json j{{"meta", meta(ctx.cfg)},
         {"files",
          {file("fig3_angle_sweep.csv"), file("fig4_error_analysis.csv"),
           file("fig5_robustness.csv"), file("fig6_spectrum.csv")}},
         {"robustness", robustness_summary(rob)},
         {"leak_freq", leak_frequency(m)}};
  *ctx.stdout_ << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

inline std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return "--" + f;
}

/// Parses arguments, runs one subcommand and maps errors to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Digital SFQ pulse-sequence design for transmon gates", "sfqctl"};
  app.set_version_flag("--version", SFQ_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file, or a result file to re-run");
  std::map<std::string, std::string> flags;
  for (const auto& s : settings()) {
    app.add_option(flag_name(s.key), flags[s.key], std::string(s.help) + " [" + s.value + "]");
  }
  Context ctx;
  ctx.stdout_ = &out;
  app.add_option("--out", ctx.out, "output file (default stdout)");

  std::map<std::string, std::function<void(const Context&)>> handlers{
      {"calibrate", cmd_calibrate}, {"simulate", cmd_simulate},   {"optimize", cmd_optimize},
      {"sweep", cmd_sweep},         {"spectrum", cmd_spectrum},   {"robustness", cmd_robustness},
      {"encode", cmd_encode},       {"decode", cmd_decode},       {"reproduce-figures", cmd_reproduce}};
  const std::map<std::string, std::string> descriptions{
      {"calibrate", "fit E_C, E_J to the target spectrum and print the model"},
      {"simulate", "propagate one schedule and report its gate metrics"},
      {"optimize", "exhaustive ramp and train-length search for one target"},
      {"sweep", "best gates over a list of target angles and ramp lengths (CSV)"},
      {"spectrum", "pulse-sequence spectrum (CSV) and leakage-frequency summary"},
      {"robustness", "open-system sampling over parameter deviations"},
      {"encode", "compact register image of a schedule"},
      {"decode", "schedule from a compact register image"},
      {"reproduce-figures", "write the figure data bundle"}};
  for (const auto& [name, desc] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, desc);
    if (name == "simulate" || name == "optimize") {
      sub->add_option("--format", ctx.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }
    if (name == "decode") {
      sub->add_option("--hex", ctx.hex, "payload in hex");
      sub->add_option("--bits", ctx.bits, "payload as a 0/1 string");
      sub->add_option("--bit-count", ctx.bit_count, "payload length for --hex");
      sub->add_option("--header", ctx.header, "header byte");
    }
    if (name == "reproduce-figures") sub->add_option("--outdir", ctx.outdir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    ConfigMap cfg = default_config();
    if (!config_path.empty()) load_config(cfg, config_path);
    std::optional<std::string> threads_flag;
    for (const auto& s : settings()) {
      if (app.count(flag_name(s.key)) > 0) {
        cfg[s.key] = flags[s.key];
        if (std::string(s.key) == "threads") threads_flag = flags[s.key];
      }
    }
    if (!threads_flag) {
      if (const char* env = std::getenv("SFQ_THREADS")) cfg["threads"] = env;
    }
    ctx.cfg.raw = cfg;
    ctx.cfg.threads = parse_int("threads", cfg["threads"]);
    if (ctx.cfg.threads < 1) throw ParameterError("threads must be >= 1");

    const std::string name = app.get_subcommands().front()->get_name();
    handlers.at(name)(ctx);
    return kOk;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace sfq::cli
