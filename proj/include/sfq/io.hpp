#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sfq/core.hpp"
#include "sfq/metrics.hpp"
#include "sfq/open_system.hpp"
#include "sfq/optimizer.hpp"
#include "sfq/schedule.hpp"
#include "sfq/transmon.hpp"

// JSON and CSV forms of the pipeline's value types. Frequencies are written
// in GHz (not angular), times in seconds.

namespace sfq::io {

using nlohmann::json;

inline json complex_matrix(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"re", re}, {"im", im}};
}

inline json to_json(const TransmonSpec& s) {
  return json{{"charging_energy_ghz", to_ghz(s.charging_energy)},
              {"josephson_energy_ghz", to_ghz(s.josephson_energy)},
              {"ratio", s.ratio()},
              {"gate_charge", s.gate_charge},
              {"charge_dimension", s.charge_dimension},
              {"kept_levels", s.kept_levels}};
}

inline json to_json(const EigenModel& m) {
  json energies = json::array();
  for (int k = 0; k < m.levels(); ++k) energies.push_back(to_ghz(m.energies(k)));
  json j{{"omega01_ghz", to_ghz(m.omega_01)},
         {"anharmonicity_ghz", to_ghz(m.anharmonicity_exact)},
         {"zero_point_r", m.zero_point_r},
         {"energies_ghz", energies},
         {"charge_op", complex_matrix(m.charge_op)}};
  if (m.spec) j["spec"] = to_json(*m.spec);
  return j;
}

inline json to_json(const PulseSchedule& s) {
  json ramp = json::array();
  for (const auto& c : s.on_ramp) ramp.push_back(c.to_string());
  json off = json::array();
  for (const auto& c : s.off_ramp()) off.push_back(c.to_string());
  return json{{"clock", s.clock.multiplier},
              {"kick_angle", s.kick_angle},
              {"on_ramp", ramp},
              {"off_ramp", off},
              {"train_length", s.train_length},
              {"total_kicks", s.total_kicks()},
              {"duration_s", s.duration()}};
}

/// Reads {clock, kick_angle, on_ramp, train_length}; other keys are ignored.
inline PulseSchedule schedule_from_json(const json& j, double omega_01) {
  try {
    PulseSchedule s;
    s.clock = ClockConfig::from_omega(j.at("clock").get<int>(), omega_01);
    s.kick_angle = j.value("kick_angle", 0.03);
    for (const auto& c : j.at("on_ramp")) s.on_ramp.push_back(RampCycle::from_string(c.get<std::string>()));
    s.train_length = j.at("train_length").get<int>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed schedule JSON: ") + e.what());
  }
}

inline json to_json(const CompactEncoding& e) {
  return json{{"bit_count", e.bit_count()},
              {"bits", e.bit_string()},
              {"hex", e.to_hex()},
              {"header", e.header()},
              {"ramp_cycles", e.ramp_cycles},
              {"train_width", e.train_width}};
}

inline CompactEncoding encoding_from_json(const json& j) {
  try {
    CompactEncoding e = CompactEncoding::with_header(j.at("header").get<std::uint8_t>());
    if (j.contains("bits")) {
      for (char ch : j.at("bits").get<std::string>()) {
        if (ch != '0' && ch != '1') throw DecodeError("bit string must contain only 0/1");
        e.bits.push_back(ch == '1');
      }
    } else {
      e.bits = CompactEncoding::bits_from_hex(j.at("hex").get<std::string>(),
                                              j.at("bit_count").get<int>());
    }
    return e;
  } catch (const json::exception& ex) {
    throw DecodeError(std::string("malformed encoding JSON: ") + ex.what());
  }
}

inline json to_json(const GateReport& r) {
  json pauli = json::array();
  for (const auto& c : r.pauli) pauli.push_back({c.real(), c.imag()});
  return json{{"avg_fidelity", r.avg_fidelity},
              {"error", r.error()},
              {"process_fidelity", r.process_fidelity},
              {"leakage", r.leakage},
              {"delta", r.delta},
              {"pauli", pauli},
              {"err_discrete", r.err_discrete},
              {"err_phase", r.err_phase}};
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline constexpr const char* kReportCsvHeader =
    "avg_fidelity,error,process_fidelity,L1,delta,err_discrete,err_phase";

inline std::string to_csv_row(const GateReport& r) {
  return fmt(r.avg_fidelity) + "," + fmt(r.error()) + "," + fmt(r.process_fidelity) + "," +
         fmt(r.leakage) + "," + fmt(r.delta) + "," + fmt(r.err_discrete) + "," +
         fmt(r.err_phase);
}

inline constexpr const char* kSweepCsvHeader =
    "angle,cycles,fidelity,error,L1,err_discrete,err_phase,N,ramp,bits";

inline std::string to_csv_row(const SweepRow& r) {
  return fmt(r.angle) + "," + std::to_string(r.ramp_cycles) + "," + fmt(r.fidelity) + "," +
         fmt(r.error) + "," + fmt(r.leakage) + "," + fmt(r.err_discrete) + "," +
         fmt(r.err_phase) + "," + std::to_string(r.train_length) + "," + "\"" + r.ramp + "\"," +
         std::to_string(r.bit_count);
}

}  // namespace sfq::io
