#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "sfq/core.hpp"

namespace sfq {

/// Global SFQ clock locked to the qubit: `multiplier` ticks per qubit period.
struct ClockConfig {
  int multiplier = 4;
  double qubit_period = 0.0;  // T = 2 pi / omega_01
  double clock_period = 0.0;  // T_c = T / multiplier

  static ClockConfig from_omega(int multiplier, double omega_01) {
    if (multiplier != 4 && multiplier != 8) {
      throw ParameterError("clock multiplier must be 4 or 8, got " +
                           std::to_string(multiplier));
    }
    if (!(omega_01 > 0.0)) throw ParameterError("qubit frequency must be positive");
    ClockConfig c;
    c.multiplier = multiplier;
    c.qubit_period = kTwoPi / omega_01;
    c.clock_period = c.qubit_period / multiplier;  // exact: multiplier is a power of two
    return c;
  }

  /// Number of low slots an on-ramp cycle may use: {0,1} at 4x, {0,1,2} at 8x.
  int ramp_slots() const { return multiplier == 4 ? 2 : 3; }
  int alphabet_size() const { return 1 << ramp_slots(); }
  int index_bits() const { return ramp_slots(); }
};

/// One qubit period worth of clock slots. Bit k of `mask` is a kick at offset
/// k * T_c. The mask of an on-ramp cycle doubles as its alphabet index.
struct RampCycle {
  std::uint8_t mask = 0;
  int slots = 4;

  bool kick(int k) const { return (mask >> k) & 1U; }
  int kick_count() const { return std::popcount(mask); }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(slots), '0');
    for (int k = 0; k < slots; ++k) {
      if (kick(k)) s[static_cast<std::size_t>(k)] = '1';
    }
    return s;
  }

  static RampCycle from_string(const std::string& bits) {
    if (bits.size() != 4 && bits.size() != 8) {
      throw ParameterError("ramp cycle '" + bits + "' must have 4 or 8 slots");
    }
    RampCycle c;
    c.slots = static_cast<int>(bits.size());
    for (int k = 0; k < c.slots; ++k) {
      const char ch = bits[static_cast<std::size_t>(k)];
      if (ch == '1') {
        c.mask = static_cast<std::uint8_t>(c.mask | (1U << k));
      } else if (ch != '0') {
        throw ParameterError("ramp cycle '" + bits + "' must contain only 0/1");
      }
    }
    return c;
  }

  /// Whether this cycle belongs to the on-ramp alphabet of `clock`.
  bool in_alphabet(const ClockConfig& clock) const {
    return slots == clock.multiplier && mask < clock.alphabet_size();
  }

  friend bool operator==(const RampCycle&, const RampCycle&) = default;
};

using Ramp = std::vector<RampCycle>;
using BitString = std::string;

inline RampCycle alphabet_cycle(const ClockConfig& clock, int index) {
  if (index < 0 || index >= clock.alphabet_size()) {
    throw ParameterError("ramp alphabet index out of range");
  }
  return RampCycle{static_cast<std::uint8_t>(index), clock.multiplier};
}

/// Mirror of a single cycle: slot k moves to (S - k) mod S. Keeps the Y weight
/// cos(2 pi k / S) of each kick and flips the X weight.
inline RampCycle mirror_cycle(const RampCycle& c) {
  RampCycle m{0, c.slots};
  for (int k = 0; k < c.slots; ++k) {
    if (c.kick(k)) {
      const int to = (c.slots - k) % c.slots;
      m.mask = static_cast<std::uint8_t>(m.mask | (1U << to));
    }
  }
  return m;
}

/// Off-ramp for a given on-ramp: cycle order reversed, each cycle mirrored.
inline Ramp mirror_off_ramp(const Ramp& on_ramp) {
  Ramp off;
  off.reserve(on_ramp.size());
  for (auto it = on_ramp.rbegin(); it != on_ramp.rend(); ++it) {
    off.push_back(mirror_cycle(*it));
  }
  return off;
}

inline int ramp_kicks(const Ramp& r) {
  int n = 0;
  for (const auto& c : r) n += c.kick_count();
  return n;
}

inline std::string ramp_to_string(const Ramp& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) s += ',';
    s += r[i].to_string();
  }
  return s.empty() ? "-" : s;
}

inline constexpr int kMaxScheduleRampCycles = 8;

/// On-ramp + train of N resonant kicks + mirrored off-ramp. The off-ramp is
/// always derived, never stored.
struct PulseSchedule {
  ClockConfig clock;
  Ramp on_ramp;
  int train_length = 0;
  double kick_angle = 0.03;

  Ramp off_ramp() const { return mirror_off_ramp(on_ramp); }

  int cycles() const { return 2 * static_cast<int>(on_ramp.size()) + train_length; }
  double duration() const { return cycles() * clock.qubit_period; }
  int total_kicks() const { return train_length + 2 * ramp_kicks(on_ramp); }

  void validate() const {
    if (clock.multiplier != 4 && clock.multiplier != 8) {
      throw ParameterError("clock multiplier must be 4 or 8");
    }
    if (on_ramp.size() > kMaxScheduleRampCycles) {
      throw SizeError("on-ramp has more than " + std::to_string(kMaxScheduleRampCycles) +
                      " cycles");
    }
    for (const auto& c : on_ramp) {
      if (!c.in_alphabet(clock)) {
        throw ParameterError("ramp cycle " + c.to_string() + " is not in the " +
                             std::to_string(clock.multiplier) + "x alphabet");
      }
    }
    if (train_length < 0) throw ParameterError("train length must be non-negative");
  }
};

/// Kick pattern in time order, one character per clock tick.
inline BitString expand_bits(const PulseSchedule& s) {
  const int S = s.clock.multiplier;
  BitString bits;
  bits.reserve(static_cast<std::size_t>(S * s.cycles()));
  for (const auto& c : s.on_ramp) bits += c.to_string();
  const std::string train_cycle = "1" + std::string(static_cast<std::size_t>(S - 1), '0');
  for (int i = 0; i < s.train_length; ++i) bits += train_cycle;
  for (const auto& c : s.off_ramp()) bits += c.to_string();
  return bits;
}

// ---------------------------------------------------------------------------
// Compact register image

inline constexpr int kDefaultTrainBits = 16;

/// Ramp indices (2 or 3 bits each, MSB first) followed by N in `train_width`
/// bits. The header byte carries [ramp cycles:4][train_width-1:4].
struct CompactEncoding {
  std::vector<bool> bits;
  int ramp_cycles = 0;
  int train_width = 1;

  int bit_count() const { return static_cast<int>(bits.size()); }

  std::uint8_t header() const {
    return static_cast<std::uint8_t>((ramp_cycles << 4) | (train_width - 1));
  }

  static CompactEncoding with_header(std::uint8_t header) {
    CompactEncoding e;
    e.ramp_cycles = header >> 4;
    e.train_width = (header & 0x0F) + 1;
    return e;
  }

  std::string bit_string() const {
    std::string s;
    for (bool b : bits) s += b ? '1' : '0';
    return s;
  }

  /// Payload as hex, MSB first, zero-padded to a whole nibble.
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
      int nibble = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        nibble <<= 1;
        if (i + j < bits.size() && bits[i + j]) nibble |= 1;
      }
      out += kDigits[nibble];
    }
    return out;
  }

  static std::vector<bool> bits_from_hex(const std::string& hex, int bit_count) {
    if (bit_count < 0 || static_cast<std::size_t>((bit_count + 3) / 4) != hex.size()) {
      throw DecodeError("hex image length " + std::to_string(hex.size()) +
                        " does not match bit_count " + std::to_string(bit_count));
    }
    std::vector<bool> bits;
    for (char ch : hex) {
      int v;
      if (ch >= '0' && ch <= '9') {
        v = ch - '0';
      } else if (ch >= 'a' && ch <= 'f') {
        v = ch - 'a' + 10;
      } else if (ch >= 'A' && ch <= 'F') {
        v = ch - 'A' + 10;
      } else {
        throw DecodeError(std::string("invalid hex digit '") + ch + "'");
      }
      for (int j = 3; j >= 0; --j) bits.push_back((v >> j) & 1);
    }
    for (std::size_t i = static_cast<std::size_t>(bit_count); i < bits.size(); ++i) {
      if (bits[i]) throw DecodeError("non-zero padding bits in hex image");
    }
    bits.resize(static_cast<std::size_t>(bit_count));
    return bits;
  }
};

/// Bits needed to store N; N = 0 and N = 1 take one bit.
inline int train_field_width(int n) {
  return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(n))));
}

inline CompactEncoding encode_compact(const PulseSchedule& s,
                                      int max_train_bits = kDefaultTrainBits) {
  s.validate();
  if (max_train_bits < 1 || max_train_bits > 16) {
    throw ParameterError("train register width must be in [1, 16]");
  }
  if (s.on_ramp.size() > 15) throw SizeError("ramp too long for the header field");
  if (s.train_length >= (1 << max_train_bits)) {
    throw SizeError("train length " + std::to_string(s.train_length) +
                    " exceeds the " + std::to_string(max_train_bits) + "-bit register");
  }
  CompactEncoding e;
  e.ramp_cycles = static_cast<int>(s.on_ramp.size());
  e.train_width = train_field_width(s.train_length);
  const int w = s.clock.index_bits();
  for (const auto& c : s.on_ramp) {
    for (int j = w - 1; j >= 0; --j) e.bits.push_back((c.mask >> j) & 1U);
  }
  for (int j = e.train_width - 1; j >= 0; --j) e.bits.push_back((s.train_length >> j) & 1);
  return e;
}

inline PulseSchedule decode_compact(const CompactEncoding& e, const ClockConfig& clock,
                                    double kick_angle) {
  if (clock.multiplier != 4 && clock.multiplier != 8) {
    throw DecodeError("clock multiplier must be 4 or 8");
  }
  if (e.train_width < 1 || e.train_width > 16 || e.ramp_cycles < 0) {
    throw DecodeError("malformed header");
  }
  const int w = clock.index_bits();
  const int expected = w * e.ramp_cycles + e.train_width;
  if (e.bit_count() != expected) {
    throw DecodeError("bit string has " + std::to_string(e.bit_count()) +
                      " bits, header implies " + std::to_string(expected));
  }
  PulseSchedule s;
  s.clock = clock;
  s.kick_angle = kick_angle;
  std::size_t pos = 0;
  for (int i = 0; i < e.ramp_cycles; ++i) {
    int idx = 0;
    for (int j = 0; j < w; ++j) idx = (idx << 1) | (e.bits[pos++] ? 1 : 0);
    s.on_ramp.push_back(alphabet_cycle(clock, idx));
  }
  int n = 0;
  for (int j = 0; j < e.train_width; ++j) n = (n << 1) | (e.bits[pos++] ? 1 : 0);
  s.train_length = n;
  return s;
}

}  // namespace sfq
