#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "winoc/quantized.hpp"

namespace winoc {

enum class ControlType : std::uint8_t { RerouteTrigger = 0, ReallocTrigger = 1, StatusSegment = 2, Timestamp = 3 };

/// One 32-bit control flit: type[31:30] seq[29:26] payload[25:10] ts_low[9:0].
struct ThermalControlMessage {
  ControlType type = ControlType::RerouteTrigger;
  std::uint8_t seq = 0;        // 4 bits
  std::uint16_t payload = 0;   // 16 bits
  std::uint16_t ts_low = 0;    // 10 bits

  std::uint32_t pack() const;
  static ThermalControlMessage unpack(std::uint32_t word);

  friend bool operator==(const ThermalControlMessage&, const ThermalControlMessage&) = default;
};

enum class DecisionKind : std::uint8_t { None, Reallocate, Reroute };

const char* to_string(DecisionKind k);

struct DtmDecision {
  DecisionKind kind = DecisionKind::None;
  std::vector<std::pair<int, int>> migrations;  // (task, new core)
  StatusBits status;
  std::int64_t decision_cycle = 0;
};

/// Reroute: one STATUS_SEGMENT per 16 status bits, a TIMESTAMP flit carrying
/// timestamp bits [25:10], then REROUTE_TRIGGER. Reallocate: one
/// REALLOC_TRIGGER per migration with payload task << 8 | core. None: empty.
std::vector<ThermalControlMessage> encode_control(const DtmDecision& decision, std::int64_t timestamp);

struct DecodedControl {
  DtmDecision decision;
  /// Reroute: timestamp mod 2^26. Reallocate: the low 10 bits only.
  std::int64_t timestamp = 0;
};

/// Inverse of encode_control. `n_components` sizes the status vector.
/// Throws ProtocolError on malformed sequences.
DecodedControl decode_control(const std::vector<ThermalControlMessage>& flits, int n_components);

std::vector<std::uint32_t> pack_all(const std::vector<ThermalControlMessage>& flits);

}  // namespace winoc
