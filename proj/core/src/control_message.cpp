#include "winoc/control_message.hpp"

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

std::uint32_t ThermalControlMessage::pack() const {
  return static_cast<std::uint32_t>(type) << 30 | static_cast<std::uint32_t>(seq & 0xF) << 26 |
         static_cast<std::uint32_t>(payload) << 10 | static_cast<std::uint32_t>(ts_low & 0x3FF);
}

ThermalControlMessage ThermalControlMessage::unpack(std::uint32_t word) {
  ThermalControlMessage m;
  m.type = static_cast<ControlType>(word >> 30);
  m.seq = static_cast<std::uint8_t>((word >> 26) & 0xF);
  m.payload = static_cast<std::uint16_t>((word >> 10) & 0xFFFF);
  m.ts_low = static_cast<std::uint16_t>(word & 0x3FF);
  return m;
}

const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::None: return "none";
    case DecisionKind::Reallocate: return "reallocate";
    case DecisionKind::Reroute: return "reroute";
  }
  return "?";
}

std::vector<ThermalControlMessage> encode_control(const DtmDecision& decision, std::int64_t timestamp) {
  std::vector<ThermalControlMessage> out;
  const auto ts_low = static_cast<std::uint16_t>(timestamp & 0x3FF);
  switch (decision.kind) {
    case DecisionKind::None:
      break;
    case DecisionKind::Reroute: {
      const auto& bits = decision.status.bits;
      const int segments = static_cast<int>((bits.size() + 15) / 16);
      for (int s = 0; s < segments; ++s) {
        std::uint16_t word = 0;
        for (int j = 0; j < 16; ++j) {
          const std::size_t i = static_cast<std::size_t>(s) * 16 + j;
          if (i < bits.size() && bits[i]) word = static_cast<std::uint16_t>(word | (1u << j));
        }
        out.push_back({ControlType::StatusSegment, static_cast<std::uint8_t>(s & 0xF), word, ts_low});
      }
      out.push_back({ControlType::Timestamp, static_cast<std::uint8_t>(segments & 0xF),
                     static_cast<std::uint16_t>((timestamp >> 10) & 0xFFFF), ts_low});
      out.push_back({ControlType::RerouteTrigger, 0, static_cast<std::uint16_t>(decision.status.count() & 0xFFFF),
                     ts_low});
      break;
    }
    case DecisionKind::Reallocate: {
      int seq = 0;
      for (const auto& [task, core] : decision.migrations) {
        if (task < 0 || task > 255 || core < 0 || core > 255) {
          throw ProtocolError(fmt::format("migration ({}, {}) does not fit the 8-bit fields", task, core));
        }
        out.push_back({ControlType::ReallocTrigger, static_cast<std::uint8_t>(seq++ & 0xF),
                       static_cast<std::uint16_t>(task << 8 | core), ts_low});
      }
      break;
    }
  }
  return out;
}

DecodedControl decode_control(const std::vector<ThermalControlMessage>& flits, int n_components) {
  DecodedControl out;
  if (flits.empty()) return out;
  auto& d = out.decision;
  if (flits.front().type == ControlType::ReallocTrigger) {
    d.kind = DecisionKind::Reallocate;
    int seq = 0;
    for (const auto& f : flits) {
      if (f.type != ControlType::ReallocTrigger) throw ProtocolError("mixed control message types");
      if (f.seq != (seq++ & 0xF)) throw ProtocolError("control flit out of sequence");
      d.migrations.emplace_back(f.payload >> 8, f.payload & 0xFF);
    }
    out.timestamp = flits.front().ts_low;
    d.decision_cycle = out.timestamp;
    return out;
  }
  const int segments = (n_components + 15) / 16;
  if (static_cast<int>(flits.size()) != segments + 2) {
    throw ProtocolError(fmt::format("reroute message needs {} flits (got {})", segments + 2, flits.size()));
  }
  d.kind = DecisionKind::Reroute;
  d.status.bits.assign(n_components, false);
  for (int s = 0; s < segments; ++s) {
    const auto& f = flits[s];
    if (f.type != ControlType::StatusSegment || f.seq != (s & 0xF)) throw ProtocolError("bad status segment");
    for (int j = 0; j < 16; ++j) {
      const int i = s * 16 + j;
      if (i < n_components) d.status.bits[i] = (f.payload >> j) & 1u;
    }
  }
  const auto& ts = flits[segments];
  if (ts.type != ControlType::Timestamp) throw ProtocolError("missing timestamp flit");
  if (flits.back().type != ControlType::RerouteTrigger) throw ProtocolError("missing reroute trigger");
  out.timestamp = static_cast<std::int64_t>(ts.payload) << 10 | ts.ts_low;
  d.decision_cycle = out.timestamp;
  d.status.timestamp = out.timestamp;
  return out;
}

std::vector<std::uint32_t> pack_all(const std::vector<ThermalControlMessage>& flits) {
  std::vector<std::uint32_t> out;
  out.reserve(flits.size());
  for (const auto& f : flits) out.push_back(f.pack());
  return out;
}

}  // namespace winoc
