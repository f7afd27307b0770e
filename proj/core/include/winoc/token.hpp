#pragma once

#include <cstdint>
#include <vector>

namespace winoc {

/// Round-robin token over WI indices 0..k-1. The token flit names the
/// next and previous holders; exactly one WI holds it at any cycle.
struct TokenState {
  int num_wis = 1;
  int holder = 0;
  std::int64_t held_for = 0;  // cycles the current holder has kept it
  std::int64_t max_hold = 1000;

  int next_wi() const { return (holder + 1) % num_wis; }
  int prev_wi() const { return (holder + num_wis - 1) % num_wis; }
  bool expired() const { return held_for >= max_hold; }
};

/// Passes the token on: holder := next_wi, hold counter reset.
TokenState token_advance(TokenState tok);

/// Cycles needed to serialise `bits` on a channel of `data_rate_bps` driven
/// by a `clock_hz` clock: ceil(bits / (rate / clock)).
std::int64_t serialization_cycles(std::int64_t bits, double data_rate_bps, double clock_hz);

/// Shared broadcast medium: at most one transmission in flight.
struct WirelessChannel {
  double data_rate_bps = 16e9;
  double range_mm = 20.0;
  std::int64_t busy_until = 0;  // first cycle the channel is free again

  bool idle(std::int64_t now) const { return now >= busy_until; }
};

/// Token grant bookkeeping used for liveness checks.
struct TokenStats {
  std::vector<std::int64_t> grants;
  std::vector<std::int64_t> last_grant;
  std::vector<std::int64_t> max_gap;

  explicit TokenStats(int num_wis = 1)
      : grants(num_wis, 0), last_grant(num_wis, -1), max_gap(num_wis, 0) {}

  void granted(int wi, std::int64_t cycle);
};

}  // namespace winoc
