#include "winoc/token.hpp"

#include <algorithm>
#include <cmath>

#include "winoc/errors.hpp"

namespace winoc {

TokenState token_advance(TokenState tok) {
  tok.holder = tok.next_wi();
  tok.held_for = 0;
  return tok;
}

std::int64_t serialization_cycles(std::int64_t bits, double data_rate_bps, double clock_hz) {
  if (bits <= 0) return 0;
  if (data_rate_bps <= 0.0 || clock_hz <= 0.0) throw ConfigError("data rate and clock must be positive");
  const double bits_per_cycle = data_rate_bps / clock_hz;
  // Guard against 32 / 6.4 landing a hair above 5.
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(bits) / bits_per_cycle - 1e-9));
}

void TokenStats::granted(int wi, std::int64_t cycle) {
  ++grants[wi];
  if (last_grant[wi] >= 0) max_gap[wi] = std::max(max_gap[wi], cycle - last_grant[wi]);
  last_grant[wi] = cycle;
}

}  // namespace winoc
