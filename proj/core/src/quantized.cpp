#include "winoc/quantized.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

namespace {

constexpr std::int64_t kInputMax = 255;

struct Accumulator {
  std::int64_t lo;
  std::int64_t hi;
  std::int64_t value = 0;
  int* saturations;

  void add(std::int64_t v) {
    value += v;
    if (value > hi) {
      value = hi;
      ++*saturations;
    } else if (value < lo) {
      value = lo;
      ++*saturations;
    }
  }
};

std::int64_t round_div(std::int64_t num, std::int64_t den) {
  // den > 0; rounds half away from zero
  return num >= 0 ? (num + den / 2) / den : -((-num + den / 2) / den);
}

}  // namespace

int StatusBits::count() const { return static_cast<int>(std::count(bits.begin(), bits.end(), true)); }

bool StatusBits::any_in(int first, int last) const {
  for (int i = first; i < last; ++i) {
    if (bits[i]) return true;
  }
  return false;
}

std::int32_t FixedPoint::quantize(double v) const {
  const double scaled = std::round(std::ldexp(v, frac));
  return static_cast<std::int32_t>(std::clamp(scaled, static_cast<double>(min_code()), static_cast<double>(max_code())));
}

double FixedPoint::dequantize(std::int32_t code) const { return std::ldexp(static_cast<double>(code), -frac); }

QuantizedModel::QuantizedModel(const AnnModel& model, QuantConfig cfg)
    : cfg_(cfg), arch_(model.arch()), horizon_(model.horizon) {
  if (cfg_.weight_bits < 2 || cfg_.weight_bits > 16) {
    throw ConfigError(fmt::format("weight_bits must satisfy 2 <= weight_bits <= 16 (got {})", cfg_.weight_bits));
  }
  if (cfg_.frac_bits < 0 || cfg_.frac_bits >= cfg_.weight_bits) {
    throw ConfigError(fmt::format("frac_bits must satisfy 0 <= frac_bits < weight_bits (got {})", cfg_.frac_bits));
  }
  if (cfg_.mac_units < 1) throw ConfigError(fmt::format("mac_units must satisfy mac_units >= 1 (got {})", cfg_.mac_units));
  if (arch_.hidden_activation != Activation::Sigmoid) throw ModelError("quantised pipeline needs sigmoid hidden units");

  const FixedPoint fp{cfg_.weight_bits, cfg_.frac_bits};
  weights_.reserve(model.params().size());
  for (double w : model.params()) {
    const auto q = fp.quantize(w);
    if (q == fp.max_code() || q == fp.min_code()) ++saturated_weights_;
    weights_.push_back(static_cast<std::int16_t>(q));
  }
  build_luts();
}

QuantizedModel QuantizedModel::from_parts(AnnArchitecture arch, HorizonEncoding horizon, QuantConfig cfg,
                                          std::vector<std::int16_t> weights, std::vector<std::uint8_t> sigmoid_lut,
                                          std::vector<std::uint8_t> threshold_lut) {
  QuantizedModel q;
  q.cfg_ = cfg;
  q.arch_ = std::move(arch);
  q.horizon_ = horizon;
  if (weights.size() != static_cast<std::size_t>(q.arch_.parameter_count())) {
    throw ModelError("quantised weight count does not match the architecture");
  }
  q.weights_ = std::move(weights);
  q.cfg_.sigmoid_entries = static_cast<int>(sigmoid_lut.size());
  q.cfg_.threshold_entries = static_cast<int>(threshold_lut.size());
  q.sigmoid_lut_ = std::move(sigmoid_lut);
  q.threshold_lut_ = std::move(threshold_lut);
  if (q.sigmoid_lut_.size() < 2 || q.threshold_lut_.empty()) throw ModelError("lookup tables are empty");
  q.cfg_.threshold_base_c = q.threshold_lut_.front();
  return q;
}

void QuantizedModel::build_luts() {
  if (cfg_.sigmoid_entries < 2) throw ConfigError("sigmoid_entries must satisfy sigmoid_entries >= 2");
  sigmoid_lut_.resize(cfg_.sigmoid_entries);
  const double span = 2.0 * cfg_.sigmoid_range;
  for (int k = 0; k < cfg_.sigmoid_entries; ++k) {
    const double x = -cfg_.sigmoid_range + span * k / (cfg_.sigmoid_entries - 1);
    sigmoid_lut_[k] = static_cast<std::uint8_t>(std::lround(kInputMax / (1.0 + std::exp(-x))));
  }
  if (cfg_.threshold_entries < 1 || cfg_.threshold_base_c < 0 ||
      cfg_.threshold_base_c + cfg_.threshold_entries - 1 > 255) {
    throw ConfigError("threshold LUT entries must fit in 8 bits");
  }
  threshold_lut_.resize(cfg_.threshold_entries);
  for (int i = 0; i < cfg_.threshold_entries; ++i) {
    threshold_lut_[i] = static_cast<std::uint8_t>(cfg_.threshold_base_c + i);
  }
}

std::int64_t QuantizedModel::mac_ops() const {
  std::int64_t ops = 0;
  for (const auto& s : arch_.streams) ops += static_cast<std::int64_t>(s.hidden) * arch_.inputs + s.outputs * s.hidden;
  return ops;
}

std::int64_t QuantizedModel::latency_cycles() const {
  std::int64_t l1 = 0;
  std::int64_t l2 = 0;
  for (const auto& s : arch_.streams) {
    l1 += static_cast<std::int64_t>(s.hidden) * arch_.inputs;
    l2 += static_cast<std::int64_t>(s.outputs) * s.hidden;
  }
  const std::int64_t m = cfg_.mac_units;
  return (l1 + m - 1) / m + (l2 + m - 1) / m + cfg_.pipeline_overhead_cycles;
}

std::uint8_t quantize_input(double u) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * kInputMax));
}

std::vector<std::uint8_t> quantize_utilization(const UtilizationVector& u) {
  std::vector<std::uint8_t> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = quantize_input(u[i]);
  return out;
}

QuantizedPrediction quantized_predict(const QuantizedModel& qm, std::span<const std::uint8_t> u8,
                                      std::uint8_t horizon8, const ThermalState& t0, int t_th_c,
                                      std::int64_t timestamp) {
  const auto& arch = qm.arch();
  const auto& cfg = qm.config();
  const int n_u = arch.inputs - 1;
  if (static_cast<int>(u8.size()) != n_u) throw RangeError("utilisation register bank has wrong length");
  if (static_cast<int>(t0.size()) != arch.total_outputs()) throw RangeError("thermal state has wrong length");
  const int thr_index = t_th_c - cfg.threshold_base_c;
  if (thr_index < 0 || thr_index >= static_cast<int>(qm.threshold_lut().size())) {
    throw RangeError(fmt::format("threshold {} C is outside the threshold LUT [{}, {}]", t_th_c, cfg.threshold_base_c,
                                 cfg.threshold_base_c + static_cast<int>(qm.threshold_lut().size()) - 1));
  }

  QuantizedPrediction out;
  auto& diag = out.diagnostics;
  const std::int64_t acc_hi = (std::int64_t{1} << (cfg.accumulator_bits - 1)) - 1;
  const std::int64_t acc_lo = -(std::int64_t{1} << (cfg.accumulator_bits - 1));

  // Register bank: utilisations then the horizon code.
  std::vector<std::int64_t> x(u8.begin(), u8.end());
  x.push_back(horizon8);

  // Products carry scale 2^frac * 255; biases are promoted to match.
  const std::int64_t scale = (std::int64_t{1} << cfg.frac_bits) * kInputMax;
  const auto& lut = qm.sigmoid_lut();
  const std::int64_t entries = static_cast<std::int64_t>(lut.size());
  const std::int64_t range = std::llround(cfg.sigmoid_range);
  const std::int64_t lut_den = 2 * range * scale;

  const std::int64_t frac_one = std::int64_t{1} << cfg.frac_bits;
  const std::int64_t thr_q = static_cast<std::int64_t>(qm.threshold_lut()[thr_index]) << cfg.frac_bits;

  out.temps.resize(arch.total_outputs());
  out.status.bits.assign(arch.total_outputs(), false);
  out.status.timestamp = timestamp;

  const auto& w = qm.weights();
  std::size_t offset = 0;
  int out_offset = 0;
  std::vector<std::int64_t> hidden;
  for (const auto& st : arch.streams) {
    const std::int16_t* w1 = w.data() + offset;
    const std::int16_t* b1 = w1 + static_cast<std::size_t>(st.hidden) * arch.inputs;
    const std::int16_t* w2 = b1 + st.hidden;
    const std::int16_t* b2 = w2 + static_cast<std::size_t>(st.outputs) * st.hidden;

    hidden.assign(st.hidden, 0);
    for (int j = 0; j < st.hidden; ++j) {
      Accumulator acc{acc_lo, acc_hi, 0, &diag.accumulator_saturations};
      acc.add(static_cast<std::int64_t>(b1[j]) * kInputMax);
      const std::int16_t* row = w1 + static_cast<std::size_t>(j) * arch.inputs;
      for (int i = 0; i < arch.inputs; ++i) acc.add(static_cast<std::int64_t>(row[i]) * x[i]);
      std::int64_t idx = (acc.value + range * scale) * (entries - 1);
      idx = idx >= 0 ? (idx + lut_den / 2) / lut_den : -1;
      if (idx < 0 || idx >= entries) {
        ++diag.lut_clamps;
        idx = std::clamp<std::int64_t>(idx, 0, entries - 1);
      }
      hidden[j] = lut[idx];
    }
    for (int k = 0; k < st.outputs; ++k) {
      Accumulator acc{acc_lo, acc_hi, 0, &diag.accumulator_saturations};
      acc.add(static_cast<std::int64_t>(b2[k]) * kInputMax);
      const std::int16_t* row = w2 + static_cast<std::size_t>(k) * st.hidden;
      for (int j = 0; j < st.hidden; ++j) acc.add(static_cast<std::int64_t>(row[j]) * hidden[j]);
      const int c = out_offset + k;
      const std::int64_t delta_q = round_div(acc.value, kInputMax);
      const std::int64_t temp_q = std::llround(t0.temps[c] * static_cast<double>(frac_one)) + delta_q;
      out.temps[c] = static_cast<double>(temp_q) / static_cast<double>(frac_one);
      out.status.bits[c] = temp_q > thr_q;
    }
    offset += static_cast<std::size_t>(st.hidden) * (arch.inputs + 1) + static_cast<std::size_t>(st.outputs) * (st.hidden + 1);
    out_offset += st.outputs;
  }
  out.latency_cycles = qm.latency_cycles();
  return out;
}

QuantizedPrediction quantized_predict(const QuantizedModel& qm, const UtilizationVector& u, double horizon_steps,
                                      const ThermalState& t0, int t_th_c, std::int64_t timestamp) {
  if (!(horizon_steps >= 0.0) || horizon_steps > qm.horizon().max_steps) {
    throw RangeError(fmt::format("horizon {} outside trained range [0, {}]", horizon_steps, qm.horizon().max_steps));
  }
  const auto u8 = quantize_utilization(u);
  return quantized_predict(qm, u8, quantize_input(qm.horizon().encode(horizon_steps)), t0, t_th_c, timestamp);
}

StatusBits threshold_status(std::span<const double> temps, double t_th, std::int64_t timestamp) {
  StatusBits s;
  s.timestamp = timestamp;
  s.bits.resize(temps.size());
  for (std::size_t i = 0; i < temps.size(); ++i) s.bits[i] = temps[i] > t_th;
  return s;
}

MemoryFootprint memory_footprint(const AnnArchitecture& arch, const QuantConfig& cfg) {
  MemoryFootprint m;
  m.reg_bank = static_cast<std::int64_t>(arch.inputs - 1) * ((cfg.input_bits + 7) / 8);
  m.weights = static_cast<std::int64_t>(arch.parameter_count()) * ((cfg.weight_bits + 7) / 8);
  m.threshold_lut = cfg.threshold_entries;
  m.activation_lut = cfg.sigmoid_entries;
  return m;
}

MemoryFootprint memory_footprint(const QuantizedModel& qm) { return memory_footprint(qm.arch(), qm.config()); }

std::int64_t lut_estimator_footprint(std::int64_t rows, int components, std::int64_t entries_per_row) {
  if (rows < 0) throw RangeError("rows must be non-negative");
  return rows * components * entries_per_row;
}

std::span<const LutInterval> lut_intervals() {
  static constexpr std::array<LutInterval, 3> kIntervals = {{
      {"100us", 3000, "1382MB"},
      {"1ms", 1700, "784MB"},
      {"10ms", 1000, "460MB"},
  }};
  return kIntervals;
}

std::string memcalc_report(const AnnArchitecture& arch, const QuantConfig& cfg) {
  const auto m = memory_footprint(arch, cfg);
  std::string s;
  s += fmt::format("ANN predictor ({} inputs, {} hidden, {} outputs, {}-bit weights)\n", arch.inputs,
                   arch.total_hidden(), arch.total_outputs(), cfg.weight_bits);
  s += fmt::format("  {:<24}{:>10} B  {:>10.3f} KB   cited {}\n", "input register bank", m.reg_bank,
                   m.reg_bank / 1000.0, "1.2KB");
  s += fmt::format("  {:<24}{:>10} B  {:>10.3f} KB   cited {}\n", "weights", m.weights, m.weights / 1000.0, "300KB");
  s += fmt::format("  {:<24}{:>10} B  {:>10.3f} KB   cited {}\n", "threshold LUT", m.threshold_lut,
                   m.threshold_lut / 1000.0, "0.048KB");
  s += fmt::format("  {:<24}{:>10} B  {:>10.2f} KiB  cited {}\n", "activation LUT", m.activation_lut,
                   m.activation_lut / 1024.0, "1.32KB");
  s += fmt::format("  {:<24}{:>10} B  {:>10.3f} KB   cited {}\n", "total", m.total(), m.total() / 1000.0, "302.568KB");
  s += fmt::format("LUT thermal estimator ({} components x {} entries per row, 1 byte each)\n", arch.total_outputs(),
                   kLutEntriesPerRow);
  for (const auto& iv : lut_intervals()) {
    const auto bytes = lut_estimator_footprint(iv.rows, arch.total_outputs());
    s += fmt::format("  {:<6} rows {:>5}  {:>10.2f} MB   cited {:<7} ratio to ANN {:.0f}x\n", iv.label, iv.rows,
                     bytes / 1e6, iv.cited, static_cast<double>(bytes) / static_cast<double>(m.total()));
  }
  return s;
}

}  // namespace winoc
