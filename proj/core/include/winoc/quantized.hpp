#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "winoc/ann.hpp"

namespace winoc {

/// Widths and sizes of the fixed-point inference pipeline.
struct QuantConfig {
  int weight_bits = 16;
  int frac_bits = 10;
  int input_bits = 8;
  int accumulator_bits = 32;
  int mac_units = 10;
  /// Register staging, LUT lookup, output accumulation and comparison.
  int pipeline_overhead_cycles = 4;
  int sigmoid_entries = 1352;
  double sigmoid_range = 8.0;  // LUT spans [-range, range]
  int threshold_entries = 48;
  int threshold_base_c = 40;  // entry i holds threshold_base_c + i
  double clock_hz = 2.5e9;
};

/// 240 over-threshold flags in flattened component order.
struct StatusBits {
  std::vector<bool> bits;
  std::int64_t timestamp = 0;

  int count() const;
  bool any_in(int first, int last) const;  // [first, last)
  friend bool operator==(const StatusBits&, const StatusBits&) = default;
};

/// Signed fixed-point codec for one weight width.
struct FixedPoint {
  int bits = 16;
  int frac = 10;

  std::int32_t max_code() const { return (std::int32_t{1} << (bits - 1)) - 1; }
  std::int32_t min_code() const { return -(std::int32_t{1} << (bits - 1)); }
  /// Round to nearest, saturating at the representable range.
  std::int32_t quantize(double v) const;
  double dequantize(std::int32_t code) const;
};

/// Fixed-point twin of an AnnModel with its lookup tables.
class QuantizedModel {
 public:
  QuantizedModel() = default;
  QuantizedModel(const AnnModel& model, QuantConfig cfg = {});

  const QuantConfig& config() const { return cfg_; }
  const AnnArchitecture& arch() const { return arch_; }
  const HorizonEncoding& horizon() const { return horizon_; }
  const std::vector<std::int16_t>& weights() const { return weights_; }
  const std::vector<std::uint8_t>& sigmoid_lut() const { return sigmoid_lut_; }
  const std::vector<std::uint8_t>& threshold_lut() const { return threshold_lut_; }
  /// Number of weights that saturated during conversion.
  int saturated_weights() const { return saturated_weights_; }

  /// Total multiply-accumulate operations for one prediction.
  std::int64_t mac_ops() const;
  /// ceil(ops per layer / mac_units) summed over layers, plus overhead.
  std::int64_t latency_cycles() const;

  /// Rebuild from stored parts (model files).
  static QuantizedModel from_parts(AnnArchitecture arch, HorizonEncoding horizon, QuantConfig cfg,
                                   std::vector<std::int16_t> weights, std::vector<std::uint8_t> sigmoid_lut,
                                   std::vector<std::uint8_t> threshold_lut);

  friend bool operator==(const QuantizedModel& a, const QuantizedModel& b) {
    return a.arch_ == b.arch_ && a.horizon_ == b.horizon_ && a.weights_ == b.weights_ &&
           a.sigmoid_lut_ == b.sigmoid_lut_ && a.threshold_lut_ == b.threshold_lut_;
  }

 private:
  void build_luts();

  QuantConfig cfg_;
  AnnArchitecture arch_;
  HorizonEncoding horizon_;
  std::vector<std::int16_t> weights_;  // same layout as AnnModel::params()
  std::vector<std::uint8_t> sigmoid_lut_;
  std::vector<std::uint8_t> threshold_lut_;
  int saturated_weights_ = 0;
};

std::uint8_t quantize_input(double u);
std::vector<std::uint8_t> quantize_utilization(const UtilizationVector& u);

struct QuantDiagnostics {
  int accumulator_saturations = 0;
  int lut_clamps = 0;
};

struct QuantizedPrediction {
  std::vector<double> temps;  // degC, from the Q.frac accumulator
  StatusBits status;
  std::int64_t latency_cycles = 0;
  QuantDiagnostics diagnostics;
};

/// Integer emulation of the MAC pipeline: 8-bit utilisations and horizon,
/// fixed-point weights, saturating accumulators, LUT sigmoid, and the
/// threshold comparator. `t_th_c` selects a threshold LUT entry.
QuantizedPrediction quantized_predict(const QuantizedModel& qm, std::span<const std::uint8_t> u8,
                                      std::uint8_t horizon8, const ThermalState& t0, int t_th_c,
                                      std::int64_t timestamp = 0);

/// Convenience: quantises `u` and the horizon (in thermal steps) first.
QuantizedPrediction quantized_predict(const QuantizedModel& qm, const UtilizationVector& u, double horizon_steps,
                                      const ThermalState& t0, int t_th_c, std::int64_t timestamp = 0);

/// Float reference for the status bits: temps > t_th.
StatusBits threshold_status(std::span<const double> temps, double t_th, std::int64_t timestamp = 0);

struct MemoryFootprint {
  std::int64_t reg_bank = 0;
  std::int64_t weights = 0;
  std::int64_t threshold_lut = 0;
  std::int64_t activation_lut = 0;

  std::int64_t total() const { return reg_bank + weights + threshold_lut + activation_lut; }
};

MemoryFootprint memory_footprint(const AnnArchitecture& arch, const QuantConfig& cfg);
MemoryFootprint memory_footprint(const QuantizedModel& qm);

/// Event-driven LUT estimator: rows x components x entries_per_row bytes,
/// one byte per stored temperature.
inline constexpr std::int64_t kLutEntriesPerRow = 1920;
std::int64_t lut_estimator_footprint(std::int64_t rows, int components = 240,
                                     std::int64_t entries_per_row = kLutEntriesPerRow);

struct LutInterval {
  const char* label;
  std::int64_t rows;
  const char* cited;
};
/// The three sampling intervals with their steady-state row counts.
std::span<const LutInterval> lut_intervals();

/// Text report of the ANN and LUT-estimator footprints with the published
/// reference values alongside.
std::string memcalc_report(const AnnArchitecture& arch, const QuantConfig& cfg);

}  // namespace winoc
