#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "winoc/errors.hpp"
#include "winoc/model_io.hpp"
#include "winoc/quantized.hpp"

using namespace winoc;

namespace {

AnnModel random_default(std::uint64_t seed, double scale = 0.1) {
  auto rng = make_rng(seed, "quant-test");
  auto m = AnnModel::random(AnnArchitecture::thermal_default(Topology::build_mesh(8, 8)), scale, rng);
  m.horizon.max_steps = 3000;
  return m;
}

ThermalState flat_state(double t) { return ThermalState{std::vector<double>(240, t), 45.0}; }

}  // namespace

TEST(FixedPoint, RoundsAndSaturates) {
  FixedPoint f{16, 10};
  EXPECT_EQ(f.quantize(1.0), 1024);
  EXPECT_EQ(f.quantize(-0.5), -512);
  EXPECT_EQ(f.quantize(0.0004), 0);
  EXPECT_EQ(f.quantize(0.0006), 1);
  EXPECT_EQ(f.quantize(100.0), 32767);
  EXPECT_EQ(f.quantize(-100.0), -32768);
  EXPECT_DOUBLE_EQ(f.dequantize(1536), 1.5);
}

TEST(Quantized, InputCodes) {
  EXPECT_EQ(quantize_input(0.0), 0);
  EXPECT_EQ(quantize_input(1.0), 255);
  EXPECT_EQ(quantize_input(0.5), 128);
  EXPECT_EQ(quantize_input(2.0), 255);
  EXPECT_EQ(quantize_input(-1.0), 0);
}

TEST(Quantized, LatencyMatchesMacSchedule) {
  const QuantizedModel q(random_default(1));
  const std::int64_t l1 = 241LL * 400;
  const std::int64_t l2 = 250LL * 64 + 50LL * 64 + 100LL * 112;
  EXPECT_EQ(q.mac_ops(), l1 + l2);
  EXPECT_EQ(q.latency_cycles(), (l1 + 9) / 10 + (l2 + 9) / 10 + 4);
  EXPECT_EQ(q.latency_cycles(), 12684);
  EXPECT_LT(q.latency_cycles(), 25000);
}

TEST(Quantized, TracksFloatModel) {
  const auto m = random_default(2);
  const QuantizedModel q(m);
  EXPECT_EQ(q.saturated_weights(), 0);
  auto rng = make_rng(3, "quant-inputs");
  const auto t0 = flat_state(55.0);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    UtilizationVector u{std::vector<double>(240)};
    for (auto& v : u.values) v = uniform01(rng);
    const double h = 1 + static_cast<double>(uniform_index(rng, 3000));
    const auto qp = quantized_predict(q, u, h, t0, 68);
    // Float reference on the same 8-bit inputs.
    UtilizationVector uq{std::vector<double>(240)};
    const auto u8 = quantize_utilization(u);
    for (int i = 0; i < 240; ++i) uq[i] = u8[i] / 255.0;
    std::vector<double> x(uq.values);
    x.push_back(quantize_input(m.horizon.encode(h)) / 255.0);
    const auto y = m.forward(x);
    for (int c = 0; c < 240; ++c) worst = std::max(worst, std::abs(qp.temps[c] - (55.0 + y[c])));
    EXPECT_EQ(qp.diagnostics.accumulator_saturations, 0);
  }
  EXPECT_LE(worst, 0.5);
}

TEST(Quantized, StatusMatchesThresholdOfOwnTemps) {
  const QuantizedModel q(random_default(4, 0.3));
  auto rng = make_rng(5, "quant-status");
  UtilizationVector u{std::vector<double>(240)};
  for (auto& v : u.values) v = uniform01(rng);
  const auto qp = quantized_predict(q, u, 100, flat_state(67.5), 68, 77);
  EXPECT_EQ(qp.status, threshold_status(qp.temps, 68.0, 77));
  EXPECT_EQ(qp.status.timestamp, 77);
}

TEST(Quantized, ZeroModelBelowThresholdGivesNoFlags) {
  AnnModel m(AnnArchitecture::thermal_default(Topology::build_mesh(8, 8)));
  const QuantizedModel q(m);
  const std::vector<std::uint8_t> u8(240, 0);
  const auto qp = quantized_predict(q, u8, 0, flat_state(50.0), 68);
  EXPECT_EQ(qp.status.count(), 0);
  for (double t : qp.temps) EXPECT_DOUBLE_EQ(t, 50.0);
}

TEST(Quantized, ThresholdOutsideLutRejected) {
  const QuantizedModel q(random_default(6));
  const std::vector<std::uint8_t> u8(240, 0);
  EXPECT_THROW(quantized_predict(q, u8, 0, flat_state(50.0), 39), RangeError);
  EXPECT_THROW(quantized_predict(q, u8, 0, flat_state(50.0), 88), RangeError);
  EXPECT_NO_THROW(quantized_predict(q, u8, 0, flat_state(50.0), 87));
}

TEST(Quantized, LutsHaveConfiguredSizes) {
  const QuantizedModel q(random_default(7));
  EXPECT_EQ(q.sigmoid_lut().size(), 1352u);
  EXPECT_EQ(q.threshold_lut().size(), 48u);
  EXPECT_TRUE(std::is_sorted(q.sigmoid_lut().begin(), q.sigmoid_lut().end()));
  EXPECT_EQ(q.threshold_lut().front(), 40);
}

TEST(Quantized, RoundTripsThroughModelFile) {
  const auto m = random_default(8);
  const QuantizedModel q(m);
  const auto path = std::filesystem::temp_directory_path() / "winoc_quant_test_model.bin";
  save_model(path, m, &q);
  const auto f = load_model(path);
  ASSERT_TRUE(f.quantized.has_value());
  EXPECT_TRUE(*f.quantized == q);
  std::filesystem::remove(path);
}

TEST(Memory, FootprintBreakdown) {
  const auto arch = AnnArchitecture::thermal_default(Topology::build_mesh(8, 8));
  const auto m = memory_footprint(arch, QuantConfig{});
  EXPECT_EQ(m.reg_bank, 240);
  EXPECT_EQ(m.weights, 2LL * arch.parameter_count());
  EXPECT_EQ(m.weights, 254880);
  EXPECT_EQ(m.threshold_lut, 48);
  EXPECT_EQ(m.activation_lut, 1352);
  EXPECT_EQ(m.total(), 256520);
}

TEST(Memory, LutEstimator) {
  EXPECT_EQ(lut_estimator_footprint(0), 0);
  EXPECT_EQ(lut_estimator_footprint(3000), 3000LL * 240 * 1920);
  EXPECT_THROW(lut_estimator_footprint(-1), RangeError);
  const auto ann = memory_footprint(AnnArchitecture::thermal_default(Topology::build_mesh(8, 8)), QuantConfig{});
  for (const auto& iv : lut_intervals()) EXPECT_GE(lut_estimator_footprint(iv.rows) / ann.total(), 1000);
}

TEST(Memory, ReportMentionsEveryPart) {
  const auto text = memcalc_report(AnnArchitecture::thermal_default(Topology::build_mesh(8, 8)), QuantConfig{});
  for (const char* key : {"weights", "threshold LUT", "input register bank", "100us", "10ms"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}
