#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "winoc/report_io.hpp"

using namespace winoc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(DtmVariant v, std::int64_t duration) {
  ExperimentConfig c;
  c.topology.grid_w = 4;
  c.topology.grid_h = 4;
  c.topology.num_wis = 2;
  c.workload.hot_tasks = {5, 10};
  c.predictor = PredictorKind::Oracle;
  c.dtm_enabled = v != DtmVariant::Off;
  c.duration_cycles = duration;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int lines(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

fs::path fresh_dir(const char* name) {
  const auto d = fs::temp_directory_path() / (std::string("winoc_report_test_") + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(ReportIo, EmptyRunWritesHeaders) {
  const auto dir = fresh_dir("empty");
  auto r = run_experiment(small(DtmVariant::Combined, 0));
  const auto files = write_run_report(r, dir);
  for (const char* name : {"triggers.csv", "latency_cdf.csv", "control.csv"}) {
    ASSERT_TRUE(fs::exists(dir / name)) << name;
    EXPECT_EQ(lines(dir / name), 1) << name;
  }
  EXPECT_EQ(lines(dir / "peak_temp.csv"), 2);
  EXPECT_EQ(slurp(dir / "peak_temp.csv").rfind("cycle,time_us,peak_c,decision\n", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_FALSE(fs::exists(dir / "component_temps.csv"));
  fs::remove_all(dir);
}

TEST(ReportIo, ComparisonFiles) {
  const auto dir = fresh_dir("compare");
  const auto cmp = compare({{"off", small(DtmVariant::Off, 250'000)}, {"combined", small(DtmVariant::Combined, 250'000)}});
  write_comparison(cmp, dir);
  EXPECT_TRUE(fs::exists(dir / "off_peak_temp.csv"));
  EXPECT_TRUE(fs::exists(dir / "combined_peak_temp.csv"));
  const auto joined = slurp(dir / "compare_peak_temp.csv");
  EXPECT_EQ(joined.substr(0, joined.find('\n')), "cycle,off,combined");
  EXPECT_EQ(lines(dir / "compare_peak_temp.csv"), 12);
  EXPECT_EQ(lines(dir / "compare_summary.csv"), 3);
  fs::remove_all(dir);
}

TEST(ReportIo, RerunIsByteIdentical) {
  const auto a = fresh_dir("rerun_a");
  const auto b = fresh_dir("rerun_b");
  const auto cfg = small(DtmVariant::Combined, 250'000);
  write_run_report(run_experiment(cfg), a);
  write_manifest(cfg, a, "simulate");
  write_run_report(run_experiment(cfg), b);
  write_manifest(cfg, b, "simulate");
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 7);
  const auto manifest = slurp(a / "manifest.txt");
  EXPECT_NE(manifest.find(config_hash(cfg)), std::string::npos);
  EXPECT_NE(manifest.find(version()), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(ReportIo, SeriesFileWhenRecorded) {
  const auto dir = fresh_dir("series");
  auto cfg = small(DtmVariant::Off, 100'000);
  cfg.record_series = true;
  write_run_report(run_experiment(cfg), dir);
  EXPECT_EQ(lines(dir / "component_temps.csv"), 6);
  fs::remove_all(dir);
}
