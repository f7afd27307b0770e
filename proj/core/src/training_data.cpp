#include "winoc/training_data.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "winoc/errors.hpp"
#include "winoc/rng.hpp"

namespace winoc {

namespace {

constexpr std::array<char, 8> kDatasetMagic = {'W', 'N', 'O', 'C', 'D', 'S', 'T', '1'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ModelError("unexpected end of dataset file");
  return v;
}

}  // namespace

bool operator==(const TrainingDataset& a, const TrainingDataset& b) {
  if (a.n_components != b.n_components || a.steps != b.steps) return false;
  if (a.utilization.size() != b.utilization.size()) return false;
  for (std::size_t i = 0; i < a.utilization.size(); ++i) {
    if (a.utilization[i].values != b.utilization[i].values) return false;
  }
  return a.delta.size() == b.delta.size() &&
         std::memcmp(a.delta.data(), b.delta.data(), a.delta.size() * sizeof(float)) == 0;
}

TrainingDataset generate_training_data(const RcThermalModel& model, std::span<const ComponentKind> classes,
                                       const PowerConstants& power, std::vector<UtilizationVector> scenarios,
                                       int steps) {
  if (scenarios.empty()) throw ConfigError("n_scenarios must satisfy n_scenarios >= 1");
  if (steps < 1) throw ConfigError(fmt::format("steps must satisfy steps >= 1 (got {})", steps));
  const int n = model.size();

  TrainingDataset data;
  data.n_components = n;
  data.steps = steps;
  data.delta.resize(scenarios.size() * static_cast<std::size_t>(steps) * n);

  const UtilizationVector idle{std::vector<double>(n, 0.0)};
  const ThermalState baseline = model.steady_state(power_from_utilization(idle, classes, power));

  float* out = data.delta.data();
  for (const auto& u : scenarios) {
    if (static_cast<int>(u.size()) != n) throw RangeError("scenario utilisation has wrong length");
    const PowerProfile p = power_from_utilization(u, classes, power);
    ThermalState t = baseline;
    for (int h = 1; h <= steps; ++h) {
      t = model.step(t, p);
      for (int i = 0; i < n; ++i) *out++ = static_cast<float>(t.temps[i] - baseline.temps[i]);
    }
  }
  data.utilization = std::move(scenarios);
  return data;
}

TrainingDataset generate_training_data(const RcThermalModel& model, std::span<const ComponentKind> classes,
                                       const PowerConstants& power, int n_scenarios, int steps,
                                       std::uint64_t seed) {
  if (n_scenarios < 1) {
    throw ConfigError(fmt::format("n_scenarios must satisfy n_scenarios >= 1 (got {})", n_scenarios));
  }
  Rng rng = make_rng(seed, "dataset.utilization");
  std::vector<UtilizationVector> scenarios(n_scenarios);
  for (auto& u : scenarios) {
    u.values.resize(model.size());
    for (double& v : u.values) v = uniform01(rng);
  }
  return generate_training_data(model, classes, power, std::move(scenarios), steps);
}

void save_dataset(const TrainingDataset& data, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError(fmt::format("cannot write dataset file {}", path.string()));
  os.write(kDatasetMagic.data(), kDatasetMagic.size());
  write_pod<std::uint32_t>(os, 1);  // format version
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(data.n_scenarios()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(data.steps));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(data.n_components));
  for (const auto& u : data.utilization) {
    os.write(reinterpret_cast<const char*>(u.values.data()),
             static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  }
  os.write(reinterpret_cast<const char*>(data.delta.data()),
           static_cast<std::streamsize>(data.delta.size() * sizeof(float)));
  if (!os) throw ConfigError(fmt::format("failed writing dataset file {}", path.string()));
}

TrainingDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot open dataset file {}", path.string()));
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kDatasetMagic) throw ModelError(fmt::format("{} is not a dataset file", path.string()));
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1) throw ModelError(fmt::format("unsupported dataset version {}", version));

  TrainingDataset data;
  const auto n_scen = read_pod<std::uint32_t>(is);
  data.steps = static_cast<int>(read_pod<std::uint32_t>(is));
  data.n_components = static_cast<int>(read_pod<std::uint32_t>(is));
  data.utilization.resize(n_scen);
  for (auto& u : data.utilization) {
    u.values.resize(data.n_components);
    is.read(reinterpret_cast<char*>(u.values.data()),
            static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  }
  data.delta.resize(static_cast<std::size_t>(n_scen) * data.steps * data.n_components);
  is.read(reinterpret_cast<char*>(data.delta.data()),
          static_cast<std::streamsize>(data.delta.size() * sizeof(float)));
  if (!is) throw ModelError(fmt::format("truncated dataset file {}", path.string()));
  return data;
}

}  // namespace winoc
