#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "winoc/thermal.hpp"

namespace winoc {

/// Constant-utilisation thermal trajectories recorded from the RC oracle.
///
/// Scenario k holds one utilisation vector and the temperature change
/// dT(h) = t(h) - t(0) of every component after h = 1..steps thermal steps,
/// where t(0) is the leakage-only steady state.
struct TrainingDataset {
  int n_components = 0;
  int steps = 0;
  std::vector<UtilizationVector> utilization;
  std::vector<float> delta;  // [scenario][step][component]

  int n_scenarios() const { return static_cast<int>(utilization.size()); }

  /// Temperature change of every component at horizon h (1-based).
  std::span<const float> delta_at(int scenario, int horizon) const {
    const std::size_t offset =
        (static_cast<std::size_t>(scenario) * steps + static_cast<std::size_t>(horizon - 1)) * n_components;
    return {delta.data() + offset, static_cast<std::size_t>(n_components)};
  }

  friend bool operator==(const TrainingDataset& a, const TrainingDataset& b);
};

/// Runs each scenario through `model` from the leakage steady state.
TrainingDataset generate_training_data(const RcThermalModel& model, std::span<const ComponentKind> classes,
                                       const PowerConstants& power, std::vector<UtilizationVector> scenarios,
                                       int steps);

/// Draws `n_scenarios` utilisation vectors uniformly from [0, 1]^n.
TrainingDataset generate_training_data(const RcThermalModel& model, std::span<const ComponentKind> classes,
                                       const PowerConstants& power, int n_scenarios, int steps,
                                       std::uint64_t seed);

/// Packed little-endian binary: magic, (n_scenarios, steps, n_components),
/// utilisations as f64, deltas as f32.
void save_dataset(const TrainingDataset& data, const std::filesystem::path& path);
TrainingDataset load_dataset(const std::filesystem::path& path);

}  // namespace winoc
