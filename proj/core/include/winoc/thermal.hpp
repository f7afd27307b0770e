#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "winoc/topology.hpp"

namespace winoc {

/// Per-component utilisation in [0, 1], indexed by flattened component id.
/// Core: busy fraction. Switch: buffer occupancy over capacity. Link: flits
/// moved over link capacity.
struct UtilizationVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

struct PowerProfile {
  std::vector<double> watts;

  std::size_t size() const { return watts.size(); }
  double total() const;
};

struct ThermalState {
  std::vector<double> temps;
  double t_ambient = 45.0;

  std::size_t size() const { return temps.size(); }
  double peak() const;
};

struct ClassPower {
  double leak_w = 0.0;
  double peak_dyn_w = 0.0;
};

/// Affine utilisation-to-power map per component class.
struct PowerConstants {
  ClassPower core{0.3, 1.2};
  ClassPower sw{0.15, 0.9};
  ClassPower link{0.02, 0.12};

  const ClassPower& of(ComponentKind kind) const;
};

struct ClassThermal {
  double capacitance = 0.0;  // J/degC
  double r_vertical = 0.0;   // degC/W to ambient
};

/// Lumped-RC constants for a topology-derived model. Core/switch/link nodes
/// are joined by `r_lateral` along switch-core and switch-link adjacency.
struct ThermalConstants {
  ClassThermal core{3.0e-5, 30.0};
  ClassThermal sw{1.0e-5, 40.0};
  ClassThermal link{5.0e-6, 80.0};
  double r_lateral = 30.0;
  double t_ambient = 45.0;
  double dt_s = 10.0e-6;
  std::int64_t cycles_per_step = 25'000;

  const ClassThermal& of(ComponentKind kind) const;
};

PowerProfile power_from_utilization(const UtilizationVector& u, std::span<const ComponentKind> classes,
                                    const PowerConstants& consts);
PowerProfile power_from_utilization(const UtilizationVector& u, const Topology& topo,
                                    const PowerConstants& consts);

std::vector<ComponentKind> component_classes(const Topology& topo);

struct LateralEdge {
  int a = 0;
  int b = 0;
  double resistance = 0.0;  // degC/W
};

/// Explicit-Euler lumped RC network:
///
///   t'[i] = t[i] + dt/c[i] * (p[i] - (t[i] - t_amb)/r_v[i] - sum_j (t[i] - t[j])/r_ij)
///
/// Construction rejects any dt at or above the explicit stability limit
/// min_i c[i] / sum of conductances at i.
class RcThermalModel {
 public:
  RcThermalModel(std::vector<double> capacitance, std::vector<double> r_vertical,
                 std::vector<LateralEdge> lateral, double t_ambient, double dt_s);

  static RcThermalModel for_topology(const Topology& topo, const ThermalConstants& consts);

  int size() const { return static_cast<int>(capacitance_.size()); }
  double t_ambient() const { return t_ambient_; }
  double dt() const { return dt_; }
  double max_stable_dt() const;

  std::span<const double> capacitance() const { return capacitance_; }
  std::span<const double> r_vertical() const { return r_vertical_; }
  std::span<const LateralEdge> lateral() const { return lateral_; }

  ThermalState ambient_state() const;

  ThermalState step(const ThermalState& state, const PowerProfile& power) const;
  /// Advance `steps` steps under constant power.
  ThermalState run(ThermalState state, const PowerProfile& power, int steps) const;

  /// Fixed point of `step`: solves the conductance system directly.
  ThermalState steady_state(const PowerProfile& power) const;

  /// Net heat flow into each node (W); zero everywhere at steady state.
  std::vector<double> residual(const ThermalState& state, const PowerProfile& power) const;
  /// Total heat leaving through the vertical resistances (W).
  double heat_to_ambient(const ThermalState& state) const;

 private:
  struct Solver;

  void check_power(const PowerProfile& power) const;

  std::vector<double> capacitance_;
  std::vector<double> r_vertical_;
  std::vector<LateralEdge> lateral_;
  double t_ambient_;
  double dt_;
  // CSR lateral adjacency
  std::vector<int> row_start_;
  std::vector<int> col_;
  std::vector<double> conductance_;
  std::shared_ptr<const Solver> solver_;
};

/// Uniform-utilisation power used to shape the warm-up profile.
PowerProfile uniform_reference_power(const Topology& topo, const PowerConstants& consts,
                                     double utilization = 0.5);

/// Steady state of `reference` with the rise above ambient scaled so that
/// the hottest component sits exactly at `target_peak`.
ThermalState warmup(const RcThermalModel& model, const PowerProfile& reference, double target_peak);

}  // namespace winoc
