#include "winoc/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

double PowerProfile::total() const { return std::accumulate(watts.begin(), watts.end(), 0.0); }

double ThermalState::peak() const {
  return temps.empty() ? t_ambient : *std::max_element(temps.begin(), temps.end());
}

const ClassPower& PowerConstants::of(ComponentKind kind) const {
  switch (kind) {
    case ComponentKind::Core: return core;
    case ComponentKind::Switch: return sw;
    case ComponentKind::Link: return link;
  }
  return core;
}

const ClassThermal& ThermalConstants::of(ComponentKind kind) const {
  switch (kind) {
    case ComponentKind::Core: return core;
    case ComponentKind::Switch: return sw;
    case ComponentKind::Link: return link;
  }
  return core;
}

std::vector<ComponentKind> component_classes(const Topology& topo) {
  std::vector<ComponentKind> out(topo.num_components());
  for (int i = 0; i < topo.num_components(); ++i) out[i] = topo.kind_of(i);
  return out;
}

PowerProfile power_from_utilization(const UtilizationVector& u, std::span<const ComponentKind> classes,
                                    const PowerConstants& consts) {
  if (u.size() != classes.size()) {
    throw RangeError(fmt::format("utilization vector has {} entries, expected {}", u.size(), classes.size()));
  }
  PowerProfile p;
  p.watts.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& c = consts.of(classes[i]);
    p.watts[i] = c.leak_w + std::clamp(u[i], 0.0, 1.0) * c.peak_dyn_w;
  }
  return p;
}

PowerProfile power_from_utilization(const UtilizationVector& u, const Topology& topo,
                                    const PowerConstants& consts) {
  const auto classes = component_classes(topo);
  return power_from_utilization(u, classes, consts);
}

struct RcThermalModel::Solver {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd g;
};

RcThermalModel::RcThermalModel(std::vector<double> capacitance, std::vector<double> r_vertical,
                               std::vector<LateralEdge> lateral, double t_ambient, double dt_s)
    : capacitance_(std::move(capacitance)),
      r_vertical_(std::move(r_vertical)),
      lateral_(std::move(lateral)),
      t_ambient_(t_ambient),
      dt_(dt_s) {
  const int n = size();
  if (n == 0) throw ConfigError("thermal model needs at least one node");
  if (static_cast<int>(r_vertical_.size()) != n) {
    throw ConfigError("capacitance and r_vertical sizes differ");
  }
  for (int i = 0; i < n; ++i) {
    if (!(capacitance_[i] > 0.0)) throw ConfigError(fmt::format("capacitance[{}] must be > 0", i));
    if (!(r_vertical_[i] > 0.0)) throw ConfigError(fmt::format("r_vertical[{}] must be > 0", i));
  }
  if (!(dt_ > 0.0)) throw ConfigError("dt must be > 0");

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : lateral_) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b) {
      throw ConfigError(fmt::format("lateral edge ({}, {}) is invalid", e.a, e.b));
    }
    if (!(e.resistance > 0.0)) throw ConfigError("lateral resistance must be > 0");
    adj[e.a].emplace_back(e.b, 1.0 / e.resistance);
    adj[e.b].emplace_back(e.a, 1.0 / e.resistance);
  }
  row_start_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    row_start_[i + 1] = row_start_[i] + static_cast<int>(adj[i].size());
    for (const auto& [j, g] : adj[i]) {
      col_.push_back(j);
      conductance_.push_back(g);
    }
  }

  const double limit = max_stable_dt();
  if (dt_ >= limit) {
    throw ConfigError(fmt::format("dt = {:g} s violates the explicit stability limit {:g} s", dt_, limit));
  }

  auto solver = std::make_shared<Solver>();
  solver->g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    solver->g(i, i) += 1.0 / r_vertical_[i];
    for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      solver->g(i, i) += conductance_[k];
      solver->g(i, col_[k]) -= conductance_[k];
    }
  }
  solver->llt.compute(solver->g);
  if (solver->llt.info() != Eigen::Success) {
    throw ModelError("thermal conductance matrix is not positive definite");
  }
  solver_ = std::move(solver);
}

RcThermalModel RcThermalModel::for_topology(const Topology& topo, const ThermalConstants& consts) {
  const int n = topo.num_components();
  std::vector<double> c(n);
  std::vector<double> rv(n);
  for (int i = 0; i < n; ++i) {
    const auto& k = consts.of(topo.kind_of(i));
    c[i] = k.capacitance;
    rv[i] = k.r_vertical;
  }
  std::vector<LateralEdge> lateral;
  for (int s = 0; s < topo.num_switches(); ++s) {
    lateral.push_back({topo.core_component(s), topo.switch_component(s), consts.r_lateral});
  }
  for (int l = 0; l < topo.num_links(); ++l) {
    const auto& lk = topo.links()[l];
    lateral.push_back({topo.link_component(l), topo.switch_component(lk.a), consts.r_lateral});
    lateral.push_back({topo.link_component(l), topo.switch_component(lk.b), consts.r_lateral});
  }
  return RcThermalModel(std::move(c), std::move(rv), std::move(lateral), consts.t_ambient, consts.dt_s);
}

double RcThermalModel::max_stable_dt() const {
  double limit = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    double g = 1.0 / r_vertical_[i];
    for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) g += conductance_[k];
    limit = std::min(limit, capacitance_[i] / g);
  }
  return limit;
}

ThermalState RcThermalModel::ambient_state() const {
  return ThermalState{std::vector<double>(size(), t_ambient_), t_ambient_};
}

void RcThermalModel::check_power(const PowerProfile& power) const {
  if (static_cast<int>(power.size()) != size()) {
    throw RangeError(fmt::format("power profile has {} entries, model has {}", power.size(), size()));
  }
}

ThermalState RcThermalModel::step(const ThermalState& state, const PowerProfile& power) const {
  check_power(power);
  if (static_cast<int>(state.size()) != size()) throw RangeError("thermal state size mismatch");
  ThermalState next{std::vector<double>(size()), t_ambient_};
  const auto& t = state.temps;
  for (int i = 0; i < size(); ++i) {
    double flow = power.watts[i] - (t[i] - t_ambient_) / r_vertical_[i];
    for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      flow -= (t[i] - t[col_[k]]) * conductance_[k];
    }
    next.temps[i] = t[i] + dt_ / capacitance_[i] * flow;
  }
  return next;
}

ThermalState RcThermalModel::run(ThermalState state, const PowerProfile& power, int steps) const {
  for (int s = 0; s < steps; ++s) state = step(state, power);
  return state;
}

ThermalState RcThermalModel::steady_state(const PowerProfile& power) const {
  check_power(power);
  const Eigen::Map<const Eigen::VectorXd> p(power.watts.data(), size());
  Eigen::VectorXd rise = solver_->llt.solve(p);
  // One refinement pass keeps the per-node residual far below a nanowatt.
  rise += solver_->llt.solve(p - solver_->g * rise);
  ThermalState out{std::vector<double>(size()), t_ambient_};
  for (int i = 0; i < size(); ++i) out.temps[i] = t_ambient_ + rise[i];
  return out;
}

std::vector<double> RcThermalModel::residual(const ThermalState& state, const PowerProfile& power) const {
  check_power(power);
  std::vector<double> r(size());
  const auto& t = state.temps;
  for (int i = 0; i < size(); ++i) {
    double flow = power.watts[i] - (t[i] - t_ambient_) / r_vertical_[i];
    for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      flow -= (t[i] - t[col_[k]]) * conductance_[k];
    }
    r[i] = flow;
  }
  return r;
}

double RcThermalModel::heat_to_ambient(const ThermalState& state) const {
  double total = 0.0;
  for (int i = 0; i < size(); ++i) total += (state.temps[i] - t_ambient_) / r_vertical_[i];
  return total;
}

PowerProfile uniform_reference_power(const Topology& topo, const PowerConstants& consts, double utilization) {
  UtilizationVector u{std::vector<double>(topo.num_components(), utilization)};
  return power_from_utilization(u, topo, consts);
}

ThermalState warmup(const RcThermalModel& model, const PowerProfile& reference, double target_peak) {
  const double amb = model.t_ambient();
  if (target_peak < amb) {
    throw ConfigError(fmt::format("warm-up target {:.3f} C is below ambient {:.3f} C", target_peak, amb));
  }
  if (target_peak == amb) return model.ambient_state();

  ThermalState ref = model.steady_state(reference);
  const double ref_rise = ref.peak() - amb;
  if (!(ref_rise > 0.0)) throw ModelError("warm-up reference power produces no temperature rise");
  const double scale = (target_peak - amb) / ref_rise;
  for (double& t : ref.temps) t = amb + scale * (t - amb);
  return ref;
}

}  // namespace winoc
