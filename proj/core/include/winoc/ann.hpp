#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "winoc/rng.hpp"
#include "winoc/thermal.hpp"
#include "winoc/training_data.hpp"

namespace winoc {

enum class Activation : std::uint8_t { Sigmoid, Identity };

/// One independent sub-network: every stream sees the full input vector,
/// owns its hidden layer, and drives its own slice of the outputs.
struct StreamShape {
  int hidden = 0;
  int outputs = 0;

  friend bool operator==(const StreamShape&, const StreamShape&) = default;
};

struct AnnArchitecture {
  int inputs = 0;
  std::vector<StreamShape> streams;
  Activation hidden_activation = Activation::Sigmoid;

  /// cores / switches / links streams with 250 / 50 / 100 hidden neurons
  /// over (component utilisations + horizon).
  static AnnArchitecture thermal_default(const Topology& topo);

  int total_hidden() const;
  int total_outputs() const;
  /// Weights plus biases over all streams.
  int parameter_count() const;

  friend bool operator==(const AnnArchitecture&, const AnnArchitecture&) = default;
};

/// Maps a horizon in thermal steps onto [0, 1] as log(1 + h) / log(1 + max).
/// The log scale keeps one-window horizons (a handful of steps) resolvable
/// after 8-bit quantisation.
struct HorizonEncoding {
  double max_steps = 3000.0;

  double encode(double horizon_steps) const;
  double decode(double encoded) const;

  friend bool operator==(const HorizonEncoding&, const HorizonEncoding&) = default;
};

/// Multi-stream single-hidden-layer network. Parameters live in one flat
/// vector; per stream, in order: W1 (hidden x inputs, row-major), b1,
/// W2 (outputs x hidden, row-major), b2. Output layer is linear.
class AnnModel {
 public:
  AnnModel() = default;
  explicit AnnModel(AnnArchitecture arch);

  /// Weights drawn uniformly from [-init_scale, init_scale].
  static AnnModel random(AnnArchitecture arch, double init_scale, Rng& rng);

  const AnnArchitecture& arch() const { return arch_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  struct StreamParams {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
  };
  StreamParams stream(int s) const;
  /// Offset of stream s's parameters in params().
  std::size_t stream_offset(int s) const { return offsets_[s]; }
  /// Offset of stream s's first output in the concatenated output vector.
  int output_offset(int s) const { return output_offsets_[s]; }

  std::vector<double> forward(std::span<const double> x) const;
  /// Row-major batch forward: x is batch x inputs, result batch x outputs.
  std::vector<double> forward_batch(std::span<const double> x, int batch) const;

  HorizonEncoding horizon;

  friend bool operator==(const AnnModel& a, const AnnModel& b) {
    return a.arch_ == b.arch_ && a.params_ == b.params_ && a.horizon == b.horizon;
  }

 private:
  AnnArchitecture arch_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
  std::vector<int> output_offsets_;
};

/// Mean squared error over batch and outputs, and its gradient with respect
/// to every parameter (same layout as AnnModel::params()).
double mse_gradient(const AnnModel& model, std::span<const double> x, std::span<const double> y, int batch,
                    std::vector<double>& grad);
double mse_loss(const AnnModel& model, std::span<const double> x, std::span<const double> y, int batch);

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  int worst_parameter = -1;
};

/// Backprop against central finite differences (step eps) on one sample.
/// Relative error is |a - n| / max(|a|, |n|); pairs where both are below
/// 1e-9 count only toward the absolute error.
GradientCheck gradient_check(const AnnModel& model, std::span<const double> x, std::span<const double> y,
                             double eps = 1e-5);

struct Samples {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> x;  // count x inputs
  std::vector<double> y;  // count x outputs

  int count() const { return inputs == 0 ? 0 : static_cast<int>(x.size()) / inputs; }
};

struct SgdOptions {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int epochs = 100;
  int batch = 32;
  std::uint64_t seed = 1;
};

/// Plain mini-batch SGD with momentum on a fixed sample set; returns the
/// per-epoch training loss.
std::vector<double> fit(AnnModel& model, const Samples& samples, const SgdOptions& opt);

struct TrainingHyper {
  double learning_rate = 0.3;
  double momentum = 0.9;
  int epochs = 100;
  int batch = 64;
  double init_scale = 0.1;
  std::uint64_t seed = 1;
  /// Horizons drawn per training scenario per epoch.
  int samples_per_scenario = 64;
  /// Share of those draws taken log-uniformly (uniform in encoded space);
  /// the rest are uniform over 1..steps.
  double short_horizon_share = 0.5;
  double validation_fraction = 0.2;
  /// Full validation pass every this many epochs (and on the last).
  int validate_every = 5;
  /// Targets are divided by this during optimisation and folded back into
  /// the output layer afterwards.
  double target_scale = 10.0;
  bool verbose = false;
};

struct TrainingReport {
  double baseline_validation_rmse = 0.0;
  double best_validation_rmse = 0.0;
  int best_epoch = 0;
  std::vector<double> train_loss;      // per epoch, in scaled units
  std::vector<double> validation_rmse;  // per validation pass, degC
  std::vector<int> train_scenarios;
  std::vector<int> validation_scenarios;
  double seconds = 0.0;
};

/// Trains the thermal predictor on a dataset with an 80/20 scenario split
/// and returns the model with the best validation RMSE.
AnnModel train(const TrainingDataset& data, const TrainingHyper& hyper, TrainingReport* report = nullptr);

/// As above, starting from a given initial model.
AnnModel train(const TrainingDataset& data, AnnModel init, const TrainingHyper& hyper,
               TrainingReport* report = nullptr);

/// Root-mean-square error (degC) of the model over every recorded step of
/// the listed scenarios.
double dataset_rmse(const AnnModel& model, const TrainingDataset& data, std::span<const int> scenarios);

/// Split used by train(): scenario indices shuffled by seed, first
/// (1 - fraction) for training.
void split_scenarios(int n_scenarios, double validation_fraction, std::uint64_t seed, std::vector<int>& train,
                     std::vector<int>& validation);

/// Predicted temperature change of every component after `horizon_steps`.
std::vector<double> predict_delta(const AnnModel& model, const UtilizationVector& u, double horizon_steps);

/// t0 + predicted change. Throws RangeError outside [0, horizon.max_steps].
ThermalState predict(const AnnModel& model, const UtilizationVector& u, double horizon_steps,
                     const ThermalState& t0);

}  // namespace winoc
