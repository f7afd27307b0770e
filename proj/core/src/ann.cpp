#include "winoc/ann.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <Eigen/Core>
#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMapRowMat = Eigen::Map<const RowMat>;
using MapRowMat = Eigen::Map<RowMat>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

void activate(RowMat& z, Activation act) {
  if (act == Activation::Sigmoid) {
    z = (1.0 + (-z.array()).exp()).inverse().matrix();
  }
}

struct StreamDims {
  int hidden;
  int outputs;
  std::size_t w1, b1, w2, b2;  // offsets
};

std::vector<StreamDims> stream_dims(const AnnArchitecture& arch, std::span<const std::size_t> offsets) {
  std::vector<StreamDims> out;
  for (std::size_t s = 0; s < arch.streams.size(); ++s) {
    const auto& st = arch.streams[s];
    StreamDims d{st.hidden, st.outputs, 0, 0, 0, 0};
    d.w1 = offsets[s];
    d.b1 = d.w1 + static_cast<std::size_t>(st.hidden) * arch.inputs;
    d.w2 = d.b1 + st.hidden;
    d.b2 = d.w2 + static_cast<std::size_t>(st.outputs) * st.hidden;
    out.push_back(d);
  }
  return out;
}

// Column sums through an owned (aligned) temporary: Eigen peels the packet
// loop by destination alignment, which would make the rounding depend on
// where the caller's buffer sits.
void colwise_sum_into(const RowMat& m, double* dst) {
  const Eigen::RowVectorXd sums = m.colwise().sum();
  std::copy_n(sums.data(), sums.size(), dst);
}

// Forward pass keeping hidden activations for backprop. Returns batch x outputs.
RowMat forward_keep(const AnnModel& model, const CMapRowMat& x, std::vector<RowMat>* hidden) {
  const auto& arch = model.arch();
  const auto p = model.params();
  std::vector<std::size_t> offs;
  for (std::size_t s = 0; s < arch.streams.size(); ++s) offs.push_back(model.stream_offset(static_cast<int>(s)));
  const auto dims = stream_dims(arch, offs);

  RowMat y(x.rows(), arch.total_outputs());
  if (hidden) hidden->resize(dims.size());
  for (std::size_t s = 0; s < dims.size(); ++s) {
    const auto& d = dims[s];
    CMapRowMat w1(p.data() + d.w1, d.hidden, arch.inputs);
    CMapVec b1(p.data() + d.b1, d.hidden);
    CMapRowMat w2(p.data() + d.w2, d.outputs, d.hidden);
    CMapVec b2(p.data() + d.b2, d.outputs);

    RowMat a = x * w1.transpose();
    a.rowwise() += b1.transpose();
    activate(a, arch.hidden_activation);
    RowMat ys = a * w2.transpose();
    ys.rowwise() += b2.transpose();
    y.middleCols(model.output_offset(static_cast<int>(s)), d.outputs) = ys;
    if (hidden) (*hidden)[s] = std::move(a);
  }
  return y;
}

}  // namespace

AnnArchitecture AnnArchitecture::thermal_default(const Topology& topo) {
  AnnArchitecture a;
  a.inputs = topo.num_components() + 1;
  a.streams = {{250, topo.num_cores()}, {50, topo.num_switches()}, {100, topo.num_links()}};
  a.hidden_activation = Activation::Sigmoid;
  return a;
}

int AnnArchitecture::total_hidden() const {
  int n = 0;
  for (const auto& s : streams) n += s.hidden;
  return n;
}

int AnnArchitecture::total_outputs() const {
  int n = 0;
  for (const auto& s : streams) n += s.outputs;
  return n;
}

int AnnArchitecture::parameter_count() const {
  int n = 0;
  for (const auto& s : streams) n += s.hidden * (inputs + 1) + s.outputs * (s.hidden + 1);
  return n;
}

double HorizonEncoding::encode(double horizon_steps) const {
  return std::log1p(horizon_steps) / std::log1p(max_steps);
}

double HorizonEncoding::decode(double encoded) const {
  return std::expm1(encoded * std::log1p(max_steps));
}

AnnModel::AnnModel(AnnArchitecture arch) : arch_(std::move(arch)) {
  if (arch_.inputs < 1) throw ConfigError("network needs at least one input");
  if (arch_.streams.empty()) throw ConfigError("network needs at least one stream");
  std::size_t off = 0;
  int out_off = 0;
  for (const auto& s : arch_.streams) {
    if (s.hidden < 1 || s.outputs < 1) throw ConfigError("stream sizes must be positive");
    offsets_.push_back(off);
    output_offsets_.push_back(out_off);
    off += static_cast<std::size_t>(s.hidden) * (arch_.inputs + 1) + static_cast<std::size_t>(s.outputs) * (s.hidden + 1);
    out_off += s.outputs;
  }
  params_.assign(off, 0.0);
}

AnnModel AnnModel::random(AnnArchitecture arch, double init_scale, Rng& rng) {
  AnnModel m(std::move(arch));
  for (double& w : m.params_) w = uniform(rng, -init_scale, init_scale);
  return m;
}

AnnModel::StreamParams AnnModel::stream(int s) const {
  const auto& st = arch_.streams[s];
  const double* base = params_.data() + offsets_[s];
  const double* w1 = base;
  const double* b1 = w1 + static_cast<std::size_t>(st.hidden) * arch_.inputs;
  const double* w2 = b1 + st.hidden;
  const double* b2 = w2 + static_cast<std::size_t>(st.outputs) * st.hidden;
  return {w1, b1, w2, b2};
}

std::vector<double> AnnModel::forward(std::span<const double> x) const { return forward_batch(x, 1); }

std::vector<double> AnnModel::forward_batch(std::span<const double> x, int batch) const {
  if (x.size() != static_cast<std::size_t>(batch) * arch_.inputs) {
    throw RangeError(fmt::format("input has {} values, expected {} x {}", x.size(), batch, arch_.inputs));
  }
  const CMapRowMat xm(x.data(), batch, arch_.inputs);
  const RowMat y = forward_keep(*this, xm, nullptr);
  return {y.data(), y.data() + y.size()};
}

double mse_loss(const AnnModel& model, std::span<const double> x, std::span<const double> y, int batch) {
  const auto yhat = model.forward_batch(x, batch);
  if (y.size() != yhat.size()) throw RangeError("target size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (yhat[i] - y[i]) * (yhat[i] - y[i]);
  return sum / static_cast<double>(y.size());
}

double mse_gradient(const AnnModel& model, std::span<const double> x, std::span<const double> y, int batch,
                    std::vector<double>& grad) {
  const auto& arch = model.arch();
  if (x.size() != static_cast<std::size_t>(batch) * arch.inputs) throw RangeError("input size mismatch");
  if (y.size() != static_cast<std::size_t>(batch) * arch.total_outputs()) throw RangeError("target size mismatch");

  const CMapRowMat xm(x.data(), batch, arch.inputs);
  const CMapRowMat ym(y.data(), batch, arch.total_outputs());
  std::vector<RowMat> hidden;
  const RowMat yhat = forward_keep(model, xm, &hidden);
  const RowMat diff = yhat - ym;
  const double denom = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / denom;

  grad.assign(model.params().size(), 0.0);
  const auto p = model.params();
  for (std::size_t s = 0; s < arch.streams.size(); ++s) {
    const auto& st = arch.streams[s];
    const std::size_t w1o = model.stream_offset(static_cast<int>(s));
    const std::size_t b1o = w1o + static_cast<std::size_t>(st.hidden) * arch.inputs;
    const std::size_t w2o = b1o + st.hidden;
    const std::size_t b2o = w2o + static_cast<std::size_t>(st.outputs) * st.hidden;

    const RowMat dy = diff.middleCols(model.output_offset(static_cast<int>(s)), st.outputs) * (2.0 / denom);
    const RowMat& a = hidden[s];
    CMapRowMat w2(p.data() + w2o, st.outputs, st.hidden);

    MapRowMat(grad.data() + w2o, st.outputs, st.hidden) = dy.transpose() * a;
    colwise_sum_into(dy, grad.data() + b2o);

    RowMat dz = dy * w2;
    if (arch.hidden_activation == Activation::Sigmoid) {
      dz.array() *= a.array() * (1.0 - a.array());
    }
    MapRowMat(grad.data() + w1o, st.hidden, arch.inputs) = dz.transpose() * xm;
    colwise_sum_into(dz, grad.data() + b1o);
  }
  return loss;
}

GradientCheck gradient_check(const AnnModel& model, std::span<const double> x, std::span<const double> y,
                             double eps) {
  std::vector<double> analytic;
  mse_gradient(model, x, y, 1, analytic);

  AnnModel probe = model;
  GradientCheck out;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double saved = probe.params()[i];
    probe.params()[i] = saved + eps;
    const double up = mse_loss(probe, x, y, 1);
    probe.params()[i] = saved - eps;
    const double down = mse_loss(probe, x, y, 1);
    probe.params()[i] = saved;

    const double numeric = (up - down) / (2.0 * eps);
    const double abs_err = std::abs(analytic[i] - numeric);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    out.max_absolute_error = std::max(out.max_absolute_error, abs_err);
    if (scale >= 1e-9) {
      const double rel = abs_err / scale;
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst_parameter = static_cast<int>(i);
      }
    }
  }
  return out;
}

namespace {

struct MomentumSgd {
  std::vector<double> velocity;
  double lr;
  double momentum;

  void step(std::span<double> params, const std::vector<double>& grad) {
    if (velocity.empty()) velocity.assign(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = momentum * velocity[i] - lr * grad[i];
      params[i] += velocity[i];
    }
  }
};

}  // namespace

std::vector<double> fit(AnnModel& model, const Samples& samples, const SgdOptions& opt) {
  const int n = samples.count();
  if (n == 0) throw TrainingError("no training samples");
  if (samples.inputs != model.arch().inputs || samples.outputs != model.arch().total_outputs()) {
    throw TrainingError("sample shape does not match the network");
  }
  Rng rng = make_rng(opt.seed, "fit.shuffle");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  MomentumSgd sgd{{}, opt.learning_rate, opt.momentum};

  std::vector<double> history;
  std::vector<double> bx;
  std::vector<double> by;
  std::vector<double> grad;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += opt.batch) {
      const int b = std::min(opt.batch, n - start);
      bx.clear();
      by.clear();
      for (int k = 0; k < b; ++k) {
        const int i = order[start + k];
        bx.insert(bx.end(), samples.x.begin() + static_cast<std::ptrdiff_t>(i) * samples.inputs,
                  samples.x.begin() + static_cast<std::ptrdiff_t>(i + 1) * samples.inputs);
        by.insert(by.end(), samples.y.begin() + static_cast<std::ptrdiff_t>(i) * samples.outputs,
                  samples.y.begin() + static_cast<std::ptrdiff_t>(i + 1) * samples.outputs);
      }
      const double loss = mse_gradient(model, bx, by, b, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError(fmt::format("training diverged at epoch {} (loss {}, lr {})", epoch, loss,
                                        opt.learning_rate));
      }
      sgd.step(model.params(), grad);
    }
    history.push_back(mse_loss(model, samples.x, samples.y, n));
  }
  return history;
}

void split_scenarios(int n_scenarios, double validation_fraction, std::uint64_t seed, std::vector<int>& train,
                     std::vector<int>& validation) {
  std::vector<int> order(n_scenarios);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "train.split");
  shuffle(order.begin(), order.end(), rng);
  int n_val = static_cast<int>(std::lround(validation_fraction * n_scenarios));
  if (n_scenarios >= 2) n_val = std::clamp(n_val, 1, n_scenarios - 1);
  else n_val = 0;
  train.assign(order.begin(), order.end() - n_val);
  validation.assign(order.end() - n_val, order.end());
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
}

double dataset_rmse(const AnnModel& model, const TrainingDataset& data, std::span<const int> scenarios) {
  const auto& arch = model.arch();
  const int n_u = data.n_components;
  if (arch.inputs != n_u + 1 || arch.total_outputs() != n_u) {
    throw ModelError("network shape does not match the dataset");
  }
  if (scenarios.empty()) return 0.0;

  Eigen::VectorXd enc(data.steps);
  for (int h = 1; h <= data.steps; ++h) enc[h - 1] = model.horizon.encode(h);

  double sum = 0.0;
  std::size_t count = 0;
  RowMat yhat(data.steps, n_u);
  for (int sc : scenarios) {
    const CMapVec u(data.utilization[sc].values.data(), n_u);
    for (std::size_t s = 0; s < arch.streams.size(); ++s) {
      const auto& st = arch.streams[s];
      const auto sp = model.stream(static_cast<int>(s));
      const CMapRowMat w1(sp.w1, st.hidden, arch.inputs);
      // Utilisation part of the pre-activation is shared by every horizon.
      const Eigen::VectorXd z0 = w1.leftCols(n_u) * u + CMapVec(sp.b1, st.hidden);
      RowMat a = enc * w1.col(n_u).transpose();
      a.rowwise() += z0.transpose();
      activate(a, arch.hidden_activation);
      RowMat ys = a * CMapRowMat(sp.w2, st.outputs, st.hidden).transpose();
      ys.rowwise() += CMapVec(sp.b2, st.outputs).transpose();
      yhat.middleCols(model.output_offset(static_cast<int>(s)), st.outputs) = ys;
    }
    for (int h = 1; h <= data.steps; ++h) {
      const auto truth = data.delta_at(sc, h);
      for (int i = 0; i < n_u; ++i) {
        const double e = yhat(h - 1, i) - static_cast<double>(truth[i]);
        sum += e * e;
      }
    }
    count += static_cast<std::size_t>(data.steps) * n_u;
  }
  return std::sqrt(sum / static_cast<double>(count));
}

namespace {

void scale_outputs(AnnModel& model, double factor) {
  const auto& arch = model.arch();
  for (std::size_t s = 0; s < arch.streams.size(); ++s) {
    const auto& st = arch.streams[s];
    const std::size_t w2o = model.stream_offset(static_cast<int>(s)) +
                            static_cast<std::size_t>(st.hidden) * (arch.inputs + 1);
    const std::size_t end = w2o + static_cast<std::size_t>(st.outputs) * (st.hidden + 1);
    for (std::size_t i = w2o; i < end; ++i) model.params()[i] *= factor;
  }
}

AnnModel fold_back(const AnnModel& working, const TrainingHyper& hyper) {
  AnnModel out = working;
  scale_outputs(out, hyper.target_scale);
  return out;
}

}  // namespace

AnnModel train(const TrainingDataset& data, const TrainingHyper& hyper, TrainingReport* report) {
  if (data.n_components < 1) throw TrainingError("empty dataset");
  AnnArchitecture arch;
  // Infer the default stream split from the component count: n = 2N + L.
  // Callers with a Topology should prefer AnnArchitecture::thermal_default.
  const int n = data.n_components;
  int grid = 0;
  for (int w = 2; w * w <= n; ++w) {
    if (2 * w * w + 2 * w * w - 2 * w == n) grid = w;
  }
  if (grid == 0) throw TrainingError("cannot infer a square grid from the dataset; pass an initial model");
  const Topology topo = Topology::build_mesh(grid, grid);
  Rng rng = make_rng(hyper.seed, "train.init");
  AnnModel init = AnnModel::random(AnnArchitecture::thermal_default(topo), hyper.init_scale, rng);
  return train(data, std::move(init), hyper, report);
}

AnnModel train(const TrainingDataset& data, AnnModel init, const TrainingHyper& hyper, TrainingReport* report) {
  const auto t_start = std::chrono::steady_clock::now();
  if (data.n_scenarios() < 1 || data.steps < 1) throw TrainingError("empty dataset");
  const auto& arch = init.arch();
  const int n_u = data.n_components;
  if (arch.inputs != n_u + 1 || arch.total_outputs() != n_u) {
    throw TrainingError("network shape does not match the dataset");
  }
  init.horizon.max_steps = data.steps;

  TrainingReport local;
  TrainingReport& rep = report ? *report : local;
  rep = TrainingReport{};
  split_scenarios(data.n_scenarios(), hyper.validation_fraction, hyper.seed, rep.train_scenarios,
                  rep.validation_scenarios);
  const auto& val = rep.validation_scenarios.empty() ? rep.train_scenarios : rep.validation_scenarios;

  rep.baseline_validation_rmse = dataset_rmse(init, data, val);
  rep.best_validation_rmse = rep.baseline_validation_rmse;
  rep.best_epoch = 0;
  rep.validation_rmse.push_back(rep.baseline_validation_rmse);
  AnnModel best = init;
  if (hyper.epochs <= 0) {
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return best;
  }

  AnnModel model = init;
  scale_outputs(model, 1.0 / hyper.target_scale);
  Rng rng = make_rng(hyper.seed, "train.batches");
  MomentumSgd sgd{{}, hyper.learning_rate, hyper.momentum};

  struct Pick {
    int scenario;
    int horizon;
  };
  std::vector<Pick> picks;
  std::vector<double> bx;
  std::vector<double> by;
  std::vector<double> grad;
  const double inv_scale = 1.0 / hyper.target_scale;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    picks.clear();
    for (int sc : rep.train_scenarios) {
      for (int k = 0; k < hyper.samples_per_scenario; ++k) {
        int h;
        if (uniform01(rng) < hyper.short_horizon_share) {
          h = static_cast<int>(std::lround(init.horizon.decode(uniform01(rng))));
        } else {
          h = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(data.steps)));
        }
        picks.push_back({sc, std::clamp(h, 1, data.steps)});
      }
    }
    shuffle(picks.begin(), picks.end(), rng);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < picks.size(); start += hyper.batch) {
      const std::size_t b = std::min<std::size_t>(hyper.batch, picks.size() - start);
      bx.resize(b * arch.inputs);
      by.resize(b * n_u);
      for (std::size_t k = 0; k < b; ++k) {
        const auto& pk = picks[start + k];
        const auto& u = data.utilization[pk.scenario].values;
        double* row = bx.data() + k * arch.inputs;
        for (int i = 0; i < n_u; ++i) row[i] = u[i];
        row[n_u] = init.horizon.encode(pk.horizon);
        const auto d = data.delta_at(pk.scenario, pk.horizon);
        for (int i = 0; i < n_u; ++i) by[k * n_u + i] = static_cast<double>(d[i]) * inv_scale;
      }
      const double loss = mse_gradient(model, bx, by, static_cast<int>(b), grad);
      if (!std::isfinite(loss)) {
        throw TrainingError(fmt::format(
            "training diverged at epoch {} batch {} (loss {}, learning_rate {}, last epoch loss {})", epoch,
            batches, loss, hyper.learning_rate, rep.train_loss.empty() ? 0.0 : rep.train_loss.back()));
      }
      sgd.step(model.params(), grad);
      epoch_loss += loss;
      ++batches;
    }
    rep.train_loss.push_back(epoch_loss / std::max(batches, 1));

    if (epoch % std::max(hyper.validate_every, 1) == 0 || epoch == hyper.epochs) {
      AnnModel folded = fold_back(model, hyper);
      const double rmse = dataset_rmse(folded, data, val);
      rep.validation_rmse.push_back(rmse);
      if (hyper.verbose) {
        fmt::print(stderr, "epoch {:4d} train_loss {:.6f} val_rmse {:.4f} C\n", epoch, rep.train_loss.back(), rmse);
      }
      if (rmse < rep.best_validation_rmse) {
        rep.best_validation_rmse = rmse;
        rep.best_epoch = epoch;
        best = std::move(folded);
      }
    }
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return best;
}

std::vector<double> predict_delta(const AnnModel& model, const UtilizationVector& u, double horizon_steps) {
  if (!(horizon_steps >= 0.0) || horizon_steps > model.horizon.max_steps) {
    throw RangeError(fmt::format("horizon {} outside trained range [0, {}]", horizon_steps, model.horizon.max_steps));
  }
  if (static_cast<int>(u.size()) + 1 != model.arch().inputs) throw RangeError("utilisation vector has wrong length");
  std::vector<double> x(u.values);
  x.push_back(model.horizon.encode(horizon_steps));
  return model.forward(x);
}

ThermalState predict(const AnnModel& model, const UtilizationVector& u, double horizon_steps,
                     const ThermalState& t0) {
  const auto d = predict_delta(model, u, horizon_steps);
  if (d.size() != t0.size()) throw RangeError("thermal state size does not match the network outputs");
  ThermalState out = t0;
  for (std::size_t i = 0; i < d.size(); ++i) out.temps[i] += d[i];
  return out;
}

}  // namespace winoc
