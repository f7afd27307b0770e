// Command-line harness: dataset generation, training, simulation,
// comparison, memory accounting and topology dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "winoc/ann.hpp"
#include "winoc/config.hpp"
#include "winoc/errors.hpp"
#include "winoc/experiment.hpp"
#include "winoc/model_io.hpp"
#include "winoc/quantized.hpp"
#include "winoc/report_io.hpp"
#include "winoc/rng.hpp"
#include "winoc/training_data.hpp"

namespace {

using namespace winoc;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  int verbosity = 0;
};

ExperimentConfig load(const Common& c, const std::string& subcommand, std::filesystem::path& out_dir) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back(fmt::format("experiment.seed={}", *c.seed));
  auto cfg = parse_config(c.config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(c.config_path),
                          overrides);
  if (!c.out.empty()) {
    out_dir = c.out;
  } else if (!cfg.output_dir.empty()) {
    out_dir = cfg.output_dir;
  } else {
    const char* root = std::getenv("WINOC_OUT_ROOT");
    out_dir = std::filesystem::path(root && *root ? root : "out") / subcommand;
  }
  cfg.output_dir = out_dir;
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "INI config file")->check(CLI::ExistingFile);
  app->add_option("-s,--set", c.overrides, "override a config key (section.key=value), repeatable");
  app->add_option("--seed", c.seed, "root seed (same as --set experiment.seed=N)");
  app->add_option("-o,--out", c.out, "output directory (default $WINOC_OUT_ROOT/<command> or out/<command>)");
  app->add_flag("-v,--verbose", c.verbosity, "more progress output (repeatable)");
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

int cmd_gen_data(const Common& c) {
  std::filesystem::path out;
  auto cfg = load(c, "gen-data", out);
  write_manifest(cfg, out, "gen-data");
  const Topology topo = build_topology(cfg.topology);
  const auto model = RcThermalModel::for_topology(topo, cfg.thermal);
  const auto classes = component_classes(topo);
  auto data = generate_training_data(model, classes, cfg.power, cfg.training.scenarios, cfg.training.steps,
                                     derive_seed(cfg.seed, "dataset"));
  const auto path = out / "dataset.bin";
  save_dataset(data, path);
  fmt::print("wrote {} ({} scenarios x {} steps x {} components)\n", path.string(), data.n_scenarios(), data.steps,
             data.n_components);
  return 0;
}

int cmd_train(const Common& c, const std::string& dataset_flag) {
  std::filesystem::path out;
  auto cfg = load(c, "train", out);
  std::filesystem::path dataset = dataset_flag.empty() ? cfg.training.dataset : std::filesystem::path(dataset_flag);
  if (dataset.empty()) throw ConfigError("training.dataset must name a dataset file (or pass --dataset)");
  write_manifest(cfg, out, "train");
  const auto data = load_dataset(dataset);
  TrainingHyper hyper = cfg.training.hyper;
  hyper.seed = derive_seed(cfg.seed, "training");
  hyper.verbose = c.verbosity > 0;
  TrainingReport rep;
  const AnnModel model = train(data, hyper, &rep);
  const QuantizedModel qm(model, cfg.training.quant);
  const auto path = out / "model.bin";
  save_model(path, model, &qm);
  {
    std::ofstream os(out / "training.csv");
    os << "validation_pass,val_rmse_c\n";
    for (std::size_t i = 0; i < rep.validation_rmse.size(); ++i) os << fmt::format("{},{:.5f}\n", i, rep.validation_rmse[i]);
  }
  fmt::print("wrote {}: validation RMSE {:.3f} C at epoch {} (untrained {:.3f} C), {:.1f} s\n", path.string(),
             rep.best_validation_rmse, rep.best_epoch, rep.baseline_validation_rmse, rep.seconds);
  return 0;
}

void print_summary(const RunReport& r) {
  for (const auto& [k, v] : run_summary(r)) fmt::print("  {:<32}{}\n", k, v);
  std::int64_t max_ctl = 0;
  for (const auto& u : r.control) max_ctl = std::max(max_ctl, u.flits);
  const double seconds = static_cast<double>(r.interval_cycles) / r.clock_hz;
  fmt::print("  {:<32}{:.4f} Gbps (cited 0.054 Gbps)\n", "max_control_bandwidth",
             static_cast<double>(max_ctl) * 32.0 / seconds / 1e9);
}

int cmd_simulate(const Common& c) {
  std::filesystem::path out;
  auto cfg = load(c, "simulate", out);
  write_manifest(cfg, out, "simulate");
  auto report = run_experiment(cfg);
  report.label = to_string(report.variant);
  write_run_report(report, out);
  fmt::print("wrote {}\n", out.string());
  print_summary(report);
  return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& specs, int jobs) {
  std::filesystem::path out;
  auto base = load(c, "compare", out);
  write_manifest(base, out, "compare");
  std::vector<std::pair<std::string, ExperimentConfig>> variants;
  const std::vector<std::string> defaults = {"off:dtm.variant=off", "combined:dtm.variant=combined",
                                             "reroute-only:dtm.variant=reroute-only"};
  for (const auto& spec : specs.empty() ? defaults : specs) {
    const auto colon = spec.find(':');
    const std::string label = spec.substr(0, colon);
    if (label.empty()) throw ConfigError(fmt::format("variant '{}' needs a label (label:key=value;...)", spec));
    ExperimentConfig cfg = base;
    if (colon != std::string::npos) {
      std::string rest = spec.substr(colon + 1);
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const auto semi = rest.find(';', pos);
        const std::string item = rest.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
        if (!item.empty()) apply_override(cfg, item);
        if (semi == std::string::npos) break;
        pos = semi + 1;
      }
    }
    cfg.validate();
    variants.emplace_back(label, std::move(cfg));
  }
  const auto cmp = compare(variants, jobs);
  write_comparison(cmp, out);
  fmt::print("wrote {}\n", out.string());
  for (const auto& r : cmp.reports) {
    fmt::print("{}\n", r.label);
    print_summary(r);
  }
  return 0;
}

int cmd_memcalc(const Common& c) {
  std::filesystem::path out;
  auto cfg = load(c, "memcalc", out);
  const Topology topo = build_topology(cfg.topology);
  fmt::print("{}", memcalc_report(AnnArchitecture::thermal_default(topo), cfg.training.quant));
  return 0;
}

int cmd_dump_topology(const Common& c, bool routes) {
  std::filesystem::path out;
  auto cfg = load(c, "dump-topology", out);
  const Topology topo = build_topology(cfg.topology);
  fmt::print("{}", topo.dump());
  if (routes) {
    DistanceVectorRouting dv(topo, cfg.routing);
    fmt::print("{}", dv.dump());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"winoc: wireless NoC thermal management simulator"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen-data", "generate the predictor training dataset");
  add_common(gen, common);
  auto* tr = app.add_subcommand("train", "train the thermal predictor");
  add_common(tr, common);
  std::string dataset;
  tr->add_option("--dataset", dataset, "dataset file (default training.dataset)");
  auto* sim = app.add_subcommand("simulate", "run one co-simulation");
  add_common(sim, common);
  auto* cmp = app.add_subcommand("compare", "run DTM variants side by side");
  add_common(cmp, common);
  std::vector<std::string> variants;
  int jobs = 1;
  cmp->add_option("--variant", variants, "label:key=value;key=value (repeatable; default off, combined, reroute-only)");
  cmp->add_option("-j,--jobs", jobs, "variants run in parallel")->check(CLI::PositiveNumber);
  auto* mem = app.add_subcommand("memcalc", "predictor and LUT-estimator memory footprints");
  add_common(mem, common);
  auto* dump = app.add_subcommand("dump-topology", "print components, positions and link lengths");
  add_common(dump, common);
  bool routes = false;
  dump->add_flag("--routes", routes, "also print the base next-hop table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_gen_data(common);
    if (*tr) return cmd_train(common, dataset);
    if (*sim) return cmd_simulate(common);
    if (*cmp) return cmd_compare(common, variants, jobs);
    if (*mem) return cmd_memcalc(common);
    if (*dump) return cmd_dump_topology(common, routes);
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: run: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
