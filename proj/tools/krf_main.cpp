// krf: command-line driver.
//
//   krf run      --config cfg [--out dir] [--seed k] [--force] [--svg]
//   krf resume   --out dir [--svg]
//   krf refine   --config cfg [--rungs 3]
//   krf oracle   --config cfg [--s 0,0.3,0.6]
//   krf proptest [--seed k] [--samples 10000] [--plant-violation] [--out dir]

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "krf/numfmt.hpp"
#include "krf/runner.hpp"
#include "krf/snapshot.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool svg = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "configuration file");
  sub->add_option("--out", c.out, "output directory (overrides the config)");
  sub->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  sub->add_flag("--force", c.force, "run even if the curvature hypothesis fails");
  sub->add_flag("--svg", c.svg, "write plots/*.svg");
}

krf::RunConfig load(const Common& c) {
  krf::RunConfig config = c.config_path.empty() ? krf::RunConfig{} : krf::read_config(c.config_path);
  if (!c.out.empty()) config.out = c.out;
  if (c.seed) config.seed = *c.seed;
  if (c.force) config.force = true;
  krf::validate(config);
  return config;
}

int report(const krf::RunOutcome& o) {
  if (o.verdict) std::cout << o.verdict->to_text();
  if (!o.message.empty()) std::cerr << "krf: " << o.message << '\n';
  std::cout << "exit_code=" << o.exit_code << '\n';
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Kahler-Ricci flow on a ball: run, verify, refine."};
  app.require_subcommand(1);

  Common common;
  CLI::App* run = app.add_subcommand("run", "integrate the flow and write diagnostics");
  CLI::App* resume = app.add_subcommand("resume", "continue from the latest snapshot in --out");
  CLI::App* refine = app.add_subcommand("refine", "grid-refinement ladder");
  CLI::App* oracle = app.add_subcommand("oracle", "curvature constants of the initial metric");
  CLI::App* proptest = app.add_subcommand("proptest", "randomized pointwise property suites");
  for (CLI::App* sub : {run, resume, refine, oracle, proptest}) add_common(sub, common);

  int rungs = 3;
  refine->add_option("--rungs", rungs, "number of grids, each twice as fine")->check(CLI::PositiveNumber);
  std::vector<double> s_list{0.0, 0.15, 0.3, 0.45, 0.6, 0.75};
  oracle->add_option("--s", s_list, "radial sample points")->delimiter(',');
  long samples = 10000;
  bool plant = false;
  proptest->add_option("--samples", samples, "instances per suite and dimension")->check(CLI::NonNegativeNumber);
  proptest->add_flag("--plant-violation", plant, "add a suite that must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? krf::kExitOk : krf::kExitConfig;
  }

  try {
    krf::RunOptions opts;
    opts.svg = common.svg;
    opts.log = &std::cerr;
    if (*run) return report(krf::run_flow(load(common), opts));
    if (*resume) {
      std::string dir = common.out;
      if (dir.empty() && !common.config_path.empty()) dir = krf::read_config(common.config_path).out;
      if (dir.empty()) throw krf::ConfigError("resume needs --out");
      return report(krf::resume_flow(dir, opts));
    }
    if (*refine) {
      const krf::RunConfig config = load(common);
      const krf::RefineReport r = krf::refine(config, rungs);
      std::cout << r.to_text();
      if (!r.message.empty()) std::cerr << "krf: " << r.message << '\n';
      if (r.exit_code != krf::kExitConfig) {
        std::filesystem::create_directories(config.out);
        krf::write_atomic(std::filesystem::path(config.out) / "refine.txt", r.to_text());
      }
      return r.exit_code;
    }
    if (*oracle) {
      const krf::OracleReport r = krf::oracle(load(common), s_list);
      std::cout << r.to_text();
      if (!r.analytic) return krf::kExitOk;
      for (const auto& row : r.rows)
        if (!(row.fd_delta < 1e-6)) return krf::kExitVerdict;
      return krf::kExitOk;
    }
    if (*proptest) {
      krf::ProptestOptions po;
      po.seed = common.seed.value_or(0);
      po.samples = samples;
      po.plant_violation = plant;
      const std::string dir = common.out.empty() ? "krf_proptest" : common.out;
      const krf::ProptestOutcome r = krf::property_tests(po, dir);
      std::cout << r.text;
      return r.exit_code;
    }
  } catch (const krf::Error& e) {
    std::cerr << "krf: " << e.what() << '\n';
    return krf::exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "krf: " << e.what() << '\n';
    return krf::kExitConfig;
  }
  return krf::kExitConfig;
}
