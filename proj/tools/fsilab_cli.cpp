#include "fsilab/app.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace fsilab;

int main(int argc, char** argv) {
  CLI::App app{"Coupled Stokes fluid / von Karman plate laboratory"};
  app.require_subcommand(1);
  std::string config_path, output_dir, suite, kind;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (.ini or .json)")->required();
    sub->add_option("--output-dir", output_dir, "artifact directory (overrides FSILAB_OUTPUT_DIR and the config)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "seed for randomized audits");
  };
  CLI::App* sim = app.add_subcommand("simulate", "run a trajectory and write diagnostics");
  common(sim);
  CLI::App* ver = app.add_subcommand("verify", "run an audit battery");
  common(ver);
  ver->add_option("--suite", suite, "stokes, plate, energy or ball")->required();
  CLI::App* pro = app.add_subcommand("probe", "run a long-time probe");
  common(pro);
  pro->add_option("--kind", kind, "stationary, dissipativity or separation")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  if (seed_given) cfg.seed = seed;
  const std::string out = resolve_output_dir(output_dir, cfg);

  CommandResult r;
  if (sim->parsed())
    r = cmd_simulate(cfg, out);
  else if (ver->parsed())
    r = cmd_verify(cfg, suite, out);
  else
    r = cmd_probe(cfg, kind, out);

  (r.exit_code == kExitOk ? std::cout : std::cerr) << (r.exit_code == kExitOk ? "" : "error: ") << r.message
                                                     << (r.message.empty() || r.message.back() == '\n' ? "" : "\n");
  for (const auto& a : r.artifacts) std::cout << "wrote " << a << '\n';
  return r.exit_code;
}
