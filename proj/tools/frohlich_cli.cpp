// frohlich: build, sweep, verify and dispersion runs from a JSON config.

#include "frohlich/app.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Args {
  std::string config;
  std::string out;
  std::string format;
  int threads = 1;
  std::vector<std::string> tol;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "path to the JSON run configuration")->required();
  cmd->add_option("--out", args.out, "output path (default: the config's outputs section, else stdout)");
  cmd->add_option("--format", args.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", args.threads, "worker threads for sweeps and dispersion scans")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", args.tol, "tolerance override KEY=VALUE (repeatable)")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated Fock-space engine for the Frohlich polaron at fixed total momentum"};
  app.require_subcommand(1);
  Args args;
  CLI::App* build = app.add_subcommand("build", "summarize the mode grid and Fock basis");
  CLI::App* sweep = app.add_subcommand("sweep", "ground energies over the configured cutoffs");
  CLI::App* verify = app.add_subcommand("verify", "run every property check and write a report");
  CLI::App* disp = app.add_subcommand("dispersion", "ground energies over a list of total momenta");
  for (CLI::App* cmd : {build, sweep, verify, disp}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  using namespace frohlich::app;
  try {
    const RunConfig config = load_config(args.config);
    CommandOptions options;
    if (!args.out.empty()) options.out = args.out;
    if (args.format == "json") options.format = Format::json;
    if (args.format == "csv") options.format = Format::csv;
    options.threads = args.threads;
    options.tol_overrides = args.tol;

    if (build->parsed()) return cmd_build(config, options, std::cerr);
    if (sweep->parsed()) return cmd_sweep(config, options, std::cerr);
    if (verify->parsed()) return cmd_verify(config, options, std::cerr);
    return cmd_dispersion(config, options, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
