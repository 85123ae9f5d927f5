// Command-line front end:
//   lmcf flow <config> -o <dir>
//   lmcf translator <config> -o <dir>
//   lmcf verify <dir>... [-o <dir>]
//   lmcf sweep <template> --grid <spec> -o <dir> [--mode translator|flow]
// Worker count for sweeps: LMCF_WORKERS.

#include <iostream>

#include <CLI11.hpp>

#include "lmcf/io/commands.hpp"

int main(int argc, char** argv) {
  using namespace lmcf::io;
  CLI::App app{"Space-like mean curvature flow with a contact-angle condition"};
  app.require_subcommand(1);

  std::string config, out, grid_spec, mode = "translator";
  std::vector<std::string> dirs;

  auto* flow = app.add_subcommand("flow", "integrate the flow to its translating limit");
  flow->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  flow->add_option("-o,--output", out, "output directory")->required();

  auto* translator = app.add_subcommand("translator", "solve for the translating solution by eps-continuation");
  translator->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  translator->add_option("-o,--output", out, "output directory")->required();

  auto* verify = app.add_subcommand("verify", "run all applicable checks over run directories");
  verify->add_option("dirs", dirs, "run directories")->required();
  verify->add_option("-o,--output", out, "report directory (default: current directory)");

  auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  sweep->add_option("template", config, "scenario JSON template")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_spec, "axes: resolution=32,64;/phi/value=0.1,0.2")->required();
  sweep->add_option("-o,--output", out, "output directory")->required();
  sweep->add_option("--mode", mode, "translator or flow")->check(CLI::IsMember({"translator", "flow"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*flow) return cmd_flow(config, out, std::cout);
    if (*translator) return cmd_translator(config, out, std::cout);
    if (*verify) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      return cmd_verify(paths, out.empty() ? fs::path(".") : fs::path(out), std::cout);
    }
    if (*sweep) {
      return cmd_sweep(config, grid_spec, mode == "flow" ? SweepMode::flow : SweepMode::translator, out,
                       worker_count(), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
