// Command-line driver: scenario-configured batch runs of the forward,
// adjoint, measurement, inversion, verification and limit-check pipelines.
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nld/scenario.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "scenario file (key = value text)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "output directory override");
  cmd->add_option("--threads", opt.threads, "internal parallelism bound")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "seed override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Nonlocal diffusion toolkit: forward/adjoint solves, flux "
      "measurements and coefficient reconstruction"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* forward = app.add_subcommand("forward", "run the forward solve");
  CLI::App* adjoint = app.add_subcommand("adjoint", "run the adjoint solve");
  CLI::App* measure =
      app.add_subcommand("measure", "synthesize the flux dataset");
  CLI::App* invert =
      app.add_subcommand("invert", "reconstruct the reaction coefficient");
  CLI::App* verify =
      app.add_subcommand("verify", "run the discrete identity checks");
  CLI::App* limit =
      app.add_subcommand("limit-check", "fractional-Laplacian limit check");
  for (CLI::App* cmd : {forward, adjoint, measure, invert, verify, limit})
    add_common(cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints message or help text
    return code == 0 ? 0 : 1;
  }
  CLI::App* cmd = app.get_subcommands().front();

  try {
    nld::Scenario s = opt.config.empty() ? nld::Scenario::standard()
                                         : nld::load_scenario(opt.config);
    if (cmd->count("--out")) s.out_dir = opt.out;
    if (cmd->count("--threads")) s.threads = opt.threads;
    if (cmd->count("--seed")) s.seed = opt.seed;

    nld::RunArtifacts art;
    if (cmd == forward) art = nld::run_forward(s);
    else if (cmd == adjoint) art = nld::run_adjoint(s);
    else if (cmd == measure) art = nld::run_measure(s);
    else if (cmd == invert) art = nld::run_invert(s);
    else if (cmd == verify) art = nld::run_verify(s);
    else art = nld::run_limit_check(s);

    std::cout << art.summary_json;
    for (const auto& f : art.files) std::cerr << "wrote " << f << "\n";
    return 0;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
