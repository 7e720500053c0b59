// Deterministic experiment runner: every verification of the laboratory as a
// subcommand with JSON configs and CSV/JSON reports.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "mtube/runner.hpp"

namespace {

constexpr const char* kSubcommands[] = {
    "verify-weights", "expansion", "lelong",  "reltype",   "localize",
    "siu",            "compare",   "minimal", "full-suite"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"m-subharmonic weight laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  int threads = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;

  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker thread count");
    sub->add_option("--seed", seed, "random seed")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--format", format, "report format: csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    mtube::RunConfig config;
    if (!config_path.empty()) config = mtube::RunConfig::from_file(config_path);
    config.experiment = app.get_subcommands().front()->get_name();
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!format.empty()) config.format = format;
    if (threads > 0)
      config.threads = threads;
    else if (config.threads <= 1 && !config_path.empty())
      ;  // keep the config's explicit value
    else if (threads == 0 && config_path.empty())
      config.threads =
          std::max(1u, std::thread::hardware_concurrency());
    if (have_seed) config.seed = seed;
    config.validate();

    const mtube::RunReport report = mtube::run(config);
    const std::string dir = mtube::write_outputs(config, report);
    std::cout << report.summary() << "report written to " << dir << "\n";
    return report.all_pass ? 0 : 1;
  } catch (const mtube::ConstraintError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
