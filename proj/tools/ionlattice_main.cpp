#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ionlattice/config.hpp"
#include "ionlattice/pipelines.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::optional<double> resolution_um;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "Run configuration file (key = value)")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "Output directory (default: output_dir/<command>)");
  sub->add_option("--resolution-um", f.resolution_um, "(A, R) scan resolution in micrometres")->check(CLI::PositiveNumber);
  sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  sub->add_option("--seed", f.seed, "Seed for fit multi-starts");
  sub->add_option("--set", f.overrides, "Override one config entry, key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ionlattice;
  CLI::App app{"Surface-electrode ion-trap lattice design and optimization"};
  app.require_subcommand(1);
  CommonFlags flags;
  for (const auto& name : command_names()) add_common(app.add_subcommand(name, "Run the " + name + " pipeline"), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = flags.config_path.empty() ? RunConfig{} : RunConfig::load(flags.config_path);
    for (const auto& kv : flags.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (flags.resolution_um) {
      config.resolution_um = *flags.resolution_um;
      if (command == "scaling") config.scaling_resolution_um = *flags.resolution_um;
    }
    if (flags.threads) config.threads = *flags.threads;
    if (flags.seed) config.seed = *flags.seed;
    config.validate();
    const std::filesystem::path out =
        flags.out.empty() ? std::filesystem::path(config.output_dir) / command : std::filesystem::path(flags.out);
    const int code = run_command(command, config, out);
    std::cout << command << ": wrote " << out.string() << (code == kExitSuccess ? "" : " (tolerance failure)")
              << "\n";
    return code;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}
