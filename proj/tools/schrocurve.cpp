// Command-line front end: simulate, verify <suite>, noise-sample, info.
// Exit status: 0 all checks pass, 1 a check failed, 2 bad input or no admissible horizon.

#include "schrocurve/commands.hpp"
#include "schrocurve/solver.hpp"
#include "schrocurve/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace schrocurve;

namespace {

void print_checks(const nlohmann::json& manifest) {
  for (const auto& c : manifest.at("checks"))
    std::cout << c.at("verdict").get<std::string>() << "  [" << c.at("suite").get<std::string>() << "] "
              << c.at("name").get<std::string>() << "  value=" << c.at("value").get<double>()
              << " threshold=" << c.at("threshold").get<double>() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Schroedinger equations on asymptotically flat backgrounds"};
  app.set_version_flag("--version", std::string(code_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run config (.toml or .json); defaults apply when omitted");
    sub->add_option("--seed", seed, "RNG seed (u64)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "worker threads (fallback: SCHROCURVE_WORKERS)");
  };

  auto* simulate = app.add_subcommand("simulate", "solve the stochastic equation over a Monte Carlo batch");
  add_common(simulate);
  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification battery");
  verify->add_option("suite", suite, "symbols | norms | propagator | noise | isometry | hs | contraction | all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  add_common(verify);
  auto* noise = app.add_subcommand("noise-sample", "dump noise samples and their empirical covariance");
  add_common(noise);
  auto* info = app.add_subcommand("info", "print the resolved config and the predicted horizon");
  add_common(info);

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    CommandOptions opts;
    opts.seed = seed;
    if (out) opts.out = *out;
    opts.workers = workers;

    if (info->parsed()) {
      cmd_info(cfg, opts, std::cout);
      return 0;
    }
    CommandResult result;
    if (simulate->parsed()) result = cmd_simulate(cfg, opts);
    else if (verify->parsed()) result = cmd_verify(suite, cfg, opts);
    else result = cmd_noise_sample(cfg, opts);
    print_checks(result.manifest);
    std::cout << (result.pass ? "PASS" : "FAIL") << "  manifest: " << (result.directory / "manifest.json").string()
              << '\n';
    return result.pass ? 0 : 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const no_admissible_horizon& e) {
    std::cerr << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 2;
}
