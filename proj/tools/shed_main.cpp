#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "shed/config.hpp"
#include "shed/errors.hpp"
#include "shed/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

shed::RunConfig resolve(const std::string& path, const std::optional<std::string>& mode) {
  shed::RunConfig config = shed::load_config(path);
  if (mode) config.mode = shed::mode_from_string(*mode);
  shed::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-student curriculum runs on a stochastic gridworld"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  int n_seeds = 5;
  const std::vector<std::string> modes{"shed", "hmdp", "dr"};

  auto* run = app.add_subcommand("run", "single curriculum run");
  run->add_option("--config", config_path, "JSON config")->required();
  run->add_option("--seed", seed, "run seed")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--mode", mode, "override config mode")->check(CLI::IsMember(modes));

  auto* suite = app.add_subcommand("suite", "every suite mode over consecutive seeds");
  suite->add_option("--config", config_path, "JSON config")->required();
  suite->add_option("--seeds", n_seeds, "number of seeds")->check(CLI::PositiveNumber);
  suite->add_option("--out", out_dir, "output directory")->required();
  suite->add_option("--mode", mode, "run only this mode")->check(CLI::IsMember(modes));

  auto* val = app.add_subcommand("validate-diffusion", "surrogate check of the transition model");
  val->add_option("--config", config_path, "JSON config")->required();
  val->add_option("--out", out_dir, "output directory")->required();

  std::vector<double> probe_theta{0.5, 0.5, 0.0};
  std::vector<double> deltas{0.1, 0.01, 0.001};
  int random_probes = 0;
  std::uint64_t probe_seed = 7;
  auto* probe = app.add_subcommand("probe", "continuity of the optimal gridworld policy");
  probe->add_option("--theta", probe_theta, "base parameters")->expected(3);
  probe->add_option("--deltas", deltas, "perturbation sizes");
  probe->add_option("--random", random_probes, "extra random base points");
  probe->add_option("--seed", probe_seed, "seed for random base points");
  probe->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      shed::RunConfig config = resolve(config_path, mode);
      config.seed = *seed;
      const auto summary = shed::run_curriculum(config, out_dir);
      std::cout << summary.to_json().dump(2) << '\n';
    } else if (*suite) {
      shed::RunConfig config = resolve(config_path, std::nullopt);
      if (mode) config.suite_modes = {shed::mode_from_string(*mode)};
      const auto result = shed::run_suite(config, n_seeds, out_dir);
      for (const auto& row : result.rows)
        std::cout << shed::to_string(row.mode) << " n=" << row.n_seeds << " mean=" << row.mean_final_test
                  << " stderr=" << row.stderr_final_test << '\n';
      std::cout << "trend: " << (result.trend_holds ? "holds" : "does not hold") << " (" << result.trend_report
                << ")\n";
    } else if (*val) {
      shed::RunConfig config = resolve(config_path, std::nullopt);
      config.mode = shed::Mode::validate_diffusion;
      const auto result = shed::run_validate_diffusion(config, out_dir);
      std::cout << "small-noise max error " << result.small_noise_max_error << ", synthetic reward MAE "
                << result.synthetic_reward_mae << '\n';
    } else if (*probe) {
      const shed::EnvParams theta{{probe_theta[0], probe_theta[1], probe_theta[2]}};
      shed::validate(theta);
      for (const auto& row : shed::run_continuity_probes(theta, deltas, random_probes, probe_seed, out_dir))
        for (const auto& pt : row.result.curve)
          std::cout << "probe " << row.probe << " dim " << row.result.dimension << " delta " << pt.delta
                    << " gap " << pt.gap << '\n';
    }
  } catch (const shed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const shed::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
