#include "egvi/config.hpp"
#include "egvi/harness.hpp"
#include "egvi/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int run_command(const std::string& config_path, const std::string& out_dir, unsigned jobs) {
  const auto configs = egvi::experiments_from_document(egvi::load_config(config_path));
  const auto rows = egvi::run_experiments(configs, jobs);
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / "results.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  egvi::write_csv(out, rows);
  std::cout << "wrote " << rows.size() << " rows to " << path.string() << '\n';
  return kExitOk;
}

int verify_command(const std::string& suite) {
  const auto results = egvi::verify_theory(suite);
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cout << egvi::format_check(r) << '\n';
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << " passed, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int list_command(const std::string& what) {
  const std::vector<egvi::RegistryEntry>* reg = nullptr;
  if (what == "problems") reg = &egvi::problem_registry();
  else if (what == "algorithms") reg = &egvi::algorithm_registry();
  else reg = &egvi::policy_registry();
  for (const auto& e : *reg) std::cout << e.id << "\t" << e.description << '\n';
  return kExitOk;
}

int er_command(const std::string& config_path) {
  for (const auto& c : egvi::experiments_from_document(egvi::load_config(config_path))) {
    if (c.problem == "federated_quadratic_game") {
      std::cout << c.name << " skipped: federated problem\n";
      continue;
    }
    const egvi::ErConstants er = egvi::experiment_er_constants(c);
    std::cout << c.name << " delta=" << egvi::format_double(er.delta)
              << " sigma_star_sq=" << egvi::format_double(er.sigma_star_sq) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extragradient-type methods for variational inequalities: experiments and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "run every experiment in a config file and write CSV");
  run->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run theory verification suites");
  verify->add_option("--suite", suite, "suite name or all");

  std::string what;
  auto* list = app.add_subcommand("list", "list registered ids");
  list->add_option("kind", what, "problems, algorithms or policies")
      ->required()
      ->check(CLI::IsMember({"problems", "algorithms", "policies"}));

  std::string er_config;
  auto* er = app.add_subcommand("er-constants", "print delta and sigma*^2 for each experiment");
  er->add_option("--config", er_config, "experiment config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, out_dir, jobs);
    if (*verify) return verify_command(suite);
    if (*list) return list_command(what);
    if (*er) return er_command(er_config);
  } catch (const egvi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
