// Experiment harness: grid over (k, c), CSV trial records on stdout or a file.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "spr/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse compressive phase retrieval: trial harness"};

  spr::ExperimentPlan plan;
  plan.jobs = std::max(1u, std::thread::hardware_concurrency());
  plan.trial.check_oracle = false;
  std::string stages = "auto";
  std::string out_path = "stdout";

  app.add_option("--n", plan.n, "signal length")->required()->check(CLI::PositiveNumber);
  app.add_option("--k", plan.ks, "sparsity (comma list)")->required()->delimiter(',');
  app.add_option("--c", plan.cs, "density constant (comma list)")->required()->delimiter(',');
  app.add_option("--stages", stages, "geometric-decay stages, or 'auto'")->capture_default_str();
  app.add_option("--trials", plan.trials, "trials per grid cell")->capture_default_str();
  app.add_option("--seed", plan.seed, "master seed")->capture_default_str();
  app.add_option("--out", out_path, "output path, or 'stdout'")->capture_default_str();
  app.add_option("--m-min", plan.trial.m_min, "minimum non-zero modulus")->capture_default_str();
  app.add_option("--m-max", plan.trial.m_max, "maximum non-zero modulus")->capture_default_str();
  app.add_flag("--check-oracle", plan.trial.check_oracle, "re-encode each estimate and report the residual");
  app.add_option("--jobs", plan.jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (stages != "auto") {
    try {
      const long v = std::stol(stages);
      if (v < 0) throw std::invalid_argument("negative");
      plan.stages = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      std::cerr << "error: --stages expects a non-negative integer or 'auto'\n";
      return 2;
    }
  }

  try {
    if (out_path == "stdout") {
      spr::run_experiment(plan, std::cout);
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open " << out_path << '\n';
        return 1;
      }
      spr::run_experiment(plan, file);
    }
  } catch (const spr::ConfigError& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
