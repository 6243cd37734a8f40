#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "impulsecert/cli.hpp"

int main(int argc, char** argv) {
  using namespace impulsecert;
  CLI::App app{"Block-Lyapunov stability certificates for impulsive coupled systems"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string system, out, csv, policy = "uniform";
  double horizon = 0.0, eps = 0.0;

  const std::map<std::string, GammaPolicy> policies{
      {"per-interval", GammaPolicy::PerInterval}, {"uniform", GammaPolicy::Uniform}};

  for (const char* name : {"certify-periodic", "certify-aperiodic", "smallgain",
                           "simulate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--system", system, "system JSON file")->required();
    sub->add_option("--N", cfg.N, "intervals per period")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "RNG seed (simulate)");
    sub->add_option("--horizon", horizon, "simulation horizon (default 100*theta2)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "report path (default: stdout)");
    sub->add_option("--csv", csv, "trajectory CSV path (simulate)");
    sub->add_option("--eps", eps, "fixed envelope epsilon")->check(CLI::PositiveNumber);
    sub->add_option("--sweep-max-N", cfg.sweep_max_N, "largest N tried by sweep")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gamma-policy", policy, "uniform (default) or per-interval")
        ->check(CLI::IsMember({"per-interval", "uniform"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInputError;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  cfg.command = parse_command(chosen->get_name());
  cfg.system_path = system;
  cfg.gamma_policy = policies.at(policy);
  if (chosen->count("--horizon")) cfg.horizon = horizon;
  if (chosen->count("--eps")) cfg.eps = eps;
  if (!out.empty()) cfg.out = out;
  if (!csv.empty()) cfg.csv = csv;
  return run(cfg, std::cout, std::cerr);
}
