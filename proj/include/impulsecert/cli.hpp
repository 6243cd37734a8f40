#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "impulsecert/system.hpp"

namespace impulsecert {

enum class Command { CertifyPeriodic, CertifyAperiodic, SmallGain, Simulate, Sweep };

/// Throws InputError for an unknown name.
Command parse_command(const std::string& name);
const char* to_string(Command c);

struct RunConfig {
  Command command = Command::CertifyPeriodic;
  std::filesystem::path system_path;
  int N = 16;
  std::uint64_t seed = 0;
  std::optional<double> horizon;  // simulate: defaults to 100 θ2
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> csv;
  std::optional<double> eps;
  int sweep_max_N = 4096;
  GammaPolicy gamma_policy = GammaPolicy::Uniform;
};

enum ExitCode : int { kExitStable = 0, kExitInputError = 1, kExitInconclusive = 2 };

/// Runs one command. The JSON report goes to config.out, or to `out` when no
/// path is given; it is written on failure too (as an error report).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace impulsecert
