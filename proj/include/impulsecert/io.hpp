#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "impulsecert/aperiodic.hpp"
#include "impulsecert/periodic.hpp"
#include "impulsecert/simulator.hpp"
#include "impulsecert/smallgain.hpp"
#include "impulsecert/system.hpp"

namespace impulsecert {

/// Parsed system file: the plant plus its optional P0 ("auto" or blocks).
struct SystemDocument {
  CoupledSystem system;
  std::optional<Block2x2> P0;  // empty for "auto" or when absent
};

/// Schema violations throw SchemaError naming the JSON path; inconsistent
/// shapes throw DimensionError; failed invariants throw ValidationError.
SystemDocument parse_system_document(const std::string& text);
CoupledSystem parse_system(const std::string& text);
SystemDocument load_system_file(const std::filesystem::path& path);

/// Shortest round-trip number formatting: parse(serialize(s)) == s.
std::string serialize_system(const CoupledSystem& sys,
                             const std::optional<Block2x2>& P0 = std::nullopt);

/// Canonical report JSON: sorted keys, floats as %.12e, NaN/inf as null.
std::string report_json(const CertificateReport& r, const std::string& kind =
                                                        "certify-periodic");
std::string report_json(const AperiodicReport& r);

struct SmallGainSummary {
  std::optional<SmallGainData> data;   // empty when a subsystem is not Hurwitz
  std::optional<bool> small_gain;
  std::optional<Prop62Report> prop62;
  std::optional<ThetaStarResult> theta_star;
  bool lmi_feasible = false;
  CertificateReport prop61;
  std::vector<std::string> notes;
};
std::string report_json(const SmallGainSummary& s);

struct SimulationSummary {
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::size_t epochs = 0;
  std::optional<DecayFit> decay;
  std::optional<double> monodromy_radius;
  std::vector<std::string> notes;
};
std::string report_json(const SimulationSummary& s);

struct SweepEntry {
  int N;
  Verdict verdict;
  double Q;
};

struct SweepSummary {
  std::vector<SweepEntry> entries;
  bool stabilized = false;
  std::string mode;  // "periodic" or "aperiodic"
};
std::string report_json(const SweepSummary& s);

std::string error_report_json(const std::string& command, const std::string& message);

/// Writes text to path; throws Error on I/O failure.
void emit_report(const std::string& text, const std::filesystem::path& path);

}  // namespace impulsecert
