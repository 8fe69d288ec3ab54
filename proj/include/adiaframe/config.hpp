#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adiaframe/polynomial_family.hpp"

namespace adiaframe {

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("parse", what), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};

enum class ScenarioKind { SternGerlach, CustomFamily, ThermoCurve, Kubo, EntropyAudit };
enum class RunMode { Branching, MeanForce, Sampled, Driven };

std::string to_string(ScenarioKind k);
std::string to_string(RunMode m);

/// One run of the tool, as read from a JSON document.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::SternGerlach;
  RunMode mode = RunMode::Branching;
  double dt = 1e-3;
  double duration = 1.0;
  std::size_t sample_every = 10;
  std::optional<std::uint64_t> seed;
  double hbar = 1.0;
  double beta = 1.0;
  double sigma_spacings = 5.0;  // smoothing width in mean level spacings
  std::optional<double> eta;    // Kubo regularization; default from the spectrum

  // Thresholds for the invariants asserted in the run report.
  struct Tolerances {
    double ledger_relative = 1e-6;
    double entropy_drift = 1e-7;
    double branch_energy = 1e-7;
    double thermo_identity = 0.02;
    double maxwell = 0.05;
    double kubo_symmetry = 1e-8;
    double entropy_monotonicity = 1e-12;
    bool operator==(const Tolerances&) const = default;
  } tolerances;

  struct SternGerlach {
    double gamma = 1.0;
    double mass = 1.0;
    double B0 = 10.0;
    double b = 1.0;
    std::array<double, 3> r0{0.0, 0.0, 0.0};
    std::array<double, 3> v0{0.0, 1.0, 0.0};
    Complex c_plus{1.0, 0.0};
    Complex c_minus{0.0, 0.0};
    std::size_t atoms = 10000;
    bool operator==(const SternGerlach&) const = default;
  } stern_gerlach;

  // Matrix-polynomial family plus apparatus for custom_family and kubo runs.
  struct Family {
    int coordinates = 1;
    std::vector<MonomialTerm> terms;
    std::vector<double> x0;
    std::vector<double> v0;          // initial velocity, or the driven velocity
    std::vector<double> masses;      // flat metric
    std::vector<double> spring;      // V(x) = 1/2 sum spring_k x_k^2
    std::vector<Complex> amplitudes; // initial state in the adiabatic basis at x0
    std::vector<double> friction;    // constant diagonal Gamma (empty: none)
    bool operator==(const Family&) const = default;
  } family;

  struct Thermo {
    std::string spectrum = "goe_family";  // goe_family | harmonic
    int dim = 400;
    double level_spacing = 1.0;  // harmonic spectrum spacing
    double x = 0.0;
    int grid_points = 21;
    double window_low = 0.4;  // energy window as fractions of the spectral range
    double window_high = 0.6;
    bool operator==(const Thermo&) const = default;
  } thermo;

  struct Audit {
    int dim = 4;
    int samples = 1000;
    bool operator==(const Audit&) const = default;
  } audit;

  struct Output {
    std::string directory = ".";
    std::string prefix = "run";
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const ScenarioConfig&) const = default;
};

struct ParsedConfig {
  ScenarioConfig config;
  std::vector<std::string> warnings;  // unknown keys in lenient mode
};

/// Parses and validates a JSON config, filling defaults. Unknown keys are an
/// error in strict mode and a warning otherwise.
ParsedConfig parse_config(const std::string& text, bool strict = false);

/// Canonical JSON text (stable key order) that parses back to an equal config.
std::string serialize_config(const ScenarioConfig& cfg);

/// Throws ValidationError naming the offending field.
void validate_config(const ScenarioConfig& cfg);

/// Git blob hash (SHA-1 of "blob <len>\0<text>") of the canonical config text.
std::string config_content_hash(const ScenarioConfig& cfg);

}  // namespace adiaframe
