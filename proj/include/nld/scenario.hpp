/// @file scenario.hpp
/// Scenario configuration (flat key = value text with sections), closed-form
/// catalogs for coefficients, excitations and sensors, and the batch drivers
/// behind the command-line subcommands.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nld/fractional.hpp"
#include "nld/grid.hpp"
#include "nld/inversion.hpp"
#include "nld/kernel.hpp"
#include "nld/limit_check.hpp"
#include "nld/measurement.hpp"
#include "nld/solvers.hpp"

namespace nld {

/// Closed-form coefficient selected from a registered catalog:
///   zero                      q = 0
///   constant [c]              q = c
///   affine [a, b]             q = a + b (x + y)
///   one_plus_sin_sq []        q = 1 + sin^2(pi (x - lo) / length)  (per axis
///                             product in d = 2)
///   gaussian [base, amp, s]   q = base + amp exp(-|x - center|^2 / s^2)
///                             centered in the domain
///   csv (path)                one value per interior node, one per line
struct CoefficientSpec {
  std::string tag = "zero";
  std::vector<double> params;
  std::string path;  // csv tag only

  bool operator==(const CoefficientSpec&) const = default;
};

CoefficientField build_coefficient(const CoefficientSpec& spec,
                                   const NodeSet& nodes);

/// Excitation catalog (all vanish at t = 0):
///   linear       t / T
///   quadratic    t^2 / T^2
///   sine         sin(pi t / T)
///   bump         4 t (T - t) / T^2
///   early_bump   sin^2(pi t / 0.4 T) on (0, 0.4 T), zero afterwards
///   early_pulse  sin^2(pi t / 0.25 T) on (0, 0.25 T), a shorter pulse that
///                widens the quiet gap before a late-window sensor
std::vector<double> build_excitation(const std::string& tag,
                                     const TimeGrid& grid);

/// Sensor catalog:
///   default       spatial hat on the accessible region x t (T - t)
///   uniform       spatially uniform on the accessible region x t (T - t)
///   late_hat      spatial hat x sin^2 window on (0.6 T, T); its time support
///                 is disjoint from the early excitations, which keeps the
///                 exterior moment extension identically zero
///   late_plateau  spatially constant on the accessible region x the same
///                 late window; usable when the collar is too thin for a hat
///   far_plateau   like late_plateau with the window pushed to (0.75 T, T)
SensorSpec build_sensor(const std::string& tag, const NodeSet& nodes,
                        const TimeGrid& grid);

struct Scenario {
  DomainSpec domain;
  KernelSpec kernel;  // horizon mirrors domain.horizon, not configured
  FractionalSpec fractional;
  Model model = Model::Classical;
  TimeGrid time;
  CoefficientSpec coefficient;
  BasisSpec basis;
  std::string sensor_tag = "default";
  std::string excitation_tag = "bump";
  double noise = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  std::string data_path;  // invert an existing dataset instead of synthesizing

  /// Desk-scale reference configuration used across the verification suite.
  static Scenario standard();

  void validate() const;
  std::string serialize() const;
  std::uint64_t config_hash() const;

  bool operator==(const Scenario&) const = default;
};

/// Parses configuration text; errors carry `source_name:line:` prefixes.
/// Keys omitted from the text keep their Scenario::standard() values.
Scenario parse_scenario(const std::string& text,
                        const std::string& source_name = "config");
Scenario load_scenario(const std::string& path);

/// Artifact drivers behind the subcommands.  Each writes its outputs under
/// scenario.out_dir and returns the file list plus a JSON summary (also
/// written alongside the files).
struct RunArtifacts {
  std::vector<std::string> files;
  std::string summary_json;
};

RunArtifacts run_forward(const Scenario& s);
RunArtifacts run_adjoint(const Scenario& s);
RunArtifacts run_measure(const Scenario& s);
RunArtifacts run_invert(const Scenario& s);
RunArtifacts run_verify(const Scenario& s);
RunArtifacts run_limit_check(const Scenario& s);

}  // namespace nld
