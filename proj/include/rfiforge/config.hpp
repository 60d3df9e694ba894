#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfiforge/scenario.hpp"

namespace rfiforge {

/// JSON-facing scenario description. Fields left unset are drawn from
/// dedicated seed substreams when the spec is realized, so one spec plus a
/// seed pins an exact ScenarioConfig.
struct GeometrySpec {
  std::optional<Eigen::Matrix<double, Eigen::Dynamic, 2>> positions;  // wavelengths
  Eigen::Index num_antennas = 0;   // used when positions absent
  double max_baseline = 0;         // used when positions absent
};

struct RfiSpec {
  std::optional<double> sigma_r;   // linear amplitude; exactly one of sigma_r / inr_db
  std::optional<double> inr_db;
  std::optional<double> omega;     // rad/sample; absent -> uniform [0, 2pi) per realization
  std::optional<double> phi;       // rad; absent -> uniform [0, 2pi)
  std::optional<std::vector<double>> alphas;  // rad/sample; absent -> i.i.d. N(0, alpha_sigma^2)
  double alpha_sigma = 0.0;
  std::optional<std::vector<double>> phis;    // rad; absent -> i.i.d. uniform [0, 2pi)
};

struct SourceSpec {
  std::optional<double> sigma_c;   // linear amplitude; exactly one of sigma_c / snr_db
  std::optional<double> snr_db;
  double l = 0;
  double m = 0;
};

struct ScenarioSpec {
  GeometrySpec geometry;
  std::optional<RfiSpec> rfi;
  std::vector<SourceSpec> sources;
  double sigma_n = 1.0;
  Eigen::Index num_samples = 0;
  double gain_delta = 0.0;
  std::uint64_t seed = 1;
};

/// Parses and validates a scenario spec; error messages name the offending
/// field by its JSON path.
ScenarioSpec parse_scenario_spec(const std::string& json_text);
ScenarioSpec load_scenario_spec(const std::filesystem::path& file);

/// Fills every unset field of the spec from substreams of `seed` and
/// returns the fully resolved config (config.seed = seed).
ScenarioConfig<double> realize(const ScenarioSpec& spec, std::uint64_t seed);

/// Realizes with the spec's own seed.
inline ScenarioConfig<double> realize(const ScenarioSpec& spec) { return realize(spec, spec.seed); }

}  // namespace rfiforge
