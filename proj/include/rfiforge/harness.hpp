#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rfiforge/config.hpp"
#include "rfiforge/imaging.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

// ---------------------------------------------------------------------------
// Signature-alignment study: mean/variance of gamma between the true and the
// estimated interferer signature, over a grid of INR and sample counts, for
// lag variants and gain-calibration variants.
// ---------------------------------------------------------------------------

struct GammaStudySpec {
  std::vector<double> inr_db_grid = {-10, -5, 0, 5, 10, 15, 20};
  std::vector<Eigen::Index> n_grid = {64, 128, 256, 512, 1024, 2048, 4096, 8192};
  std::vector<int> taus = {0, 1};
  std::vector<double> deltas = {0.0, 0.1};
  int trials = 512;
  Eigen::Index num_antennas = 8;
  std::uint64_t base_seed = 1;
  int threads = 1;
};

struct GammaStudyCell {
  double delta = 0;
  int tau = 0;
  double inr_db = 0;
  Eigen::Index num_samples = 0;
  double mean_gamma = 0;
  double var_gamma = 0;
  int trials = 0;
};

struct StudyTable {
  GammaStudySpec spec;
  std::vector<GammaStudyCell> cells;  // delta-major, then tau, inr, N
  std::map<std::string, std::string> metadata;

  const GammaStudyCell& cell(std::size_t delta_i, std::size_t tau_i, std::size_t inr_i,
                             std::size_t n_i) const;
};

StudyTable run_gamma_study(const GammaStudySpec& spec);
std::string study_table_to_csv(const StudyTable& table);

// ---------------------------------------------------------------------------
// Smearing study: spectrum of the interferer SCM (closed form and empirical)
// as the averaging length grows, with drift rates redrawn per trial.
// ---------------------------------------------------------------------------

struct SmearingStudySpec {
  double alpha_sigma = 0.1;
  std::vector<Eigen::Index> n_grid = {1, 16, 256, 4096, 65536, 1048576};
  Eigen::Index num_antennas = 8;
  double sigma_r = 1.0;
  double omega = 0.0;
  int trials = 8;
  Eigen::Index empirical_max_n = 4096;  // empirical SCM skipped above this
  std::uint64_t base_seed = 1;
  int threads = 1;
};

struct SmearingRow {
  Eigen::Index num_samples = 0;
  int trial = 0;
  RealVector<double> closed_spectrum;     // descending
  RealVector<double> empirical_spectrum;  // size 0 when skipped
  double dominant_fraction_closed = 0;    // lambda_1 / trace
  double dominant_fraction_empirical = 0; // NaN when skipped
};

struct SmearingTable {
  SmearingStudySpec spec;
  std::vector<SmearingRow> rows;  // N-major, then trial
};

SmearingTable run_smearing_study(const SmearingStudySpec& spec);
std::string smearing_table_to_csv(const SmearingTable& table);

// ---------------------------------------------------------------------------
// Mitigation comparison: projection vs subtraction against an
// interference-free reference built from the same noise and source draws.
// ---------------------------------------------------------------------------

struct ComparisonSpec {
  ScenarioSpec scenario;     // needs an interferer entry and >= 1 source
  int seeds = 50;
  Eigen::Index tau = 1;
  double kappa = 3.0;
  // The projection arm removes max(min_projection_rank, threshold-rule rank)
  // dimensions. The default keeps the baseline single-interferer method
  // active (dominant eigenvector) even when smearing pushes the interferer
  // below the detection threshold; 0 restores the pure threshold rule.
  Eigen::Index min_projection_rank = 1;
  Eigen::Index grid_size = 129;
  double grid_extent = 0.5;
  std::uint64_t base_seed = 1;
  int threads = 1;
};

struct ComparisonRecord {
  int seed_index = 0;
  std::uint64_t seed = 0;
  Eigen::Index rank_removed = 0;
  std::complex<double> xi0{0, 0};
  double mse_projection = 0;
  double mse_subtraction = 0;
  double img_residual_projection = 0;
  double img_residual_subtraction = 0;
};

struct ComparisonReport {
  ComparisonSpec spec;
  std::vector<ComparisonRecord> records;
  double win_fraction_covariance = 0;  // fraction of seeds with lower subtraction MSE
  double win_fraction_image = 0;
  double median_mse_projection = 0;
  double median_mse_subtraction = 0;
  double median_img_projection = 0;
  double median_img_subtraction = 0;
  std::map<std::string, std::string> metadata;
};

ComparisonReport run_mitigation_comparison(const ComparisonSpec& spec);
std::string comparison_records_to_csv(const ComparisonReport& report);
std::string comparison_summary_to_csv(const ComparisonReport& report);

/// The four panel maps for one comparison seed: raw zero-lag data, lagged
/// data, and the two squared-residual maps against the reference.
struct ComparisonMaps {
  SkyMap<double> raw;
  SkyMap<double> lagged;
  SkyMap<double> residual_subtraction;
  SkyMap<double> residual_projection;
};

ComparisonMaps comparison_maps(const ComparisonSpec& spec, int seed_index);

// ---------------------------------------------------------------------------
// Study configs from JSON. The "study" field selects the kind:
// "gamma" | "smearing" | "compare".
// ---------------------------------------------------------------------------

std::string study_kind(const std::string& json_text);
GammaStudySpec parse_gamma_study_spec(const std::string& json_text);
SmearingStudySpec parse_smearing_study_spec(const std::string& json_text);
ComparisonSpec parse_comparison_spec(const std::string& json_text);

}  // namespace rfiforge
