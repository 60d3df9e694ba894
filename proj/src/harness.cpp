#include "rfiforge/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "rfiforge/covariance.hpp"
#include "rfiforge/errors.hpp"
#include "rfiforge/export.hpp"
#include "rfiforge/mitigation.hpp"
#include "rfiforge/parallel.hpp"
#include "rfiforge/rng.hpp"
#include "rfiforge/subspace.hpp"

namespace rfiforge {

namespace {

double pairwise_mean(const std::vector<double>& values) {
  return pairwise_accumulate<double>(values.size(), [&](std::size_t i) { return values[i]; }) /
         static_cast<double>(values.size());
}

double pairwise_sample_variance(const std::vector<double>& values, double mean) {
  const double ss = pairwise_accumulate<double>(values.size(), [&](std::size_t i) {
    const double d = values[i] - mean;
    return d * d;
  });
  return ss / static_cast<double>(values.size() - 1);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Line array along x keeps gamma-study configs valid; the geometry is inert
/// there (no cosmic sources, spatially white noise).
Eigen::Matrix<double, Eigen::Dynamic, 2> line_positions(Eigen::Index count) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> p(count, 2);
  for (Eigen::Index k = 0; k < count; ++k) {
    p(k, 0) = 0.5 * static_cast<double>(k);
    p(k, 1) = 0.0;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gamma study
// ---------------------------------------------------------------------------

const GammaStudyCell& StudyTable::cell(std::size_t delta_i, std::size_t tau_i, std::size_t inr_i,
                                       std::size_t n_i) const {
  const std::size_t index =
      ((delta_i * spec.taus.size() + tau_i) * spec.inr_db_grid.size() + inr_i) * spec.n_grid.size() +
      n_i;
  return cells.at(index);
}

StudyTable run_gamma_study(const GammaStudySpec& spec) {
  if (spec.trials < 2) throw domain_error("run_gamma_study: need at least 2 trials");
  if (spec.num_antennas < 2) throw domain_error("run_gamma_study: need at least 2 antennas");

  const std::size_t cell_count =
      spec.deltas.size() * spec.taus.size() * spec.inr_db_grid.size() * spec.n_grid.size();
  struct CellDef {
    double delta;
    int tau;
    double inr_db;
    Eigen::Index num_samples;
  };
  std::vector<CellDef> defs;
  defs.reserve(cell_count);
  for (double delta : spec.deltas)
    for (int tau : spec.taus)
      for (double inr_db : spec.inr_db_grid)
        for (Eigen::Index n : spec.n_grid) defs.push_back({delta, tau, inr_db, n});

  std::vector<std::vector<double>> gammas(cell_count,
                                          std::vector<double>(static_cast<std::size_t>(spec.trials)));

  ScenarioSpec base;
  base.geometry.positions = line_positions(spec.num_antennas);
  base.sigma_n = 1.0;
  RfiSpec rfi;
  rfi.alpha_sigma = 0.0;  // spatially stationary interferer
  base.rfi = rfi;

  const int total = static_cast<int>(cell_count) * spec.trials;
  parallel_for_index(total, spec.threads, [&](int item) {
    const std::size_t cell_id = static_cast<std::size_t>(item) / static_cast<std::size_t>(spec.trials);
    const int trial = item % spec.trials;
    const CellDef& def = defs[cell_id];

    ScenarioSpec trial_spec = base;
    trial_spec.rfi->inr_db = def.inr_db;
    trial_spec.num_samples = def.num_samples;
    trial_spec.gain_delta = def.delta;
    const std::uint64_t seed = RngStream(spec.base_seed)
                                   .fork("gamma")
                                   .fork(static_cast<std::uint64_t>(cell_id))
                                   .fork(static_cast<std::uint64_t>(trial))
                                   .key();
    const ScenarioConfig<double> config = realize(trial_spec, seed);

    SnapshotMatrix<double> x = synthesize(config);
    if (config.gain_delta > 0) x = apply_gain_errors(x, draw_configured_gains(config));
    const LaggedSCM<double> scm = sample_covariance(x, def.tau);
    const SubspaceEstimate<double> estimate = estimate_rfi_ssv(scm);
    const ComplexVector<double> a_true = rfi_ssv(*config.rfi, 0, config.num_antennas());
    gammas[cell_id][static_cast<std::size_t>(trial)] =
        alignment_gamma(a_true, estimate.basis.col(0));
  });

  StudyTable table;
  table.spec = spec;
  table.metadata["estimator_tau0"] = "dominant eigenvector of the Hermitian part";
  table.metadata["estimator_tau_nonzero"] = "dominant left singular vector";
  table.cells.reserve(cell_count);
  for (std::size_t c = 0; c < cell_count; ++c) {
    GammaStudyCell cell;
    cell.delta = defs[c].delta;
    cell.tau = defs[c].tau;
    cell.inr_db = defs[c].inr_db;
    cell.num_samples = defs[c].num_samples;
    cell.trials = spec.trials;
    cell.mean_gamma = pairwise_mean(gammas[c]);
    cell.var_gamma = pairwise_sample_variance(gammas[c], cell.mean_gamma);
    table.cells.push_back(cell);
  }
  return table;
}

std::string study_table_to_csv(const StudyTable& table) {
  std::string out = "delta,tau,inr_db,num_samples,trials,mean_gamma,var_gamma\n";
  for (const auto& cell : table.cells) {
    out += format_double(cell.delta);
    out += ',';
    out += std::to_string(cell.tau);
    out += ',';
    out += format_double(cell.inr_db);
    out += ',';
    out += std::to_string(cell.num_samples);
    out += ',';
    out += std::to_string(cell.trials);
    out += ',';
    out += format_double(cell.mean_gamma);
    out += ',';
    out += format_double(cell.var_gamma);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smearing study
// ---------------------------------------------------------------------------

SmearingTable run_smearing_study(const SmearingStudySpec& spec) {
  if (spec.trials < 1) throw domain_error("run_smearing_study: need at least 1 trial");
  if (!(spec.alpha_sigma > 0))
    throw domain_error("run_smearing_study: alpha_sigma must be > 0 (drift rates must differ)");
  const Eigen::Index m = spec.num_antennas;
  if (m < 2) throw domain_error("run_smearing_study: need at least 2 antennas");

  const std::size_t n_count = spec.n_grid.size();
  std::vector<SmearingRow> grid(static_cast<std::size_t>(spec.trials) * n_count);

  parallel_for_index(spec.trials, spec.threads, [&](int trial) {
    RngStream root(derive_seed(spec.base_seed, "smearing", static_cast<std::uint64_t>(trial)));
    RfiModel<double> rfi;
    rfi.sigma_r = spec.sigma_r;
    rfi.omega = spec.omega;
    rfi.phi = 0.0;
    rfi.alphas.resize(m);
    rfi.phis.resize(m);
    RngStream alpha_stream = root.fork("rfi-alphas");
    for (Eigen::Index k = 0; k < m; ++k) rfi.alphas(k) = alpha_stream.gaussian(spec.alpha_sigma);
    RngStream phi_stream = root.fork("rfi-phis");
    for (Eigen::Index k = 0; k < m; ++k) rfi.phis(k) = phi_stream.uniform(0.0, 2.0 * pi_v<double>);

    for (std::size_t ni = 0; ni < n_count; ++ni) {
      const Eigen::Index n = spec.n_grid[ni];
      SmearingRow row;
      row.num_samples = n;
      row.trial = trial;

      LaggedSCM<double> closed{rfi_scm_closed_form(rfi, 0, n), 0, n};
      row.closed_spectrum = covariance_spectrum(closed);
      row.dominant_fraction_closed = row.closed_spectrum(0) / row.closed_spectrum.sum();

      if (n <= spec.empirical_max_n) {
        const LaggedSCM<double> empirical = sample_covariance(rfi_snapshots(rfi, m, n), 0);
        row.empirical_spectrum = covariance_spectrum(empirical);
        row.dominant_fraction_empirical = row.empirical_spectrum(0) / row.empirical_spectrum.sum();
      } else {
        row.dominant_fraction_empirical = std::numeric_limits<double>::quiet_NaN();
      }
      grid[ni * static_cast<std::size_t>(spec.trials) + static_cast<std::size_t>(trial)] =
          std::move(row);
    }
  });

  SmearingTable table;
  table.spec = spec;
  table.rows = std::move(grid);
  return table;
}

std::string smearing_table_to_csv(const SmearingTable& table) {
  const Eigen::Index m = table.spec.num_antennas;
  std::string out = "num_samples,trial,dominant_fraction_closed,dominant_fraction_empirical";
  for (Eigen::Index k = 0; k < m; ++k) out += ",closed_eig_" + std::to_string(k + 1);
  for (Eigen::Index k = 0; k < m; ++k) out += ",empirical_eig_" + std::to_string(k + 1);
  out += '\n';
  for (const auto& row : table.rows) {
    out += std::to_string(row.num_samples);
    out += ',';
    out += std::to_string(row.trial);
    out += ',';
    out += format_double(row.dominant_fraction_closed);
    out += ',';
    out += std::isnan(row.dominant_fraction_empirical)
               ? ""
               : format_double(row.dominant_fraction_empirical);
    for (Eigen::Index k = 0; k < m; ++k) {
      out += ',';
      out += format_double(row.closed_spectrum(k));
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      out += ',';
      if (row.empirical_spectrum.size() == m) out += format_double(row.empirical_spectrum(k));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mitigation comparison
// ---------------------------------------------------------------------------

namespace {

struct SeedOutcome {
  ComparisonRecord record;
  MitigationResult<double> projection;
  MitigationResult<double> subtraction;
  ComplexMatrix<double> r0;
  ComplexMatrix<double> rtau;
  ComplexMatrix<double> reference;
  ArrayGeometry<double> geometry;
};

ScenarioSpec anchored_scenario(const ComparisonSpec& spec) {
  if (!spec.scenario.rfi)
    throw domain_error("run_mitigation_comparison: scenario needs an interferer entry");
  if (spec.scenario.sources.empty())
    throw domain_error("run_mitigation_comparison: scenario needs at least one cosmic source");
  ScenarioSpec anchored = spec.scenario;
  if (!anchored.geometry.positions) {
    // One array per study: the geometry is pinned from the base seed and
    // shared by every comparison seed.
    const ScenarioConfig<double> anchor = realize(spec.scenario, spec.base_seed);
    anchored.geometry.positions = anchor.geometry.positions;
  }
  return anchored;
}

SeedOutcome evaluate_seed(const ComparisonSpec& spec, const ScenarioSpec& anchored,
                          const SkyGrid<double>& grid, int seed_index) {
  SeedOutcome outcome;
  const std::uint64_t seed =
      derive_seed(spec.base_seed, "compare", static_cast<std::uint64_t>(seed_index));
  ScenarioConfig<double> config = realize(anchored, seed);
  ScenarioConfig<double> reference_config = config;
  reference_config.rfi->sigma_r = 0.0;  // common random numbers: same noise/source draws

  SnapshotMatrix<double> x = synthesize(config);
  SnapshotMatrix<double> x_ref = synthesize(reference_config);
  if (config.gain_delta > 0) {
    const RealVector<double> u = draw_configured_gains(config);
    x = apply_gain_errors(x, u);
    x_ref = apply_gain_errors(x_ref, u);
  }

  const LaggedSCM<double> r0 = sample_covariance(x, 0);
  const LaggedSCM<double> rtau = sample_covariance(x, spec.tau);
  const LaggedSCM<double> rref = sample_covariance(x_ref, 0);
  const ComplexMatrix<double> reference = hermitian_part(rref.matrix);

  const RealVector<double> spectrum = covariance_spectrum(r0);
  const double sigma_est = estimate_noise_sigma(spectrum);
  const Eigen::Index floor = std::min(spec.min_projection_rank, r0.matrix.rows() - 1);
  const Eigen::Index rank =
      std::max(rfi_subspace_rank(spectrum, sigma_est, spec.kappa), floor);
  ComplexMatrix<double> basis(r0.matrix.rows(), 0);
  if (rank > 0) basis = estimate_rfi_subspace(r0, rank).basis;
  MitigationResult<double> projection = mitigate_by_projection(r0, basis);
  MitigationResult<double> subtraction = mitigate_by_subtraction(r0, rtau);

  projection.mse_vs_reference = covariance_mse(projection.corrected, reference);
  subtraction.mse_vs_reference = covariance_mse(subtraction.corrected, reference);

  const SkyMap<double> map_ref = dirty_map(reference, config.geometry, grid);
  const SkyMap<double> map_proj = dirty_map(projection.corrected, config.geometry, grid);
  const SkyMap<double> map_sub = dirty_map(subtraction.corrected, config.geometry, grid);

  ComparisonRecord record;
  record.seed_index = seed_index;
  record.seed = seed;
  record.rank_removed = projection.rank_removed;
  record.xi0 = subtraction.xi0;
  record.mse_projection = *projection.mse_vs_reference;
  record.mse_subtraction = *subtraction.mse_vs_reference;
  record.img_residual_projection = map_mean(residual_map(map_proj, map_ref));
  record.img_residual_subtraction = map_mean(residual_map(map_sub, map_ref));

  outcome.record = record;
  outcome.projection = std::move(projection);
  outcome.subtraction = std::move(subtraction);
  outcome.r0 = r0.matrix;
  outcome.rtau = rtau.matrix;
  outcome.reference = reference;
  outcome.geometry = config.geometry;
  return outcome;
}

}  // namespace

ComparisonReport run_mitigation_comparison(const ComparisonSpec& spec) {
  if (spec.seeds < 1) throw domain_error("run_mitigation_comparison: need at least 1 seed");
  if (spec.tau < 1) throw domain_error("run_mitigation_comparison: tau must be >= 1");
  const ScenarioSpec anchored = anchored_scenario(spec);
  const SkyGrid<double> grid = SkyGrid<double>::regular(spec.grid_size, spec.grid_extent);

  std::vector<ComparisonRecord> records(static_cast<std::size_t>(spec.seeds));
  parallel_for_index(spec.seeds, spec.threads, [&](int s) {
    records[static_cast<std::size_t>(s)] = evaluate_seed(spec, anchored, grid, s).record;
  });

  ComparisonReport report;
  report.spec = spec;
  report.records = records;
  int wins_cov = 0;
  int wins_img = 0;
  std::vector<double> mse_p, mse_s, img_p, img_s;
  for (const auto& r : records) {
    wins_cov += r.mse_subtraction < r.mse_projection ? 1 : 0;
    wins_img += r.img_residual_subtraction < r.img_residual_projection ? 1 : 0;
    mse_p.push_back(r.mse_projection);
    mse_s.push_back(r.mse_subtraction);
    img_p.push_back(r.img_residual_projection);
    img_s.push_back(r.img_residual_subtraction);
  }
  const double n = static_cast<double>(spec.seeds);
  report.win_fraction_covariance = wins_cov / n;
  report.win_fraction_image = wins_img / n;
  report.median_mse_projection = median_of(mse_p);
  report.median_mse_subtraction = median_of(mse_s);
  report.median_img_projection = median_of(img_p);
  report.median_img_subtraction = median_of(img_s);
  report.metadata["projection_rank_rule"] =
      "max(min_projection_rank, count of eigenvalues above kappa * median eigenvalue)";
  report.metadata["kappa"] = format_double(spec.kappa);
  report.metadata["min_projection_rank"] = std::to_string(spec.min_projection_rank);
  return report;
}

std::string comparison_records_to_csv(const ComparisonReport& report) {
  std::string out =
      "seed_index,seed,rank_removed,xi0_re,xi0_im,mse_projection,mse_subtraction,"
      "img_residual_projection,img_residual_subtraction\n";
  for (const auto& r : report.records) {
    out += std::to_string(r.seed_index);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.rank_removed);
    out += ',';
    out += format_double(r.xi0.real());
    out += ',';
    out += format_double(r.xi0.imag());
    out += ',';
    out += format_double(r.mse_projection);
    out += ',';
    out += format_double(r.mse_subtraction);
    out += ',';
    out += format_double(r.img_residual_projection);
    out += ',';
    out += format_double(r.img_residual_subtraction);
    out += '\n';
  }
  return out;
}

std::string comparison_summary_to_csv(const ComparisonReport& report) {
  std::string out =
      "seeds,win_fraction_covariance,win_fraction_image,median_mse_projection,"
      "median_mse_subtraction,median_img_projection,median_img_subtraction\n";
  out += std::to_string(report.spec.seeds);
  out += ',';
  out += format_double(report.win_fraction_covariance);
  out += ',';
  out += format_double(report.win_fraction_image);
  out += ',';
  out += format_double(report.median_mse_projection);
  out += ',';
  out += format_double(report.median_mse_subtraction);
  out += ',';
  out += format_double(report.median_img_projection);
  out += ',';
  out += format_double(report.median_img_subtraction);
  out += '\n';
  return out;
}

ComparisonMaps comparison_maps(const ComparisonSpec& spec, int seed_index) {
  const ScenarioSpec anchored = anchored_scenario(spec);
  const SkyGrid<double> grid = SkyGrid<double>::regular(spec.grid_size, spec.grid_extent);
  const SeedOutcome outcome = evaluate_seed(spec, anchored, grid, seed_index);

  ComparisonMaps maps;
  maps.raw = dirty_map(hermitian_part(outcome.r0), outcome.geometry, grid);
  maps.raw.source_description = "zero-lag data";
  maps.lagged = dirty_map(hermitian_part(outcome.rtau), outcome.geometry, grid);
  maps.lagged.source_description = "lagged data (Hermitian part)";
  const SkyMap<double> map_ref = dirty_map(outcome.reference, outcome.geometry, grid);
  const SkyMap<double> map_sub = dirty_map(outcome.subtraction.corrected, outcome.geometry, grid);
  const SkyMap<double> map_proj = dirty_map(outcome.projection.corrected, outcome.geometry, grid);
  maps.residual_subtraction = residual_map(map_sub, map_ref);
  maps.residual_subtraction.source_description = "squared residual, subtraction vs reference";
  maps.residual_projection = residual_map(map_proj, map_ref);
  maps.residual_projection.source_description = "squared residual, projection vs reference";
  return maps;
}

// ---------------------------------------------------------------------------
// Study configs
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json parse_study_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  return j;
}

template <typename T>
std::vector<T> grid_from(const json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.empty())
    throw config_error(std::string("config field '") + key + "': expected a non-empty array");
  std::vector<T> out;
  for (const auto& v : arr) {
    if (!v.is_number())
      throw config_error(std::string("config field '") + key + "': expected numbers");
    out.push_back(static_cast<T>(v.get<double>()));
  }
  return out;
}

double scalar_from(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw config_error(std::string("config field '") + key + "': expected a number");
  return j.at(key).get<double>();
}

std::uint64_t seed_from(const json& j, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  if (!j.at("seed").is_number_unsigned())
    throw config_error("config field 'seed': expected an unsigned integer");
  return j.at("seed").get<std::uint64_t>();
}

}  // namespace

std::string study_kind(const std::string& json_text) {
  const json j = parse_study_json(json_text);
  if (!j.contains("study") || !j.at("study").is_string())
    throw config_error("config field 'study': missing or not a string");
  return j.at("study").get<std::string>();
}

GammaStudySpec parse_gamma_study_spec(const std::string& json_text) {
  const json j = parse_study_json(json_text);
  GammaStudySpec spec;
  spec.inr_db_grid = grid_from<double>(j, "inr_db_grid", spec.inr_db_grid);
  spec.n_grid = grid_from<Eigen::Index>(j, "n_grid", spec.n_grid);
  {
    std::vector<int> taus = grid_from<int>(j, "taus", spec.taus);
    for (int tau : taus)
      if (tau < 0) throw config_error("config field 'taus': lags must be >= 0");
    spec.taus = taus;
  }
  spec.deltas = grid_from<double>(j, "deltas", spec.deltas);
  spec.trials = static_cast<int>(scalar_from(j, "trials", spec.trials));
  spec.num_antennas = static_cast<Eigen::Index>(scalar_from(j, "num_antennas", 8));
  spec.base_seed = seed_from(j, spec.base_seed);
  return spec;
}

SmearingStudySpec parse_smearing_study_spec(const std::string& json_text) {
  const json j = parse_study_json(json_text);
  SmearingStudySpec spec;
  spec.alpha_sigma = scalar_from(j, "alpha_sigma", spec.alpha_sigma);
  spec.n_grid = grid_from<Eigen::Index>(j, "n_grid", spec.n_grid);
  spec.num_antennas = static_cast<Eigen::Index>(scalar_from(j, "num_antennas", 8));
  spec.sigma_r = scalar_from(j, "sigma_r", spec.sigma_r);
  spec.omega = scalar_from(j, "omega", spec.omega);
  spec.trials = static_cast<int>(scalar_from(j, "trials", spec.trials));
  spec.empirical_max_n =
      static_cast<Eigen::Index>(scalar_from(j, "empirical_max_n", spec.empirical_max_n));
  spec.base_seed = seed_from(j, spec.base_seed);
  return spec;
}

ComparisonSpec parse_comparison_spec(const std::string& json_text) {
  const json j = parse_study_json(json_text);
  ComparisonSpec spec;
  if (!j.contains("scenario") || !j.at("scenario").is_object())
    throw config_error("config field 'scenario': missing or not an object");
  spec.scenario = parse_scenario_spec(j.at("scenario").dump());
  spec.seeds = static_cast<int>(scalar_from(j, "seeds", spec.seeds));
  spec.tau = static_cast<Eigen::Index>(scalar_from(j, "tau", spec.tau));
  spec.kappa = scalar_from(j, "kappa", spec.kappa);
  spec.min_projection_rank = static_cast<Eigen::Index>(
      scalar_from(j, "min_projection_rank", static_cast<double>(spec.min_projection_rank)));
  if (spec.min_projection_rank < 0)
    throw config_error("config field 'min_projection_rank': must be >= 0");
  spec.grid_size = static_cast<Eigen::Index>(scalar_from(j, "grid_size", spec.grid_size));
  spec.grid_extent = scalar_from(j, "grid_extent", spec.grid_extent);
  spec.base_seed = seed_from(j, spec.scenario.seed);
  return spec;
}

}  // namespace rfiforge
