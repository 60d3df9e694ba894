#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfiforge/config.hpp"
#include "rfiforge/covariance.hpp"
#include "rfiforge/errors.hpp"
#include "rfiforge/export.hpp"
#include "rfiforge/harness.hpp"
#include "rfiforge/imaging.hpp"
#include "rfiforge/mitigation.hpp"
#include "rfiforge/scenario.hpp"

namespace fs = std::filesystem;
using namespace rfiforge;

namespace {

constexpr const char* kVersion = "rfiforge 0.1.0";

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_flag;
  int threads = 1;
};

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("RFI_FORGE_SEED");
  if (raw == nullptr) return std::nullopt;
  std::string text(raw);
  if (text.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::uint64_t value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw config_error("environment variable RFI_FORGE_SEED is not an unsigned integer: " + text);
  }
}

/// Precedence: config < RFI_FORGE_SEED < --seed.
std::pair<std::uint64_t, std::string> resolve_seed(std::uint64_t config_seed,
                                                   const std::optional<std::uint64_t>& flag) {
  if (flag) return {*flag, "flag"};
  if (const auto env = seed_from_env()) return {*env, "env"};
  return {config_seed, "config"};
}

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw io_error("cannot create output directory: " + out_dir);
  return dir;
}

RunManifest start_manifest(const std::string& command, const CommonOptions& opts,
                           std::uint64_t seed, const std::string& seed_source) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_path = opts.config_path;
  manifest.config_sha256 = sha256_file(opts.config_path);
  manifest.seed = seed;
  manifest.seed_source = seed_source;
  manifest.threads = opts.threads;
  return manifest;
}

void emit_map(const fs::path& out_dir, const std::string& stem, const SkyMap<double>& map,
              RunManifest& manifest) {
  emit_file(out_dir, stem + ".csv", map_to_csv(map), manifest);
  const PgmImage image = map_to_pgm(map);
  emit_file(out_dir, stem + ".pgm", image.pgm, manifest);
  emit_file(out_dir, stem + "_scale.json", image.sidecar_json, manifest);
}

// ---------------------------------------------------------------------------

void run_simulate(const CommonOptions& opts, bool write_snapshots) {
  Stopwatch total;
  const ScenarioSpec spec = load_scenario_spec(opts.config_path);
  const auto [seed, seed_source] = resolve_seed(spec.seed, opts.seed_flag);
  if (spec.num_samples < 2)
    throw config_error("config field 'num_samples': need >= 2 samples for the lagged output");
  const fs::path out_dir = prepare_out_dir(opts.out_dir);
  RunManifest manifest = start_manifest("simulate", opts, seed, seed_source);

  const ScenarioConfig<double> config = realize(spec, seed);
  Stopwatch synth;
  SnapshotMatrix<double> x = synthesize(config);
  if (config.gain_delta > 0) {
    const RealVector<double> u = draw_configured_gains(config);
    x = apply_gain_errors(x, u);
    std::string u_csv = "antenna,gain\n";
    for (Eigen::Index k = 0; k < u.size(); ++k)
      u_csv += std::to_string(k) + "," + format_double(u(k)) + "\n";
    manifest.extra["gain_delta"] = format_double(config.gain_delta);
    manifest.extra["gain_vector_sha256"] = sha256_hex(u_csv);
  }
  manifest.timings_ms["synthesize"] = synth.ms();

  Stopwatch estimate;
  const LaggedSCM<double> scm0 = sample_covariance(x, 0);
  const LaggedSCM<double> scm1 = sample_covariance(x, 1);
  manifest.timings_ms["covariance"] = estimate.ms();

  emit_file(out_dir, "geometry.csv", geometry_to_csv(config.geometry), manifest);
  emit_file(out_dir, "scm_tau0.csv", matrix_to_csv(scm0.matrix), manifest);
  emit_file(out_dir, "scm_tau1.csv", matrix_to_csv(scm1.matrix), manifest);
  if (write_snapshots) emit_file(out_dir, "snapshots.csv", snapshots_to_csv(x), manifest);

  manifest.timings_ms["total"] = total.ms();
  write_manifest(out_dir, manifest);
}

void run_gamma_study_cmd(const CommonOptions& opts, std::optional<int> trials,
                         std::optional<int> tau, std::optional<double> delta) {
  Stopwatch total;
  const std::string text = read_text_file(opts.config_path);
  GammaStudySpec spec = parse_gamma_study_spec(text);
  const auto [seed, seed_source] = resolve_seed(spec.base_seed, opts.seed_flag);
  spec.base_seed = seed;
  if (trials) spec.trials = *trials;
  if (tau) spec.taus = {*tau};
  if (delta) spec.deltas = {*delta};
  spec.threads = opts.threads;

  const fs::path out_dir = prepare_out_dir(opts.out_dir);
  RunManifest manifest = start_manifest("gamma-study", opts, seed, seed_source);
  Stopwatch study;
  const StudyTable table = run_gamma_study(spec);
  manifest.timings_ms["study"] = study.ms();
  for (const auto& [key, value] : table.metadata) manifest.extra[key] = value;
  manifest.extra["trials"] = std::to_string(spec.trials);
  emit_file(out_dir, "gamma_study.csv", study_table_to_csv(table), manifest);
  manifest.timings_ms["total"] = total.ms();
  write_manifest(out_dir, manifest);
}

void run_smear_study_cmd(const CommonOptions& opts, std::optional<int> trials) {
  Stopwatch total;
  const std::string text = read_text_file(opts.config_path);
  SmearingStudySpec spec = parse_smearing_study_spec(text);
  const auto [seed, seed_source] = resolve_seed(spec.base_seed, opts.seed_flag);
  spec.base_seed = seed;
  if (trials) spec.trials = *trials;
  spec.threads = opts.threads;

  const fs::path out_dir = prepare_out_dir(opts.out_dir);
  RunManifest manifest = start_manifest("smear-study", opts, seed, seed_source);
  Stopwatch study;
  const SmearingTable table = run_smearing_study(spec);
  manifest.timings_ms["study"] = study.ms();
  emit_file(out_dir, "smearing.csv", smearing_table_to_csv(table), manifest);
  manifest.timings_ms["total"] = total.ms();
  write_manifest(out_dir, manifest);
}

void run_compare_cmd(const CommonOptions& opts, std::optional<int> trials, std::optional<int> tau,
                     std::optional<double> delta) {
  Stopwatch total;
  const std::string text = read_text_file(opts.config_path);
  ComparisonSpec spec = parse_comparison_spec(text);
  const auto [seed, seed_source] = resolve_seed(spec.base_seed, opts.seed_flag);
  spec.base_seed = seed;
  if (trials) spec.seeds = *trials;
  if (tau) spec.tau = *tau;
  if (delta) spec.scenario.gain_delta = *delta;
  spec.threads = opts.threads;

  const fs::path out_dir = prepare_out_dir(opts.out_dir);
  RunManifest manifest = start_manifest("compare", opts, seed, seed_source);
  Stopwatch study;
  const ComparisonReport report = run_mitigation_comparison(spec);
  manifest.timings_ms["study"] = study.ms();
  for (const auto& [key, value] : report.metadata) manifest.extra[key] = value;
  emit_file(out_dir, "comparison.csv", comparison_records_to_csv(report), manifest);
  emit_file(out_dir, "summary.csv", comparison_summary_to_csv(report), manifest);

  Stopwatch maps_watch;
  const ComparisonMaps maps = comparison_maps(spec, 0);
  emit_map(out_dir, "map_raw", maps.raw, manifest);
  emit_map(out_dir, "map_lagged", maps.lagged, manifest);
  emit_map(out_dir, "map_residual_subtraction", maps.residual_subtraction, manifest);
  emit_map(out_dir, "map_residual_projection", maps.residual_projection, manifest);
  manifest.timings_ms["maps"] = maps_watch.ms();

  manifest.timings_ms["total"] = total.ms();
  write_manifest(out_dir, manifest);
}

void run_image_cmd(const std::string& scm_path, const std::string& geometry_path,
                   const std::string& out_dir_raw, Eigen::Index grid_size, double extent,
                   int threads) {
  Stopwatch total;
  if (grid_size < 2) throw config_error("image: --grid-size must be >= 2");
  if (!(extent > 0) || extent > 1.0) throw config_error("image: --extent must lie in (0, 1]");
  const ComplexMatrix<double> scm = matrix_from_csv(read_text_file(scm_path));
  const ArrayGeometry<double> geometry = geometry_from_csv(read_text_file(geometry_path));
  if (scm.rows() != scm.cols() || scm.rows() != geometry.size())
    throw config_error("image: covariance shape does not match the geometry");

  const fs::path out_dir = prepare_out_dir(out_dir_raw);
  RunManifest manifest;
  manifest.command = "image";
  manifest.config_path = scm_path;
  manifest.config_sha256 = sha256_file(scm_path);
  manifest.seed = 0;
  manifest.seed_source = "none";
  manifest.threads = threads;

  const SkyGrid<double> grid = SkyGrid<double>::regular(grid_size, extent);
  SkyMap<double> map = dirty_map(hermitian_part(scm), geometry, grid);
  map.source_description = "dirty map of " + scm_path;
  emit_map(out_dir, "map", map, manifest);
  manifest.timings_ms["total"] = total.ms();
  write_manifest(out_dir, manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rfiforge: spatial interference mitigation simulator for antenna arrays"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions opts;
  bool write_snapshots = false;
  std::optional<int> trials_flag;
  std::optional<int> tau_flag;
  std::optional<double> delta_flag;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("config", opts.config_path, "JSON config file")->required();
    cmd->add_option("-o,--out", opts.out_dir, "output directory")->required();
    cmd->add_option("--seed", opts.seed_flag, "override the base seed");
    cmd->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize one scenario and export its SCMs");
  add_common(simulate, true);
  simulate->add_flag("--snapshots", write_snapshots, "also export the raw snapshot matrix");

  CLI::App* gamma = app.add_subcommand("gamma-study", "signature-alignment Monte-Carlo study");
  add_common(gamma, true);
  gamma->add_option("--trials", trials_flag, "Monte-Carlo trials per cell");
  gamma->add_option("--tau", tau_flag, "restrict to one SCM lag");
  gamma->add_option("--delta", delta_flag, "restrict to one gain-fluctuation level");

  CLI::App* smear = app.add_subcommand("smear-study", "interferer subspace-spread study");
  add_common(smear, true);
  smear->add_option("--trials", trials_flag, "Monte-Carlo trials");

  CLI::App* compare = app.add_subcommand("compare", "projection vs subtraction comparison");
  add_common(compare, true);
  compare->add_option("--trials", trials_flag, "number of comparison seeds");
  compare->add_option("--tau", tau_flag, "lag of the subtracted SCM");
  compare->add_option("--delta", delta_flag, "override the scenario gain-fluctuation level");

  CLI::App* image = app.add_subcommand("image", "beamform a stored covariance into a sky map");
  std::string scm_path;
  std::string geometry_path;
  Eigen::Index grid_size = 129;
  double extent = 0.5;
  image->add_option("--scm", scm_path, "covariance CSV (i,j,re,im)")->required();
  image->add_option("--geometry", geometry_path, "geometry CSV (antenna,x,y)")->required();
  image->add_option("-o,--out", opts.out_dir, "output directory")->required();
  image->add_option("--grid-size", grid_size, "points per grid axis");
  image->add_option("--extent", extent, "grid half-width in direction cosines");
  image->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) {
      run_simulate(opts, write_snapshots);
    } else if (gamma->parsed()) {
      run_gamma_study_cmd(opts, trials_flag, tau_flag, delta_flag);
    } else if (smear->parsed()) {
      run_smear_study_cmd(opts, trials_flag);
    } else if (compare->parsed()) {
      run_compare_cmd(opts, trials_flag, tau_flag, delta_flag);
    } else if (image->parsed()) {
      run_image_cmd(scm_path, geometry_path, opts.out_dir, grid_size, extent, opts.threads);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
