#include "rfiforge/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rfiforge/errors.hpp"
#include "rfiforge/rng.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw config_error("config field '" + field + "': " + what);
}

double require_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + key, "missing required field");
  if (!j.at(key).is_number()) fail(path + key, "expected a number");
  return j.at(key).get<double>();
}

double optional_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(path + key, "expected a number");
  return j.at(key).get<double>();
}

std::optional<double> maybe_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_number()) fail(path + key, "expected a number");
  return j.at(key).get<double>();
}

std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) fail(path, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

GeometrySpec parse_geometry(const json& j) {
  GeometrySpec spec;
  if (!j.is_object()) fail("geometry", "expected an object");
  if (j.contains("positions")) {
    const auto& positions = j.at("positions");
    if (!positions.is_array() || positions.empty()) fail("geometry.positions", "expected a non-empty array");
    Eigen::Matrix<double, Eigen::Dynamic, 2> p(static_cast<Eigen::Index>(positions.size()), 2);
    Eigen::Index row = 0;
    for (const auto& entry : positions) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
        fail("geometry.positions", "each entry must be [x, y]");
      p(row, 0) = entry[0].get<double>();
      p(row, 1) = entry[1].get<double>();
      ++row;
    }
    spec.positions = p;
  } else {
    const double m = require_number(j, "geometry.", "num_antennas");
    if (m < 2 || m != std::floor(m)) fail("geometry.num_antennas", "expected an integer >= 2");
    spec.num_antennas = static_cast<Eigen::Index>(m);
    spec.max_baseline = require_number(j, "geometry.", "max_baseline");
    if (!(spec.max_baseline > 0)) fail("geometry.max_baseline", "must be > 0");
  }
  return spec;
}

RfiSpec parse_rfi(const json& j, double sigma_n) {
  RfiSpec spec;
  if (!j.is_object()) fail("rfi", "expected an object");
  spec.sigma_r = maybe_number(j, "rfi.", "sigma_r");
  spec.inr_db = maybe_number(j, "rfi.", "inr_db");
  if (spec.sigma_r && spec.inr_db) fail("rfi.sigma_r", "give either sigma_r or inr_db, not both");
  if (!spec.sigma_r && !spec.inr_db) fail("rfi.sigma_r", "one of sigma_r or inr_db is required");
  if (spec.sigma_r && *spec.sigma_r < 0) fail("rfi.sigma_r", "must be >= 0");
  (void)sigma_n;
  spec.omega = maybe_number(j, "rfi.", "omega");
  spec.phi = maybe_number(j, "rfi.", "phi");
  if (j.contains("alphas")) spec.alphas = number_array(j.at("alphas"), "rfi.alphas");
  spec.alpha_sigma = optional_number(j, "rfi.", "alpha_sigma", 0.0);
  if (spec.alpha_sigma < 0) fail("rfi.alpha_sigma", "must be >= 0");
  if (j.contains("phis")) spec.phis = number_array(j.at("phis"), "rfi.phis");
  return spec;
}

SourceSpec parse_source(const json& j, const std::string& path) {
  SourceSpec spec;
  if (!j.is_object()) fail(path, "expected an object");
  spec.sigma_c = maybe_number(j, path + ".", "sigma_c");
  spec.snr_db = maybe_number(j, path + ".", "snr_db");
  if (spec.sigma_c && spec.snr_db) fail(path + ".sigma_c", "give either sigma_c or snr_db, not both");
  if (!spec.sigma_c && !spec.snr_db) fail(path + ".sigma_c", "one of sigma_c or snr_db is required");
  if (spec.sigma_c && *spec.sigma_c < 0) fail(path + ".sigma_c", "must be >= 0");
  spec.l = require_number(j, path + ".", "l");
  spec.m = require_number(j, path + ".", "m");
  if (spec.l * spec.l + spec.m * spec.m > 1.0 + 1e-12)
    fail(path, "direction (l, m) lies outside the unit disk");
  return spec;
}

}  // namespace

ScenarioSpec parse_scenario_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object");

  ScenarioSpec spec;
  if (!j.contains("geometry")) fail("geometry", "missing required field");
  spec.geometry = parse_geometry(j.at("geometry"));

  if (!j.contains("sigma_n")) fail("sigma_n", "missing required field");
  if (!j.at("sigma_n").is_number()) fail("sigma_n", "expected a number");
  spec.sigma_n = j.at("sigma_n").get<double>();
  if (!(spec.sigma_n > 0)) fail("sigma_n", "must be > 0");

  const double n = require_number(j, "", "num_samples");
  if (n < 1 || n != std::floor(n)) fail("num_samples", "expected an integer >= 1");
  spec.num_samples = static_cast<Eigen::Index>(n);

  spec.gain_delta = optional_number(j, "", "gain_delta", 0.0);
  if (spec.gain_delta < 0 || spec.gain_delta >= 1) fail("gain_delta", "must lie in [0, 1)");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected an unsigned integer");
    spec.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("rfi") && !j.at("rfi").is_null()) spec.rfi = parse_rfi(j.at("rfi"), spec.sigma_n);

  if (j.contains("sources")) {
    if (!j.at("sources").is_array()) fail("sources", "expected an array");
    std::size_t index = 0;
    for (const auto& src : j.at("sources")) {
      spec.sources.push_back(parse_source(src, "sources[" + std::to_string(index) + "]"));
      ++index;
    }
  }
  return spec;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw io_error("cannot open config file: " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_spec(text.str());
}

ScenarioConfig<double> realize(const ScenarioSpec& spec, std::uint64_t seed) {
  RngStream root(seed);
  ScenarioConfig<double> config;
  config.seed = seed;
  config.sigma_n = spec.sigma_n;
  config.num_samples = spec.num_samples;
  config.gain_delta = spec.gain_delta;

  if (spec.geometry.positions) {
    config.geometry.positions = *spec.geometry.positions;
  } else {
    config.geometry = random_geometry<double>(spec.geometry.num_antennas, spec.geometry.max_baseline,
                                              root.fork("geometry"));
  }
  const Eigen::Index m = config.geometry.size();

  if (spec.rfi) {
    RfiModel<double> rfi;
    rfi.sigma_r = spec.rfi->sigma_r ? *spec.rfi->sigma_r
                                    : spec.sigma_n * std::pow(10.0, *spec.rfi->inr_db / 20.0);
    if (spec.rfi->omega) {
      rfi.omega = *spec.rfi->omega;
    } else {
      rfi.omega = root.fork("rfi-omega").uniform(0.0, 2.0 * pi_v<double>);
    }
    if (spec.rfi->phi) {
      rfi.phi = *spec.rfi->phi;
    } else {
      rfi.phi = root.fork("rfi-phi").uniform(0.0, 2.0 * pi_v<double>);
    }
    if (spec.rfi->alphas) {
      if (static_cast<Eigen::Index>(spec.rfi->alphas->size()) != m)
        throw config_error("config field 'rfi.alphas': length must equal the antenna count");
      rfi.alphas = Eigen::Map<const RealVector<double>>(spec.rfi->alphas->data(),
                                                        static_cast<Eigen::Index>(spec.rfi->alphas->size()));
    } else {
      RngStream stream = root.fork("rfi-alphas");
      rfi.alphas.resize(m);
      for (Eigen::Index k = 0; k < m; ++k) rfi.alphas(k) = stream.gaussian(spec.rfi->alpha_sigma);
    }
    if (spec.rfi->phis) {
      if (static_cast<Eigen::Index>(spec.rfi->phis->size()) != m)
        throw config_error("config field 'rfi.phis': length must equal the antenna count");
      rfi.phis = Eigen::Map<const RealVector<double>>(spec.rfi->phis->data(),
                                                      static_cast<Eigen::Index>(spec.rfi->phis->size()));
    } else {
      RngStream stream = root.fork("rfi-phis");
      rfi.phis.resize(m);
      for (Eigen::Index k = 0; k < m; ++k) rfi.phis(k) = stream.uniform(0.0, 2.0 * pi_v<double>);
    }
    config.rfi = std::move(rfi);
  }

  for (const auto& src : spec.sources) {
    CosmicSource<double> source;
    source.sigma_c =
        src.sigma_c ? *src.sigma_c : spec.sigma_n * std::pow(10.0, *src.snr_db / 20.0);
    source.l = src.l;
    source.m = src.m;
    config.sources.push_back(source);
  }

  validate(config);
  return config;
}

}  // namespace rfiforge
