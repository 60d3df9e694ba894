#include "rfiforge/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "rfiforge/errors.hpp"

namespace rfiforge {

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(data, size, digest, &digest_len, EVP_sha256(), nullptr) != 1)
    throw numeric_error("sha256: digest computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * digest_len);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(const std::string& text) { return sha256_hex(text.data(), text.size()); }

std::string sha256_file(const std::filesystem::path& file) {
  return sha256_hex(read_text_file(file));
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw io_error("write failed: " + file.string());
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string matrix_to_csv(const ComplexMatrix<double>& matrix) {
  std::string out = "i,j,re,im\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += format_double(matrix(i, j).real());
      out += ',';
      out += format_double(matrix(i, j).imag());
      out += '\n';
    }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double_field(const std::string& field, const char* context) {
  double value = 0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc{}) throw io_error(std::string("malformed number in ") + context);
  return value;
}

}  // namespace

ComplexMatrix<double> matrix_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line) || line != "i,j,re,im")
    throw io_error("matrix CSV: missing 'i,j,re,im' header");
  struct Entry {
    Eigen::Index i, j;
    std::complex<double> value;
  };
  std::vector<Entry> entries;
  Eigen::Index rows = 0, cols = 0;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw io_error("matrix CSV: expected 4 fields per row");
    Entry e;
    e.i = static_cast<Eigen::Index>(parse_double_field(fields[0], "matrix CSV"));
    e.j = static_cast<Eigen::Index>(parse_double_field(fields[1], "matrix CSV"));
    e.value = {parse_double_field(fields[2], "matrix CSV"), parse_double_field(fields[3], "matrix CSV")};
    rows = std::max(rows, e.i + 1);
    cols = std::max(cols, e.j + 1);
    entries.push_back(e);
  }
  if (entries.empty()) throw io_error("matrix CSV: no entries");
  ComplexMatrix<double> matrix = ComplexMatrix<double>::Zero(rows, cols);
  for (const auto& e : entries) matrix(e.i, e.j) = e.value;
  return matrix;
}

std::string geometry_to_csv(const ArrayGeometry<double>& geometry) {
  std::string out = "antenna,x,y\n";
  for (Eigen::Index k = 0; k < geometry.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(geometry.positions(k, 0));
    out += ',';
    out += format_double(geometry.positions(k, 1));
    out += '\n';
  }
  return out;
}

ArrayGeometry<double> geometry_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line) || line != "antenna,x,y")
    throw io_error("geometry CSV: missing 'antenna,x,y' header");
  std::vector<std::pair<double, double>> points;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw io_error("geometry CSV: expected 3 fields per row");
    points.emplace_back(parse_double_field(fields[1], "geometry CSV"),
                        parse_double_field(fields[2], "geometry CSV"));
  }
  ArrayGeometry<double> geometry;
  geometry.positions.resize(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t k = 0; k < points.size(); ++k) {
    geometry.positions(static_cast<Eigen::Index>(k), 0) = points[k].first;
    geometry.positions(static_cast<Eigen::Index>(k), 1) = points[k].second;
  }
  validate(geometry);
  return geometry;
}

std::string snapshots_to_csv(const SnapshotMatrix<double>& snapshots) {
  std::string out = "antenna,sample,re,im\n";
  for (Eigen::Index k = 0; k < snapshots.rows(); ++k)
    for (Eigen::Index n = 0; n < snapshots.cols(); ++n) {
      out += std::to_string(k);
      out += ',';
      out += std::to_string(n);
      out += ',';
      out += format_double(snapshots(k, n).real());
      out += ',';
      out += format_double(snapshots(k, n).imag());
      out += '\n';
    }
  return out;
}

std::string map_to_csv(const SkyMap<double>& map) {
  std::string out = "l\\m";
  for (Eigen::Index j = 0; j < map.grid.m_axis.size(); ++j) {
    out += ',';
    out += format_double(map.grid.m_axis(j));
  }
  out += '\n';
  for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
    out += format_double(map.grid.l_axis(i));
    for (Eigen::Index j = 0; j < map.values.cols(); ++j) {
      out += ',';
      const double v = map.values(i, j);
      out += std::isnan(v) ? "nan" : format_double(v);
    }
    out += '\n';
  }
  return out;
}

PgmImage map_to_pgm(const SkyMap<double>& map) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < map.values.cols(); ++j)
    for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
      const double v = map.values(i, j);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) throw domain_error("map_to_pgm: fully masked map");
  const double span = hi > lo ? hi - lo : 1.0;

  const Eigen::Index width = map.values.cols();
  const Eigen::Index height = map.values.rows();
  std::string pgm = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  pgm.reserve(pgm.size() + static_cast<std::size_t>(2 * width * height));
  for (Eigen::Index i = 0; i < height; ++i)
    for (Eigen::Index j = 0; j < width; ++j) {
      const double v = map.values(i, j);
      std::uint16_t level = 0;
      if (!std::isnan(v))
        level = static_cast<std::uint16_t>(std::lround((v - lo) / span * 65535.0));
      pgm.push_back(static_cast<char>(level >> 8));
      pgm.push_back(static_cast<char>(level & 0xFF));
    }

  nlohmann::json sidecar;
  sidecar["min_value"] = lo;
  sidecar["max_value"] = hi;
  sidecar["levels"] = 65535;
  sidecar["width"] = width;
  sidecar["height"] = height;
  sidecar["l_axis"] = {{"min", map.grid.l_axis(0)},
                       {"max", map.grid.l_axis(map.grid.l_axis.size() - 1)},
                       {"count", map.grid.l_axis.size()}};
  sidecar["m_axis"] = {{"min", map.grid.m_axis(0)},
                       {"max", map.grid.m_axis(map.grid.m_axis.size() - 1)},
                       {"count", map.grid.m_axis.size()}};
  sidecar["description"] = map.source_description;
  return {pgm, sidecar.dump(2) + "\n"};
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
  nlohmann::json j;
  j["tool"] = "rfiforge";
  j["version"] = "0.1.0";
  j["command"] = manifest.command;
  j["config_file"] = manifest.config_path;
  j["config_sha256"] = manifest.config_sha256;
  j["seed"] = manifest.seed;
  j["seed_source"] = manifest.seed_source;
  j["threads"] = manifest.threads;
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [name, digest] : manifest.outputs) {
    const auto file = out_dir / name;
    nlohmann::json entry;
    entry["path"] = name;
    entry["sha256"] = digest;
    entry["bytes"] = std::filesystem::file_size(file);
    outputs.push_back(entry);
  }
  j["outputs"] = outputs;
  j["timings_ms"] = manifest.timings_ms;
  if (!manifest.extra.empty()) j["extra"] = manifest.extra;
  write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void emit_file(const std::filesystem::path& out_dir, const std::string& name,
               const std::string& text, RunManifest& manifest) {
  write_text_file(out_dir / name, text);
  manifest.outputs.emplace_back(name, sha256_hex(text));
}

}  // namespace rfiforge
