#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rfiforge/imaging.hpp"
#include "rfiforge/scenario.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

/// Shortest round-trip decimal form of a double ('.' separator, locale-free).
std::string format_double(double value);

/// SHA-256 as lowercase hex.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& file);

void write_text_file(const std::filesystem::path& file, const std::string& text);
std::string read_text_file(const std::filesystem::path& file);

/// Complex matrix in long form: header "i,j,re,im", one row per entry,
/// row-major.
std::string matrix_to_csv(const ComplexMatrix<double>& matrix);
ComplexMatrix<double> matrix_from_csv(const std::string& text);

/// Geometry as "antenna,x,y" rows, positions in wavelengths.
std::string geometry_to_csv(const ArrayGeometry<double>& geometry);
ArrayGeometry<double> geometry_from_csv(const std::string& text);

/// Snapshot matrix as "antenna,sample,re,im" rows.
std::string snapshots_to_csv(const SnapshotMatrix<double>& snapshots);

/// Map as a matrix block: header "l\m,<m values...>", one row per l value.
/// Masked points serialize as "nan".
std::string map_to_csv(const SkyMap<double>& map);

/// 16-bit binary PGM (min-max scaled; masked points map to 0) plus the JSON
/// sidecar text recording the scaling.
struct PgmImage {
  std::string pgm;
  std::string sidecar_json;
};
PgmImage map_to_pgm(const SkyMap<double>& map);

/// Run manifest: checksums for every emitted file plus provenance fields.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_sha256;
  std::uint64_t seed = 0;
  std::string seed_source;  // "config" | "env" | "flag"
  int threads = 1;
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> sha256
  std::map<std::string, double> timings_ms;
  std::map<std::string, std::string> extra;
};

/// Writes `manifest.json` into out_dir; every file in manifest.outputs must
/// already exist there.
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

/// Writes text to out_dir/name and records its checksum in the manifest.
void emit_file(const std::filesystem::path& out_dir, const std::string& name,
               const std::string& text, RunManifest& manifest);

}  // namespace rfiforge
