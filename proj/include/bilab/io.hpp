#pragma once

// Serialisation. CSV is plain RFC 4180 with a '.' decimal separator and 17
// significant digits, preceded by one "# manifest_hash=..." comment line when
// a hash is supplied. JSON goes through nlohmann::json; object keys are
// sorted, so identical inputs give byte-identical files.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "bilab/evolution.hpp"
#include "bilab/grid.hpp"
#include "bilab/inequalities.hpp"
#include "bilab/params.hpp"

namespace bilab::io {

using Json = nlohmann::json;

/// "%.17g", with "inf"/"-inf"/"nan" spelled out.
std::string format_double(double v);

void write_field_csv(std::ostream& os, const RadialField& u, const std::string& hash = {});
/// Reads (r, re, im) rows and checks the radii against the grid nodes.
/// Throws std::invalid_argument on malformed rows or a grid mismatch.
RadialField read_field_csv(std::istream& is, GridPtr grid);
RadialField read_field_csv(const std::filesystem::path& path, GridPtr grid);

/// Columns t, mass, energy, h2norm, boundary_mass; h2norm is (‖v‖² + ‖Δv‖²)^{1/2}.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec, const std::string& hash = {});

/// One row per family member: kind, a, c, sigma, m, amplitude, ratio, scale_residual.
void write_sweep_csv(std::ostream& os, const RatioReport& rep, const std::string& hash = {});

/// Columns t, increment.
void write_increments_csv(std::ostream& os, const ScatteringReport& rep, const std::string& hash = {});

Json to_json(const Scalar& v);
Json to_json(const Extended& v);
Json to_json(const ModelParams& p);
Json to_json(const CriticalData& c);
Json to_json(const RegimeReport& r);
Json to_json(const ScatteringPairTriple& t);
Json to_json(const RadialGrid& g);
Json to_json(const TestFamily& f);
Json to_json(const RatioReport& r);
Json to_json(const StrichartzPair& p);
Json to_json(const StrichartzReport& r);
Json to_json(const PicardDiagnostics& d);
Json to_json(const GlobalBoundReport& r);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

/// Hash over command, version and the canonical dump of the configuration.
std::string manifest_hash(const std::string& command, const Json& config);

/// {"command", "config", "version", "manifest_hash", "outputs"}.
Json make_manifest(const std::string& command, const Json& config, const std::vector<std::string>& outputs);

/// Dumps with a two-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

/// Version string compiled into the library.
std::string version();

} // namespace bilab::io
