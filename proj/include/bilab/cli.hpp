#pragma once

// Command-line front end. Quick classifier and inequality queries take
// flags; simulations take a JSON configuration. Every command that writes
// files also writes manifest.json holding the normalised configuration, the
// code version and a SHA-256 hash that is repeated in each output file.
//
// Exit codes: 0 success (a flagged blow-up included), 2 malformed input,
// 3 hypothesis violation, 4 numerical abort.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bilab/evolution.hpp"
#include "bilab/io.hpp"

namespace bilab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitHypothesis = 3;
inline constexpr int kExitNumerical = 4;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

using io::Json;

// Configuration parsing. Unknown keys and ill-typed values throw
// std::invalid_argument naming the offending path.

ModelParams parse_params(const Json& j);
TestFamily parse_family(const Json& j);
/// {"R", "M"} plus an optional "N" that must agree with `N`.
void parse_grid(const Json& j, int N, double& R, int& M);

struct SimulateConfig {
  EvolutionConfig evolution;
  std::string initial_file; ///< absolute path when the initial data came from a file
  std::optional<double> gn_constant;
};

struct PicardConfig {
  ModelParams params;
  double R = 0.0;
  int M = 0;
  std::variant<TestFamily, RadialField> initial = TestFamily::gaussian(0.5);
  std::string initial_file;
  double T = 0.1;
  int n_t = 100;
  double tol = 1e-12;
  int max_iter = 50;
  std::optional<double> reference_dt; ///< split-step step for the mismatch; T/n_t by default
};

struct StrichartzConfig {
  int N = 0;
  double R = 0.0;
  int M = 0;
  double s = 0.0;
  std::vector<StrichartzPair> pairs;
  std::vector<TestFamily> data;
  double T = 1.0;
  int n_t = 100;
};

struct InequalityConfig {
  InequalityTag tag = InequalityTag::Strauss;
  int N = 5;
  double R = 12.0;
  int M = 2000;
  RatioArgs args;
  std::vector<TestFamily> families; ///< empty: the default lattice
};

/// `base` resolves a relative "initial": {"file": ...}.
SimulateConfig parse_simulate(const Json& j, const std::filesystem::path& base, bool allow_gn = true);
PicardConfig parse_picard(const Json& j, const std::filesystem::path& base);
StrichartzConfig parse_strichartz(const Json& j);
/// Optional "params" (GN only), "N", "s", "rho", "grid", "families".
InequalityConfig parse_inequality(InequalityTag tag, const Json& j);

// Normalised forms: every default filled in, file paths absolute. Parsing a
// normalised form yields the same normalised form.
Json to_json(const SimulateConfig& c);
Json to_json(const PicardConfig& c);
Json to_json(const StrichartzConfig& c);
Json to_json(const InequalityConfig& c);

// Commands. Each returns the summary printed on stdout; those with an output
// directory also write their files and manifest there.

Json cmd_regimes(const ModelParams& params, bool small_mass, std::ostream& text);
Json cmd_inequality(const InequalityConfig& config, const std::filesystem::path* out_dir);
Json cmd_simulate(const SimulateConfig& config, const std::filesystem::path& out_dir);
/// Throws NumericalError after writing the diagnostics if the iteration diverged.
Json cmd_picard(const PicardConfig& config, const std::filesystem::path& out_dir);
Json cmd_strichartz(const StrichartzConfig& config, const std::filesystem::path& out_dir);
Json cmd_scatter(const SimulateConfig& config, const std::filesystem::path& out_dir);

} // namespace bilab::cli
