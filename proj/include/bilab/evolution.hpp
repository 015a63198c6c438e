#pragma once

// Time dynamics of i v_t + Δ²v = -ε|x|^b|v|^{q-1}v on a radial grid.
//
// Two solvers that share nothing but the free propagator:
//   * Strang splitting, phase(dt/2) ∘ free(dt) ∘ phase(dt/2), both substeps exact;
//   * Picard iteration of the Duhamel map
//       Ϝ(v)(t) = e^{itΔ²}v0 + iε ∫_0^t e^{i(t-τ)Δ²} |x|^b |v|^{q-1} v(τ) dτ
//     with trapezoidal τ-quadrature on uniform samples.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bilab/grid.hpp"
#include "bilab/inequalities.hpp"
#include "bilab/params.hpp"

namespace bilab {

/// e^{itΔ²}u: coefficients multiplied by e^{itμ_k²}.
RadialField free_propagate(const SpectralLaplacian& op, const RadialField& u, double t);

/// Exact solution of i v_t = -ε|x|^b|v|^{q-1}v over dt: pointwise phase rotation.
RadialField nonlinear_phase(const RadialField& u, double dt, const ModelParams& params);

RadialField strang_step(const SpectralLaplacian& op, const RadialField& u, double dt, const ModelParams& params);

struct EvolutionConfig {
  ModelParams params;
  double R = 12.0;
  int M = 256;
  std::variant<TestFamily, RadialField> initial = TestFamily::gaussian(0.5);
  double dt = 1e-3;
  double T = 1.0;
  int stride = 1;
  /// ceiling on ‖⟨Δ⟩v‖ = (‖v‖² + ‖Δv‖²)^{1/2}
  double threshold = 1e6;
  bool nonlinear = true;
  bool store_snapshots = false;
  /// integration stops once boundary_mass exceeds this share of the mass
  double boundary_halt_fraction = 1e-4;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

enum class HaltReason { None, Threshold, BoundaryMass };
std::string to_string(HaltReason reason);

/// Results are considered unreliable once boundary mass exceeds this share of the mass.
inline constexpr double kBoundaryReliability = 1e-6;

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<double> laplacian_norm; ///< ‖Δv(t)‖
  std::vector<double> h2_norm;        ///< (‖v‖² + ‖Δv‖²)^{1/2}
  std::vector<double> boundary_mass;
  std::vector<RadialField> snapshots; ///< aligned with times when requested
  RadialField final_state;            ///< field at the last sample

  bool blowup_flag = false;
  std::optional<double> blowup_time;
  HaltReason halt = HaltReason::None;
  /// boundary mass went above kBoundaryReliability · mass at some sample
  bool unreliable = false;
  int steps = 0;
  double dt = 0.0;

  double max_mass_drift() const;   ///< max_i |M(t_i) - M(0)| / M(0)
  double max_energy_drift() const; ///< max_i |E(t_i) - E(0)| / |E(0)|
};

/// Throws NumericalError when the field stops being finite.
TrajectoryRecord evolve(const SpectralLaplacian& op, const EvolutionConfig& config);
/// Builds the grid and the eigendecomposition first.
TrajectoryRecord evolve(const EvolutionConfig& config);

RadialField initial_field(const EvolutionConfig& config, GridPtr grid);

/// Fields at uniform times t_n = n T / n_t, n = 0..n_t.
struct Trajectory {
  std::vector<double> times;
  std::vector<RadialField> fields;

  int intervals() const { return static_cast<int>(times.size()) - 1; }
};

Trajectory uniform_times(double T, int n_t);
Trajectory free_trajectory(const SpectralLaplacian& op, const RadialField& v0, double T, int n_t);

/// Ϝ(v) sampled on the same times. Throws std::invalid_argument unless v
/// holds n_t+1 samples on uniform times in [0, T].
Trajectory duhamel_apply(const SpectralLaplacian& op, const Trajectory& v, const RadialField& v0, double T,
                         int n_t, const ModelParams& params);

/// (‖ ‖u(t)‖_{L^r} ‖_{L^p(0,T)}), time integral by trapezoid, p = inf as a max.
double spacetime_norm(const Trajectory& v, const Extended& p, double r);

/// L^∞_t L²_x distance between two trajectories at matched times.
double sup_l2_distance(const Trajectory& a, const Trajectory& b);

struct StrichartzPair {
  Extended p;
  Scalar r;
};

/// {(∞, 2)} plus two interior 0-admissible pairs with 4/p = U/3 and 2U/3,
/// U = 2 for N >= 5 and N/2 otherwise.
std::vector<StrichartzPair> picard_pairs(int N);

/// Two interior s-admissible pairs, r at 1/3 and 2/3 of the window (or at
/// 2 and 4 times its lower end when the window is unbounded). Throws
/// HypothesisError unless 0 <= s < 2 and the window is non-empty.
std::vector<StrichartzPair> interior_pairs(int N, const Scalar& s);

/// ‖v‖_{L^p L^r} / ‖e^{itΔ²}v0‖_{L^p L^r} per pair, both on the record's snapshot times.
std::vector<double> strichartz_echo(const SpectralLaplacian& op, const TrajectoryRecord& record,
                                    const std::vector<StrichartzPair>& pairs);

struct PicardDiagnostics {
  std::vector<double> distances; ///< d_n = dist(v_{n+1}, v_n)
  std::vector<double> ratios;    ///< d_{n+1} / d_n
  std::vector<StrichartzPair> pairs;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double tol = 0.0;
  std::optional<double> mismatch; ///< vs a split-step reference, when one was compared
  std::string message;
};

struct PicardResult {
  Trajectory trajectory;
  PicardDiagnostics diagnostics;
};

/// v_{n+1} = Ϝ(v_n) from the free flow. Stops when d_n < tol, after
/// max_iter iterations, or when d_n has grown three times in a row.
PicardResult picard_solve(const SpectralLaplacian& op, const RadialField& v0, double T, const ModelParams& params,
                          int n_t, double tol, int max_iter);

struct StrichartzReport {
  double s = 0.0;
  std::vector<StrichartzPair> pairs;
  std::vector<double> ratios; ///< ‖e^{itΔ²}v0‖_{L^p L^r} / ‖v0‖_{Ḣ^s}, one per pair
  double max_ratio = 0.0;
  double T = 0.0;
  int n_t = 0;
};

/// Throws HypothesisError for a pair that is not s-admissible.
StrichartzReport strichartz_ratio(const SpectralLaplacian& op, const RadialField& v0, double s,
                                  const std::vector<StrichartzPair>& pairs, double T, int n_t);

struct GlobalBoundReport {
  double gn_constant = 0.0; ///< empirical GN constant used
  double D = 0.0;
  bool subcritical = false; ///< D < 2, equivalently q < q_m
  double initial_energy = 0.0;
  std::vector<double> times;
  /// E(v0) - ‖Δv‖²(1 - (2/(1+q)) Ĉ ‖v‖^{1+q-D} ‖Δv‖^{D-2}); non-negative whenever Ĉ bounds the ratio
  std::vector<double> slack;
  int violations = 0;
  std::optional<double> ceiling; ///< implied bound on ‖Δv‖ (D < 2, or D = 2 with small mass)
  double max_laplacian_norm = 0.0;
  bool below_ceiling = true;
};

/// Focusing runs only (HypothesisError otherwise). `gn_constant` must come
/// from a Gagliardo-Nirenberg sweep; a missing or non-positive value throws.
GlobalBoundReport global_bound_check(const TrajectoryRecord& record, const ModelParams& params,
                                     std::optional<double> gn_constant);

/// w(t_i) = e^{-it_iΔ²} v(t_i) for every stored snapshot.
std::vector<RadialField> scattering_profile(const SpectralLaplacian& op, const TrajectoryRecord& record);

struct ScatteringReport {
  std::vector<double> times;      ///< t_i for i = 0..n-2
  std::vector<double> increments; ///< ‖w(t_{i+1}) - w(t_i)‖_{H²}
  std::size_t final_third_start = 0;
  bool nonincreasing_final_third = false;
  RadialField profile;            ///< w at the last snapshot
  double profile_h2_norm = 0.0;
};

/// Throws std::invalid_argument with fewer than 3 snapshots.
ScatteringReport scattering_cauchy_check(const SpectralLaplacian& op, const TrajectoryRecord& record);

} // namespace bilab
