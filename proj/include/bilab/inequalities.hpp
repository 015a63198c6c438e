#pragma once

// Empirical checks of the functional inequalities behind the local and
// global theory. Every inequality is recast as a ratio lhs/rhs that must stay
// bounded over test profiles and be invariant under the scaling family.
// Sweep maxima are lower bounds on the sharp constants, nothing more.

#include <optional>
#include <string>
#include <vector>

#include "bilab/grid.hpp"
#include "bilab/params.hpp"

namespace bilab {

/// Deterministic radial probe profiles.
struct TestFamily {
  enum class Kind { Gaussian, RingBump, PolyGaussian };

  Kind kind = Kind::Gaussian;
  double a = 0.5;     ///< Gaussian / PolyGaussian decay rate
  double c = 0.0;     ///< RingBump centre
  double sigma = 1.0; ///< RingBump width
  int m = 0;          ///< PolyGaussian power
  double amplitude = 1.0;

  /// e^{-a r²}
  static TestFamily gaussian(double a, double amplitude = 1.0);
  /// e^{-(r-c)²/(2σ²)}
  static TestFamily ring_bump(double c, double sigma, double amplitude = 1.0);
  /// r^m e^{-a r²}
  static TestFamily poly_gaussian(int m, double a, double amplitude = 1.0);

  /// Throws std::invalid_argument for a <= 0, c <= 0, σ <= 0 or m < 0.
  void validate() const;
  RadialField generate(GridPtr grid) const;
  std::string describe() const;
};

std::string to_string(TestFamily::Kind kind);

enum class InequalityTag { Strauss, FractionalStrauss, Hardy, GagliardoNirenberg, Interpolation };

std::string to_string(InequalityTag tag);
/// "strauss", "fractional-strauss", "hardy", "gn", "interpolation"
InequalityTag parse_inequality_tag(const std::string& name);

/// sup_j r_j^{(N-2s)/2}|u_j| / (‖u‖^{1-s} ‖∇u‖^s), 1/2 <= s < 1.
double strauss_ratio(const SpectralLaplacian& op, const RadialField& u, double s);

/// sup_j r_j^{(N-2s)/2}|u_j| / ‖|∇|^s u‖, 1/2 < s < N/2.
double fractional_strauss_ratio(const SpectralLaplacian& op, const RadialField& u, double s);

/// ‖r^{-s}u‖_ρ / ‖|∇|^s u‖_ρ, 1 < ρ < ∞, 0 < s < N/ρ.
double hardy_ratio(const SpectralLaplacian& op, const RadialField& u, double s, double rho);

/// ∫|u|^{1+q}|x|^b / (‖u‖^{1+q-D} ‖Δu‖^D), 1 + 2b/(N-1) < q < q^e.
double gn_ratio(const SpectralLaplacian& op, const RadialField& u, const ModelParams& params);

/// ‖∇u‖_ρ² / (‖u‖_ρ ‖Δu‖_ρ), ρ >= 1.
double interpolation_ratio(const SpectralLaplacian& op, const RadialField& u, double rho);

/// ∂_r u by centred differences, closed by the even reflection at r = 0 and
/// the odd ghost value at r = R used by the Laplacian.
RadialField radial_derivative(const RadialField& u);

/// Exponent argument of a sweep: s for the Strauss/Hardy ratios, ρ for
/// Hardy/interpolation, model parameters for Gagliardo-Nirenberg.
struct RatioArgs {
  double s = 0.5;
  double rho = 2.0;
  std::optional<ModelParams> params;
};

/// Checks the hypothesis of `tag` for the grid dimension; throws HypothesisError.
void check_ratio_hypothesis(InequalityTag tag, int N, const RatioArgs& args);

double evaluate_ratio(const SpectralLaplacian& op, InequalityTag tag, const RadialField& u, const RatioArgs& args);

struct RatioSample {
  TestFamily member;
  double ratio = 0.0;
  /// max over λ in {1/2, 2} of |ratio(rescale(u,λ)) - ratio(u)| / ratio(u)
  double scale_residual = 0.0;
};

struct RatioReport {
  InequalityTag tag = InequalityTag::Strauss;
  std::string family;
  RatioArgs args;
  std::vector<RatioSample> samples;
  double max_ratio = 0.0;
  double scale_invariance_residual = 0.0;
};

/// Evaluates the ratio on every member plus its λ = 1/2 and λ = 2 rescalings.
/// Throws std::invalid_argument for an empty family list; member errors are
/// rethrown with the member named.
RatioReport sweep(const SpectralLaplacian& op, InequalityTag tag, const std::vector<TestFamily>& families,
                  const RatioArgs& args);

/// Fixed lattice: Gaussians a in [1, 4], ring bumps and poly-Gaussians
/// sized so every member decays well inside radius R.
std::vector<TestFamily> default_families(double R, int gaussians = 20, int rings = 16, int polys = 16);

/// `count` Gaussians with a geometrically spaced on [a_min, a_max].
std::vector<TestFamily> gaussian_lattice(double a_min, double a_max, int count);

} // namespace bilab
