#pragma once

// Radial discretisation of R^N.
//
// Cell-centred nodes r_j = (j+1/2)h avoid the coordinate singularity at the
// origin. The flux-form Laplacian is self-adjoint under the quadrature
// weights w_j = σ_N r_j^{N-1} h, so its eigenvectors give an exactly unitary
// free propagator and a consistent functional calculus for |∇|^s and Δ².

#include <complex>
#include <memory>

#include <Eigen/Dense>

#include "bilab/params.hpp"

namespace bilab {

using Complex = std::complex<double>;

class RadialGrid {
public:
  /// Throws std::invalid_argument unless N >= 1, R > 0 and M >= 8.
  RadialGrid(int N, double R, int M);

  int dimension() const { return N_; }
  double radius() const { return R_; }
  int size() const { return M_; }
  double spacing() const { return h_; }
  /// σ_N = 2π^{N/2}/Γ(N/2)
  double sphere_area() const { return sphere_area_; }
  const Eigen::VectorXd& nodes() const { return r_; }
  const Eigen::VectorXd& weights() const { return w_; }

  bool same_as(const RadialGrid& other) const {
    return N_ == other.N_ && R_ == other.R_ && M_ == other.M_;
  }

private:
  int N_;
  double R_;
  int M_;
  double h_;
  double sphere_area_;
  Eigen::VectorXd r_;
  Eigen::VectorXd w_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr build_grid(int N, double R, int M);

/// Complex radial profile sampled at the nodes of a grid.
struct RadialField {
  GridPtr grid;
  Eigen::VectorXcd values;

  static RadialField zeros(GridPtr grid);

  template <class F>
  static RadialField sample(GridPtr grid, F&& profile) {
    RadialField u = zeros(grid);
    for (int j = 0; j < grid->size(); ++j) u.values[j] = profile(grid->nodes()[j]);
    return u;
  }

  int size() const { return static_cast<int>(values.size()); }
  bool finite() const;
};

RadialField operator*(Complex c, const RadialField& u);
RadialField operator+(const RadialField& a, const RadialField& b);
RadialField operator-(const RadialField& a, const RadialField& b);

/// Throws std::invalid_argument when the two fields live on different grids.
void require_same_grid(const RadialField& a, const RadialField& b, const char* where);

/// Weighted inner product Σ w_j conj(u_j) v_j.
Complex inner(const RadialField& u, const RadialField& v);

/// Lapack: eigenvectors as returned by the tridiagonal solver, orthonormal to
/// O(Mε). Refined: one extra O(M³) orthogonalisation pass, needed for long
/// time integrations (mass drift) but not for norms and ratios.
enum class BasisAccuracy { Lapack, Refined };

/// Eigendecomposition of the discrete radial -Δ.
///
/// The operator is (Lu)_j = -(ρ_{j+1/2}(u_{j+1}-u_j) - ρ_{j-1/2}(u_j-u_{j-1})) / (r_j^{N-1} h²)
/// with ρ = r^{N-1} at the faces, zero flux through r = 0 and an odd ghost
/// value u_M = -u_{M-1} so the field vanishes at r = R.
class SpectralLaplacian {
public:
  /// Throws NumericalError if LAPACK fails, quoting the symmetry residual.
  explicit SpectralLaplacian(GridPtr grid, BasisAccuracy accuracy = BasisAccuracy::Refined);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int size() const { return grid_->size(); }

  /// μ_0 <= μ_1 <= ... (1/length²)
  const Eigen::VectorXd& eigenvalues() const { return mu_; }

  /// Coefficients c_k = <φ_k, u>_w.
  Eigen::VectorXcd analysis(const RadialField& u) const;
  RadialField synthesis(const Eigen::VectorXcd& coefficients) const;

  /// φ_k, orthonormal in the weighted inner product.
  RadialField eigenvector(int k) const;

  /// L u by the three-point stencil (no eigenbasis involved).
  RadialField apply(const RadialField& u) const;

  /// max_j |w_j L_{j,j+1} - w_{j+1} L_{j+1,j}| relative to the largest entry of WL.
  double symmetry_residual() const { return symmetry_residual_; }

  /// Defect of Ψ^T Ψ = I for the stored (Euclidean) eigenvector matrix.
  double orthonormality_defect() const;

  /// Throws std::invalid_argument unless u lives on this operator's grid.
  void check_grid(const RadialField& u, const char* where) const;

private:
  void refine_basis();

  GridPtr grid_;
  Eigen::VectorXd lower_; // L_{j+1,j}
  Eigen::VectorXd diag_;
  Eigen::VectorXd upper_; // L_{j,j+1}
  Eigen::VectorXd sqrt_w_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd psi_; // columns: eigenvectors of W^{1/2} L W^{-1/2}
  double symmetry_residual_ = 0.0;
};

SpectralLaplacian build_laplacian(GridPtr grid, BasisAccuracy accuracy = BasisAccuracy::Refined);

/// |∇|^s u = synth(μ^{s/2} analysis(u)). Negative s requires μ_0 >= 1e-12.
RadialField fractional_apply(const SpectralLaplacian& op, double s, const RadialField& u);

/// (Σ w_j |u_j|^ρ)^{1/ρ}, ρ >= 1.
double lebesgue_norm(const RadialField& u, double rho);

/// Σ w_j r_j^b |u_j|^{1+q}; no sign, no 2/(1+q).
double weighted_source_integral(const RadialField& u, const ModelParams& params);

/// (Σ μ_k^s |c_k|²)^{1/2}
double sobolev_norm(const SpectralLaplacian& op, double s, const RadialField& u);

/// (‖u‖² + ‖|∇|^τ u‖²)^{1/2}; τ = 2 is the H² norm.
double h2_bracket_norm(const SpectralLaplacian& op, double tau, const RadialField& u);

double mass(const RadialField& u);

/// ‖Δu‖² + (2ε/(1+q)) ∫ |x|^b |u|^{1+q}
double energy(const SpectralLaplacian& op, const RadialField& u, const ModelParams& params);

/// Σ_{r_j > 0.9R} w_j |u_j|²
double boundary_mass(const RadialField& u);

struct RescaleResult {
  RadialField field;
  /// share of the rescaled profile's mass that would sit beyond r = R
  double outside_mass_fraction = 0.0;
  bool warning = false; ///< outside_mass_fraction > 1%
};

/// λ^{(4+b)/(q-1)} u(λ r), linearly interpolated onto the same grid.
RescaleResult rescale(const RadialField& u, double lambda, const ModelParams& params);

} // namespace bilab
