#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bilab/grid.hpp"
#include "support.hpp"

using namespace bilab;
using test::cached_op;
using test::GaussianMoments;
using test::rel_err;

namespace {

constexpr double pi = std::numbers::pi;

RadialField gaussian(const GridPtr& g, double a) {
  return RadialField::sample(g, [a](double r) { return Complex(std::exp(-a * r * r), 0.0); });
}

ModelParams P(int N, double b, double q, int eps = 1) {
  return ModelParams{N, Scalar::from_decimal_double(b), Scalar::from_decimal_double(q), eps};
}

double slope(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

} // namespace

TEST_CASE("build_grid rejects degenerate input") {
  CHECK_THROWS_AS(build_grid(5, 10, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0, 10, 100), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(5, -1, 100), std::invalid_argument);
}

TEST_CASE("cell-centred nodes and positive weights") {
  const auto g = build_grid(5, 10, 1000);
  const auto& r = g->nodes();
  CHECK(r[0] == doctest::Approx(0.005).epsilon(1e-14));
  for (int j = 1; j < g->size(); ++j) REQUIRE(r[j] > r[j - 1]);
  CHECK(r[g->size() - 1] < 10.0);
  CHECK(g->weights().minCoeff() > 0.0);
}

TEST_CASE("weights integrate the ball volume") {
  const auto g = build_grid(5, 10, 1000);
  CHECK(rel_err(g->weights().sum(), test::sphere_area(5) * 1e5 / 5) < 1e-3);
  const auto line = build_grid(1, 1, 256);
  CHECK(line->sphere_area() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rel_err(line->weights().sum(), 2.0) < 1e-12);
  for (int N : {2, 3, 6, 8}) {
    const auto gN = build_grid(N, 3, 256);
    CHECK(rel_err(gN->weights().sum(), test::sphere_area(N) * std::pow(3.0, N) / N) < 1e-3);
  }
}

TEST_CASE("N=1: lowest eigenvalue of the Neumann-Dirichlet interval") {
  const auto& op = cached_op(1, 1.0, 512);
  const double R = 1.0;
  for (int k = 0; k < 4; ++k) {
    const double exact = std::pow((k + 0.5) * pi / R, 2);
    CHECK(rel_err(op.eigenvalues()[k], exact) < 1e-2);
  }
}

TEST_CASE("spectral operator invariants") {
  const auto& op = cached_op(5, 12.0, 400);
  const auto g = op.grid_ptr();
  CHECK(op.eigenvalues().minCoeff() >= -1e-10);
  for (int k = 1; k < op.size(); ++k) REQUIRE(op.eigenvalues()[k] >= op.eigenvalues()[k - 1]);
  CHECK(op.orthonormality_defect() < 1e-10);
  CHECK(op.symmetry_residual() < 1e-12);

  for (int trial = 0; trial < 5; ++trial) {
    const RadialField u = test::random_field(g);
    const RadialField v = test::random_field(g);
    const double nu = test::l2(u), nv = test::l2(v);
    // round trip and Parseval
    CHECK(test::l2_diff(op.synthesis(op.analysis(u)), u) < 1e-10 * nu);
    CHECK(rel_err(op.analysis(u).squaredNorm(), mass(u)) < 1e-10);
    // self-adjointness of the stencil under the weights
    CHECK(std::abs(inner(op.apply(u), v) - inner(u, op.apply(v))) < 1e-9 * nu * nv);
    // spectral and stencil forms agree
    const RadialField spectral = op.synthesis(op.eigenvalues().cast<Complex>().cwiseProduct(op.analysis(u)));
    CHECK(test::l2_diff(op.apply(u), spectral) < 1e-9 * test::l2(op.apply(u)));
    // positive semidefinite
    CHECK(inner(op.apply(u), u).real() >= -1e-10);
  }
}

TEST_CASE("Laplacian of a constant vanishes in the interior") {
  const auto& op = cached_op(5, 12.0, 400);
  const RadialField one = RadialField::sample(op.grid_ptr(), [](double) { return Complex(1.0, 0.0); });
  const RadialField Lu = op.apply(one);
  for (int j = 0; j < Lu.size(); ++j)
    if (op.grid().nodes()[j] < 6.0) REQUIRE(std::abs(Lu.values[j]) < 1e-8);
}

TEST_CASE("fractional powers") {
  const auto& op = cached_op(5, 12.0, 400);
  const RadialField u = test::random_smooth_field(op.grid_ptr());
  const double nu = test::l2(u);
  CHECK(test::l2_diff(fractional_apply(op, 0.0, u), u) < 1e-12 * nu);
  const RadialField Lu = op.apply(u);
  CHECK(test::l2_diff(fractional_apply(op, 2.0, u), Lu) < 1e-9 * test::l2(Lu));
  for (auto [s1, s2] : {std::pair{0.5, 0.75}, {1.0, 1.0}, {0.3, 1.7}, {-0.5, 1.5}}) {
    const RadialField two = fractional_apply(op, s1, fractional_apply(op, s2, u));
    const RadialField one = fractional_apply(op, s1 + s2, u);
    CHECK(test::l2_diff(two, one) < 1e-9 * test::l2(one));
  }
  for (int k : {0, 7, 100}) {
    const RadialField phi = op.eigenvector(k);
    const RadialField want = std::pow(op.eigenvalues()[k], 0.75) * phi;
    CHECK(test::l2_diff(fractional_apply(op, 1.5, phi), want) < 1e-9 * test::l2(want));
  }
}

TEST_CASE("negative powers need a positive spectrum") {
  // μ_0 ~ (π/2R)² is below 1e-12 for a huge radius
  const auto& op = cached_op(1, 1e7, 16);
  REQUIRE(op.eigenvalues()[0] < 1e-12);
  const RadialField u = RadialField::sample(op.grid_ptr(), [](double) { return Complex(1.0, 0.0); });
  CHECK_THROWS_AS(fractional_apply(op, -1.0, u), std::domain_error);
  CHECK_NOTHROW(fractional_apply(op, 1.0, u));
}

TEST_CASE("Gaussian closed forms, N=5, M=2000, R=12") {
  const auto& op = cached_op(5, 12.0, 2000, BasisAccuracy::Lapack);
  const RadialField u = gaussian(op.grid_ptr(), 0.5);
  const GaussianMoments m{5, 0.5};
  // oracle against the hand constants
  CHECK(m.mass() == doctest::Approx(std::pow(pi, 2.5)).epsilon(1e-14));
  CHECK(m.grad2() == doctest::Approx(2.5 * std::pow(pi, 2.5)).epsilon(1e-14));
  CHECK(m.lap2() == doctest::Approx(8.75 * std::pow(pi, 2.5)).epsilon(1e-14));
  CHECK(m.source(1, 3) == doctest::Approx(pi * pi / 3).epsilon(1e-14));

  CHECK(rel_err(std::pow(lebesgue_norm(u, 2.0), 2), m.mass()) < 1e-6);
  CHECK(rel_err(mass(u), 17.4934) < 1e-5);
  CHECK(rel_err(weighted_source_integral(u, P(5, 1, 3)), m.source(1, 3)) < 1e-4);
  CHECK(rel_err(std::pow(sobolev_norm(op, 1.0, u), 2), m.grad2()) < 1e-4);
  CHECK(rel_err(std::pow(sobolev_norm(op, 2.0, u), 2), m.lap2()) < 1e-4);
  CHECK(std::abs(sobolev_norm(op, 0.0, u) - lebesgue_norm(u, 2.0)) < 1e-12 * lebesgue_norm(u, 2.0));
  CHECK(rel_err(h2_bracket_norm(op, 2.0, u), std::sqrt(39.0 / 4) * std::pow(pi, 1.25)) < 1e-4);
  CHECK(h2_bracket_norm(op, 2.0, u) == doctest::Approx(13.06).epsilon(1e-3));

  // energy: ‖Δu‖² ± (2/(1+q)) ∫ r^b |u|^{1+q}
  CHECK(rel_err(energy(op, u, P(5, 1, 3, 1)), m.lap2() + 0.5 * m.source(1, 3)) < 1e-4);
  CHECK(rel_err(energy(op, u, P(5, 1, 3, -1)), m.lap2() - 0.5 * m.source(1, 3)) < 1e-4);
  CHECK(energy(op, u, P(5, 1, 3, 1)) == doctest::Approx(154.72).epsilon(1e-4));
  CHECK(energy(op, u, P(5, 1, 3, -1)) == doctest::Approx(151.43).epsilon(1e-4));

  const RadialField zero = RadialField::zeros(op.grid_ptr());
  CHECK(mass(zero) == 0.0);
  CHECK(energy(op, zero, P(5, 1, 3)) == 0.0);
  CHECK(weighted_source_integral(zero, P(5, 1, 3)) == 0.0);
}

TEST_CASE("quadrature consistency in N = 6 and 8") {
  for (int N : {6, 8}) {
    const auto& op = cached_op(N, 12.0, 2000, BasisAccuracy::Lapack);
    const RadialField u = gaussian(op.grid_ptr(), 0.5);
    const GaussianMoments m{N, 0.5};
    CAPTURE(N);
    CHECK(rel_err(mass(u), m.mass()) < 1e-4);
    CHECK(rel_err(std::pow(sobolev_norm(op, 1.0, u), 2), m.grad2()) < 1e-4);
    CHECK(rel_err(std::pow(sobolev_norm(op, 2.0, u), 2), m.lap2()) < 1e-4);
    CHECK(rel_err(weighted_source_integral(u, P(N, 1, 3)), m.source(1, 3)) < 1e-4);
  }
}

TEST_CASE("second-order convergence of ‖Δu‖² under grid refinement") {
  const GaussianMoments m{5, 0.5};
  std::vector<double> errors;
  for (int M : {250, 500, 1000, 2000}) {
    const auto& op = cached_op(5, 12.0, M, BasisAccuracy::Lapack);
    errors.push_back(std::abs(std::pow(sobolev_norm(op, 2.0, gaussian(op.grid_ptr(), 0.5)), 2) - m.lap2()));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    CAPTURE(i);
    CHECK(slope(errors[i - 1], errors[i]) == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("boundary mass counts only r > 0.9R") {
  const auto g = build_grid(3, 10.0, 100);
  const RadialField u = RadialField::sample(g, [](double r) { return Complex(r > 9.0 ? 1.0 : 0.0, 0.0); });
  CHECK(rel_err(boundary_mass(u), mass(u)) < 1e-14);
  CHECK(boundary_mass(gaussian(g, 1.0)) < 1e-30);
}

TEST_CASE("rescale") {
  const auto& op = cached_op(6, 12.0, 2000, BasisAccuracy::Lapack);
  const RadialField u = gaussian(op.grid_ptr(), 0.5);
  const auto p = P(6, 1, 3); // s_c = 1/2
  const double s_c = critical_data(p).s_c.value();
  CHECK(test::l2_diff(rescale(u, 1.0, p).field, u) < 1e-14 * test::l2(u));
  for (double lambda : {0.5, 0.7, 1.3, 2.0}) {
    CAPTURE(lambda);
    const auto res = rescale(u, lambda, p);
    CHECK_FALSE(res.warning);
    CHECK(rel_err(sobolev_norm(op, s_c, res.field), sobolev_norm(op, s_c, u)) < 1e-3);
    const double alpha = (4.0 + 1.0) / (3.0 - 1.0);
    CHECK(rel_err(test::l2(res.field), std::pow(lambda, alpha - 3.0) * test::l2(u)) < 1e-3);
  }
  // a wide profile squeezed out of the domain raises the warning
  const RadialField wide = gaussian(op.grid_ptr(), 0.02);
  CHECK(rescale(wide, 0.25, p).warning);
  CHECK_THROWS_AS(rescale(u, 0.0, p), std::invalid_argument);
}

TEST_CASE("fields on different grids do not mix") {
  const auto& op = cached_op(5, 12.0, 400);
  const RadialField other = RadialField::zeros(build_grid(5, 12.0, 401));
  CHECK_THROWS_AS(op.analysis(other), std::invalid_argument);
  CHECK_THROWS_AS(other - RadialField::zeros(op.grid_ptr()), std::invalid_argument);
}
