#include "bilab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bilab/errors.hpp"

namespace bilab {

namespace {

void require_nonzero(const RadialField& u, const char* where) {
  if (u.values.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument(std::string(where) + ": zero field");
}

double weighted_sup(const RadialField& u, double power) {
  const auto& r = u.grid->nodes();
  double best = 0.0;
  for (int j = 0; j < u.size(); ++j) best = std::max(best, std::pow(r[j], power) * std::abs(u.values[j]));
  return best;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// The ratios are homogeneous of degree zero, so the amplitude exponent of
// the rescale is irrelevant except for Gagliardo-Nirenberg, where it must be
// the model's own.
ModelParams scaling_params(int N, const RatioArgs& args) {
  if (args.params) return *args.params;
  return ModelParams{N, Scalar(0), Scalar(3), 1};
}

} // namespace

TestFamily TestFamily::gaussian(double a, double amplitude) {
  TestFamily f;
  f.kind = Kind::Gaussian;
  f.a = a;
  f.amplitude = amplitude;
  return f;
}

TestFamily TestFamily::ring_bump(double c, double sigma, double amplitude) {
  TestFamily f;
  f.kind = Kind::RingBump;
  f.c = c;
  f.sigma = sigma;
  f.amplitude = amplitude;
  return f;
}

TestFamily TestFamily::poly_gaussian(int m, double a, double amplitude) {
  TestFamily f;
  f.kind = Kind::PolyGaussian;
  f.m = m;
  f.a = a;
  f.amplitude = amplitude;
  return f;
}

void TestFamily::validate() const {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("TestFamily: amplitude must be finite");
  switch (kind) {
  case Kind::Gaussian:
    if (!(a > 0.0)) throw std::invalid_argument("Gaussian: a must be > 0");
    break;
  case Kind::RingBump:
    if (!(c > 0.0)) throw std::invalid_argument("RingBump: centre c must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("RingBump: width sigma must be > 0");
    break;
  case Kind::PolyGaussian:
    if (m < 0) throw std::invalid_argument("PolyGaussian: m must be >= 0");
    if (!(a > 0.0)) throw std::invalid_argument("PolyGaussian: a must be > 0");
    break;
  }
}

RadialField TestFamily::generate(GridPtr grid) const {
  validate();
  return RadialField::sample(std::move(grid), [this](double r) -> Complex {
    switch (kind) {
    case Kind::Gaussian: return amplitude * std::exp(-a * r * r);
    case Kind::RingBump: return amplitude * std::exp(-(r - c) * (r - c) / (2.0 * sigma * sigma));
    case Kind::PolyGaussian: return amplitude * std::pow(r, m) * std::exp(-a * r * r);
    }
    return 0.0;
  });
}

std::string TestFamily::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(";
  switch (kind) {
  case Kind::Gaussian: os << "a=" << fmt(a); break;
  case Kind::RingBump: os << "c=" << fmt(c) << ", sigma=" << fmt(sigma); break;
  case Kind::PolyGaussian: os << "m=" << m << ", a=" << fmt(a); break;
  }
  if (amplitude != 1.0) os << ", amplitude=" << fmt(amplitude);
  os << ")";
  return os.str();
}

std::string to_string(TestFamily::Kind kind) {
  switch (kind) {
  case TestFamily::Kind::Gaussian: return "Gaussian";
  case TestFamily::Kind::RingBump: return "RingBump";
  case TestFamily::Kind::PolyGaussian: return "PolyGaussian";
  }
  return "?";
}

std::string to_string(InequalityTag tag) {
  switch (tag) {
  case InequalityTag::Strauss: return "strauss";
  case InequalityTag::FractionalStrauss: return "fractional-strauss";
  case InequalityTag::Hardy: return "hardy";
  case InequalityTag::GagliardoNirenberg: return "gn";
  case InequalityTag::Interpolation: return "interpolation";
  }
  return "?";
}

InequalityTag parse_inequality_tag(const std::string& name) {
  for (auto tag : {InequalityTag::Strauss, InequalityTag::FractionalStrauss, InequalityTag::Hardy,
                   InequalityTag::GagliardoNirenberg, InequalityTag::Interpolation})
    if (to_string(tag) == name) return tag;
  throw std::invalid_argument("unknown inequality '" + name +
                              "' (expected strauss, fractional-strauss, hardy, gn, interpolation)");
}

void check_ratio_hypothesis(InequalityTag tag, int N, const RatioArgs& args) {
  const double s = args.s;
  const double rho = args.rho;
  switch (tag) {
  case InequalityTag::Strauss:
    if (!(s >= 0.5 && s < 1.0))
      throw HypothesisError("strauss: needs 1/2 <= s < 1, got s=" + fmt(s));
    break;
  case InequalityTag::FractionalStrauss:
    if (!(s > 0.5 && s < 0.5 * N))
      throw HypothesisError("fractional-strauss: needs 1/2 < s < N/2 = " + fmt(0.5 * N) + ", got s=" + fmt(s));
    break;
  case InequalityTag::Hardy:
    if (!(rho > 1.0 && std::isfinite(rho)))
      throw HypothesisError("hardy: needs 1 < rho < inf, got rho=" + fmt(rho));
    if (!(s > 0.0 && s < N / rho))
      throw HypothesisError("hardy: needs 0 < s < N/rho = " + fmt(N / rho) + ", got s=" + fmt(s));
    break;
  case InequalityTag::Interpolation:
    if (!(rho >= 1.0 && std::isfinite(rho)))
      throw HypothesisError("interpolation: needs 1 <= rho < inf, got rho=" + fmt(rho));
    break;
  case InequalityTag::GagliardoNirenberg: {
    if (!args.params) throw HypothesisError("gn: model parameters (b, q) are required");
    const ModelParams& p = *args.params;
    p.validate();
    if (p.N != N) throw std::invalid_argument("gn: parameter dimension differs from the grid dimension");
    if (N < 2) throw HypothesisError("gn: needs N >= 2 for the bound 1+2b/(N-1)");
    const Scalar lower = Scalar(1) + Scalar(2) * p.b / Scalar(N - 1);
    if (!(p.q > lower))
      throw HypothesisError("gn: violates q > 1+2b/(N-1) = " + lower.str() + " (q=" + p.q.str() + ")");
    const Extended qe = critical_exponent(N, p.b, Scalar(2));
    if (!(Extended(p.q) < qe))
      throw HypothesisError("gn: violates q < q^e = " + qe.str() + " (q=" + p.q.str() + ")");
    break;
  }
  }
}

double strauss_ratio(const SpectralLaplacian& op, const RadialField& u, double s) {
  const int N = op.grid().dimension();
  check_ratio_hypothesis(InequalityTag::Strauss, N, RatioArgs{s, 2.0, std::nullopt});
  require_nonzero(u, "strauss_ratio");
  const double top = weighted_sup(u, 0.5 * (N - 2.0 * s));
  const double l2 = std::sqrt(mass(u));
  const double grad = sobolev_norm(op, 1.0, u);
  return top / (std::pow(l2, 1.0 - s) * std::pow(grad, s));
}

double fractional_strauss_ratio(const SpectralLaplacian& op, const RadialField& u, double s) {
  const int N = op.grid().dimension();
  check_ratio_hypothesis(InequalityTag::FractionalStrauss, N, RatioArgs{s, 2.0, std::nullopt});
  require_nonzero(u, "fractional_strauss_ratio");
  return weighted_sup(u, 0.5 * (N - 2.0 * s)) / sobolev_norm(op, s, u);
}

double hardy_ratio(const SpectralLaplacian& op, const RadialField& u, double s, double rho) {
  const int N = op.grid().dimension();
  check_ratio_hypothesis(InequalityTag::Hardy, N, RatioArgs{s, rho, std::nullopt});
  RadialField weighted = u;
  const auto& r = u.grid->nodes();
  for (int j = 0; j < u.size(); ++j) weighted.values[j] *= std::pow(r[j], -s);
  const double den = lebesgue_norm(fractional_apply(op, s, u), rho);
  if (den == 0.0) throw std::invalid_argument("hardy_ratio: zero denominator");
  return lebesgue_norm(weighted, rho) / den;
}

double gn_ratio(const SpectralLaplacian& op, const RadialField& u, const ModelParams& params) {
  check_ratio_hypothesis(InequalityTag::GagliardoNirenberg, op.grid().dimension(), RatioArgs{0.5, 2.0, params});
  require_nonzero(u, "gn_ratio");
  const double D = critical_data(params).D.value();
  const double q = params.q.value();
  const double l2 = std::sqrt(mass(u));
  const double lap = sobolev_norm(op, 2.0, u);
  return weighted_source_integral(u, params) / (std::pow(l2, 1.0 + q - D) * std::pow(lap, D));
}

RadialField radial_derivative(const RadialField& u) {
  const int M = u.size();
  const double h = u.grid->spacing();
  RadialField du = RadialField::zeros(u.grid);
  for (int j = 0; j < M; ++j) {
    const Complex left = j == 0 ? u.values[0] : u.values[j - 1];
    const Complex right = j == M - 1 ? -u.values[M - 1] : u.values[j + 1];
    du.values[j] = (right - left) / (2.0 * h);
  }
  return du;
}

double interpolation_ratio(const SpectralLaplacian& op, const RadialField& u, double rho) {
  check_ratio_hypothesis(InequalityTag::Interpolation, op.grid().dimension(), RatioArgs{0.5, rho, std::nullopt});
  const double grad = lebesgue_norm(radial_derivative(u), rho);
  const double den = lebesgue_norm(u, rho) * lebesgue_norm(op.apply(u), rho);
  if (den == 0.0) throw std::invalid_argument("interpolation_ratio: zero denominator");
  return grad * grad / den;
}

double evaluate_ratio(const SpectralLaplacian& op, InequalityTag tag, const RadialField& u, const RatioArgs& args) {
  switch (tag) {
  case InequalityTag::Strauss: return strauss_ratio(op, u, args.s);
  case InequalityTag::FractionalStrauss: return fractional_strauss_ratio(op, u, args.s);
  case InequalityTag::Hardy: return hardy_ratio(op, u, args.s, args.rho);
  case InequalityTag::GagliardoNirenberg:
    if (!args.params) throw HypothesisError("gn: model parameters (b, q) are required");
    return gn_ratio(op, u, *args.params);
  case InequalityTag::Interpolation: return interpolation_ratio(op, u, args.rho);
  }
  throw std::logic_error("evaluate_ratio: unknown tag");
}

RatioReport sweep(const SpectralLaplacian& op, InequalityTag tag, const std::vector<TestFamily>& families,
                  const RatioArgs& args) {
  if (families.empty()) throw std::invalid_argument("sweep: empty family list");
  const int N = op.grid().dimension();
  check_ratio_hypothesis(tag, N, args);
  const ModelParams scaling = scaling_params(N, args);

  RatioReport report;
  report.tag = tag;
  report.args = args;
  std::vector<std::string> kinds;
  for (const auto& f : families) {
    const auto k = to_string(f.kind);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  for (std::size_t i = 0; i < kinds.size(); ++i) report.family += (i ? "+" : "") + kinds[i];

  for (const auto& member : families) {
    try {
      const RadialField u = member.generate(op.grid_ptr());
      RatioSample sample{member};
      sample.ratio = evaluate_ratio(op, tag, u, args);
      for (double lambda : {0.5, 2.0}) {
        const double scaled = evaluate_ratio(op, tag, rescale(u, lambda, scaling).field, args);
        sample.scale_residual = std::max(sample.scale_residual, std::abs(scaled - sample.ratio) / sample.ratio);
      }
      if (!std::isfinite(sample.ratio) || sample.ratio < 0.0)
        throw NumericalError("ratio is not a finite non-negative number");
      report.max_ratio = std::max(report.max_ratio, sample.ratio);
      report.scale_invariance_residual = std::max(report.scale_invariance_residual, sample.scale_residual);
      report.samples.push_back(sample);
    } catch (const HypothesisError& e) {
      throw HypothesisError(member.describe() + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(member.describe() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(member.describe() + ": " + e.what());
    }
  }
  return report;
}

std::vector<TestFamily> gaussian_lattice(double a_min, double a_max, int count) {
  if (count < 1 || !(a_min > 0.0) || !(a_max >= a_min))
    throw std::invalid_argument("gaussian_lattice: needs count >= 1 and 0 < a_min <= a_max");
  std::vector<TestFamily> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(TestFamily::gaussian(a_min * std::pow(a_max / a_min, t)));
  }
  return out;
}

std::vector<TestFamily> default_families(double R, int gaussians, int rings, int polys) {
  // Lengths are laid out for R = 12 and stretched with the grid. The ranges
  // keep both λ = 1/2 and λ = 2 rescalings resolved and decayed to ~1e-12
  // well before the wall, where the Dirichlet closure would otherwise add a
  // spurious kink to ‖Δu‖.
  const double unit = R / 12.0;
  std::vector<TestFamily> out;
  if (gaussians > 0) {
    auto g = gaussian_lattice(1.0 / (unit * unit), 4.0 / (unit * unit), gaussians);
    out.insert(out.end(), g.begin(), g.end());
  }
  for (int i = 0; i < rings; ++i) {
    // centres 1..2.5, widths 0.35..0.6, in row-major order over a 4-wide lattice
    const int row = i / 4;
    const int col = i % 4;
    const int rows = (rings + 3) / 4;
    const double c = 1.0 + 1.5 * (rows == 1 ? 0.0 : static_cast<double>(row) / (rows - 1));
    const double sigma = 0.35 + 0.25 * col / 3.0;
    out.push_back(TestFamily::ring_bump(c * unit, sigma * unit));
  }
  for (int i = 0; i < polys; ++i) {
    const int m = 1 + i / 4;
    const double a = 1.0 + (i % 4);
    out.push_back(TestFamily::poly_gaussian(m, a / (unit * unit)));
  }
  return out;
}

} // namespace bilab
