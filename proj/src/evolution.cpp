#include "bilab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bilab/errors.hpp"

namespace bilab {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::VectorXcd phases(const SpectralLaplacian& op, double t) {
  const auto& mu = op.eigenvalues();
  Eigen::VectorXcd out(mu.size());
  for (int k = 0; k < mu.size(); ++k) out[k] = std::exp(kI * (t * mu[k] * mu[k]));
  return out;
}

// |x|^b |u|^{q-1} u
RadialField source_term(const RadialField& u, const ModelParams& params) {
  const auto& r = u.grid->nodes();
  const double b = params.b.value();
  const double q = params.q.value();
  RadialField f = u;
  for (int j = 0; j < u.size(); ++j) {
    const double amp = std::abs(u.values[j]);
    f.values[j] *= amp == 0.0 ? 0.0 : std::pow(r[j], b) * std::pow(amp, q - 1.0);
  }
  return f;
}

void require_params_match(const ModelParams& params, const RadialGrid& grid, const char* where) {
  params.validate();
  if (params.N != grid.dimension())
    throw std::invalid_argument(std::string(where) + ": parameter dimension N=" + std::to_string(params.N) +
                                " differs from the grid dimension " + std::to_string(grid.dimension()));
}

double relative_drift(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double ref = std::abs(xs.front());
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, std::abs(x - xs.front()));
  return ref == 0.0 ? worst : worst / ref;
}

// n with n·dt closest to T from above; the step is then shrunk to T/n
int step_count(double T, double dt) {
  const double n = std::ceil(T / dt - 1e-9);
  if (n > static_cast<double>(std::numeric_limits<int>::max()))
    throw std::invalid_argument("evolve: T/dt exceeds the step limit");
  return std::max(1, static_cast<int>(n));
}

} // namespace

RadialField free_propagate(const SpectralLaplacian& op, const RadialField& u, double t) {
  op.check_grid(u, "free_propagate");
  if (t == 0.0) return u;
  Eigen::VectorXcd c = op.analysis(u);
  c.array() *= phases(op, t).array();
  return op.synthesis(c);
}

RadialField nonlinear_phase(const RadialField& u, double dt, const ModelParams& params) {
  const auto& r = u.grid->nodes();
  const double b = params.b.value();
  const double q = params.q.value();
  const double eps = params.eps;
  RadialField out = u;
  for (int j = 0; j < u.size(); ++j) {
    const double amp = std::abs(u.values[j]);
    if (amp == 0.0) continue;
    out.values[j] *= std::exp(kI * (eps * dt * std::pow(r[j], b) * std::pow(amp, q - 1.0)));
  }
  return out;
}

RadialField strang_step(const SpectralLaplacian& op, const RadialField& u, double dt, const ModelParams& params) {
  const RadialField half = nonlinear_phase(u, 0.5 * dt, params);
  return nonlinear_phase(free_propagate(op, half, dt), 0.5 * dt, params);
}

void EvolutionConfig::validate() const {
  params.validate();
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("evolution: R must be > 0");
  if (M < 8) throw std::invalid_argument("evolution: M must be >= 8");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("evolution: dt must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("evolution: T must be > 0");
  if (!(dt < T)) throw std::invalid_argument("evolution: dt must be smaller than T");
  if (stride < 1) throw std::invalid_argument("evolution: stride must be >= 1");
  if (!(threshold > 0.0)) throw std::invalid_argument("evolution: threshold must be > 0");
  if (!(boundary_halt_fraction > 0.0)) throw std::invalid_argument("evolution: boundary_halt_fraction must be > 0");
  if (const auto* family = std::get_if<TestFamily>(&initial)) family->validate();
}

std::string to_string(HaltReason reason) {
  switch (reason) {
  case HaltReason::None: return "none";
  case HaltReason::Threshold: return "threshold";
  case HaltReason::BoundaryMass: return "boundary-mass";
  }
  return "?";
}

double TrajectoryRecord::max_mass_drift() const { return relative_drift(mass); }
double TrajectoryRecord::max_energy_drift() const { return relative_drift(energy); }

RadialField initial_field(const EvolutionConfig& config, GridPtr grid) {
  if (const auto* family = std::get_if<TestFamily>(&config.initial)) return family->generate(grid);
  const RadialField& field = std::get<RadialField>(config.initial);
  if (!field.grid || !field.grid->same_as(*grid))
    throw std::invalid_argument("initial field was sampled on a different grid (N, R, M)");
  RadialField out = field;
  out.grid = grid;
  return out;
}

TrajectoryRecord evolve(const EvolutionConfig& config) {
  config.validate();
  const SpectralLaplacian op(build_grid(config.params.N, config.R, config.M));
  return evolve(op, config);
}

TrajectoryRecord evolve(const SpectralLaplacian& op, const EvolutionConfig& config) {
  config.validate();
  const RadialGrid& grid = op.grid();
  require_params_match(config.params, grid, "evolve");
  if (grid.radius() != config.R || grid.size() != config.M)
    throw std::invalid_argument("evolve: operator grid differs from the configured (R, M)");

  RadialField u = initial_field(config, op.grid_ptr());
  if (!u.finite()) throw std::invalid_argument("evolve: initial data is not finite");

  const int steps = step_count(config.T, config.dt);
  const double dt = config.T / steps;

  const Eigen::VectorXcd step_phase = phases(op, dt);

  TrajectoryRecord rec;
  rec.dt = dt;

  auto record = [&](double t) {
    const double m = mass(u);
    const double lap = sobolev_norm(op, 2.0, u);
    rec.times.push_back(t);
    rec.mass.push_back(m);
    rec.energy.push_back(config.nonlinear ? energy(op, u, config.params) : lap * lap);
    rec.laplacian_norm.push_back(lap);
    rec.h2_norm.push_back(std::sqrt(m + lap * lap));
    rec.boundary_mass.push_back(boundary_mass(u));
    if (config.store_snapshots) rec.snapshots.push_back(u);
    if (rec.boundary_mass.back() > kBoundaryReliability * m) rec.unreliable = true;
  };

  record(0.0);
  if (rec.h2_norm.front() >= config.threshold)
    throw std::invalid_argument("evolve: threshold " + std::to_string(config.threshold) +
                                " does not exceed the initial H2 norm " + std::to_string(rec.h2_norm.front()));

  // without the phase substep the coefficients never leave the eigenbasis, so
  // transform roundoff is not fed back into the high modes every step
  Eigen::VectorXcd coeffs;
  if (!config.nonlinear) coeffs = op.analysis(u);

  for (int n = 1; n <= steps; ++n) {
    const bool sample = n % config.stride == 0 || n == steps;
    if (config.nonlinear) {
      u = nonlinear_phase(u, 0.5 * dt, config.params);
      Eigen::VectorXcd c = op.analysis(u);
      c.array() *= step_phase.array();
      u = nonlinear_phase(op.synthesis(c), 0.5 * dt, config.params);
    } else {
      coeffs.array() *= step_phase.array();
      if (sample) u = op.synthesis(coeffs);
    }
    rec.steps = n;

    if (!u.finite()) {
      std::ostringstream os;
      os << "evolve: field became non-finite at t=" << n * dt << " (step " << n << ")";
      throw NumericalError(os.str());
    }
    if (!sample) continue;

    const double t = n == steps ? config.T : n * dt;
    record(t);
    if (rec.h2_norm.back() > config.threshold) {
      rec.blowup_flag = true;
      rec.blowup_time = t;
      rec.halt = HaltReason::Threshold;
      break;
    }
    if (rec.boundary_mass.back() > config.boundary_halt_fraction * rec.mass.back()) {
      rec.halt = HaltReason::BoundaryMass;
      break;
    }
  }
  rec.final_state = std::move(u);
  return rec;
}

Trajectory uniform_times(double T, int n_t) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time horizon T must be > 0");
  if (n_t < 1) throw std::invalid_argument("number of time intervals n_t must be >= 1");
  Trajectory out;
  out.times.resize(n_t + 1);
  for (int n = 0; n <= n_t; ++n) out.times[n] = T * n / n_t;
  return out;
}

Trajectory free_trajectory(const SpectralLaplacian& op, const RadialField& v0, double T, int n_t) {
  Trajectory out = uniform_times(T, n_t);
  const Eigen::VectorXcd c0 = op.analysis(v0);
  for (double t : out.times) {
    Eigen::VectorXcd c = c0;
    c.array() *= phases(op, t).array();
    out.fields.push_back(op.synthesis(c));
  }
  return out;
}

Trajectory duhamel_apply(const SpectralLaplacian& op, const Trajectory& v, const RadialField& v0, double T,
                         int n_t, const ModelParams& params) {
  require_params_match(params, op.grid(), "duhamel_apply");
  Trajectory out = uniform_times(T, n_t);
  if (v.fields.size() != out.times.size() || v.times.size() != out.times.size())
    throw std::invalid_argument("duhamel_apply: trajectory must hold n_t+1 samples");
  for (std::size_t n = 0; n < out.times.size(); ++n)
    if (std::abs(v.times[n] - out.times[n]) > 1e-12 * std::max(1.0, T))
      throw std::invalid_argument("duhamel_apply: trajectory is not sampled on uniform times in [0, T]");

  const double dt = T / n_t;
  const Eigen::VectorXcd step = phases(op, dt);
  const Eigen::VectorXcd c0 = op.analysis(v0);
  const Complex factor = kI * static_cast<double>(params.eps);

  // I_n = Σ_m w_m e^{i(t_n-τ_m)μ²} F̂_m with trapezoid weights, built recursively
  Eigen::VectorXcd integral = Eigen::VectorXcd::Zero(c0.size());
  Eigen::VectorXcd previous = op.analysis(source_term(v.fields[0], params));
  out.fields.push_back(v0);
  for (int n = 1; n <= n_t; ++n) {
    const Eigen::VectorXcd current = op.analysis(source_term(v.fields[n], params));
    integral = (step.array() * (integral + 0.5 * dt * previous).array()).matrix() + 0.5 * dt * current;
    Eigen::VectorXcd c = c0;
    c.array() *= phases(op, out.times[n]).array();
    out.fields.push_back(op.synthesis(c + factor * integral));
    previous = current;
  }
  return out;
}

double spacetime_norm(const Trajectory& v, const Extended& p, double r) {
  if (v.fields.empty() || v.fields.size() != v.times.size())
    throw std::invalid_argument("spacetime_norm: empty or inconsistent trajectory");
  if (!(r >= 1.0)) throw std::invalid_argument("spacetime_norm: needs r >= 1");
  std::vector<double> slices;
  slices.reserve(v.fields.size());
  for (const auto& f : v.fields) slices.push_back(lebesgue_norm(f, r));

  if (p.is_infinite()) return *std::max_element(slices.begin(), slices.end());
  const double pp = p.to_double();
  if (!(pp >= 1.0)) throw std::invalid_argument("spacetime_norm: needs p >= 1");
  if (slices.size() == 1) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 1; n < slices.size(); ++n)
    acc += 0.5 * (v.times[n] - v.times[n - 1]) * (std::pow(slices[n - 1], pp) + std::pow(slices[n], pp));
  return std::pow(acc, 1.0 / pp);
}

double sup_l2_distance(const Trajectory& a, const Trajectory& b) {
  if (a.fields.size() != b.fields.size()) throw std::invalid_argument("sup_l2_distance: sample counts differ");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.fields.size(); ++n)
    worst = std::max(worst, std::sqrt(mass(a.fields[n] - b.fields[n])));
  return worst;
}

std::vector<StrichartzPair> picard_pairs(int N) {
  if (N < 1) throw std::invalid_argument("picard_pairs: N must be >= 1");
  const Scalar U = N >= 5 ? Scalar(2) : Scalar::ratio(N, 2);
  std::vector<StrichartzPair> out{{Extended::infinity(), Scalar(2)}};
  for (int k : {1, 2}) {
    const Scalar four_over_p = U * Scalar::ratio(k, 3);
    const Scalar inv_r = Scalar::ratio(1, 2) - four_over_p / Scalar(N);
    out.push_back({Extended(Scalar(4) / four_over_p), Scalar(1) / inv_r});
  }
  return out;
}

std::vector<StrichartzPair> interior_pairs(int N, const Scalar& s) {
  if (!(s >= Scalar(0) && s < Scalar(2)))
    throw HypothesisError("interior_pairs: needs 0 <= s < 2, got s=" + s.str());
  AdmissibleWindow window = admissible_window(N, s);
  if (window.upper.is_infinite()) {
    // low dimensions: the window is [2, inf) but 4/p >= 0 still needs r >= 2N/(N-2s)
    if (Scalar(N) <= Scalar(2) * s)
      throw HypothesisError("interior_pairs: no s-admissible pair for N=" + std::to_string(N) + ", s=" + s.str());
    const Scalar lower = Scalar(2 * N) / (Scalar(N) - Scalar(2) * s);
    if (lower > window.lower) window.lower = lower;
  }
  std::vector<StrichartzPair> out;
  for (int k : {1, 2}) {
    Scalar r;
    if (window.upper.is_infinite()) {
      r = window.lower * Scalar(2 * k);
    } else {
      r = window.lower + (window.upper.finite() - window.lower) * Scalar::ratio(k, 3);
    }
    if (!window.contains(r))
      throw HypothesisError("interior_pairs: empty admissible window for N=" + std::to_string(N) + ", s=" + s.str());
    out.push_back({pair_exponent(N, s, r), r});
  }
  return out;
}

std::vector<double> strichartz_echo(const SpectralLaplacian& op, const TrajectoryRecord& record,
                                    const std::vector<StrichartzPair>& pairs) {
  if (record.snapshots.size() != record.times.size() || record.snapshots.empty())
    throw std::invalid_argument("strichartz_echo: trajectory was recorded without snapshots");
  Trajectory v;
  v.times = record.times;
  v.fields = record.snapshots;
  Trajectory free;
  free.times = record.times;
  for (double t : record.times) free.fields.push_back(free_propagate(op, record.snapshots.front(), t));
  std::vector<double> out;
  for (const auto& pr : pairs) {
    const double den = spacetime_norm(free, pr.p, pr.r.value());
    out.push_back(den == 0.0 ? 0.0 : spacetime_norm(v, pr.p, pr.r.value()) / den);
  }
  return out;
}

PicardResult picard_solve(const SpectralLaplacian& op, const RadialField& v0, double T, const ModelParams& params,
                          int n_t, double tol, int max_iter) {
  require_params_match(params, op.grid(), "picard_solve");
  if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");

  PicardResult res;
  PicardDiagnostics& diag = res.diagnostics;
  diag.pairs = picard_pairs(params.N);
  diag.tol = tol;

  auto distance = [&](const Trajectory& a, const Trajectory& b) {
    Trajectory diff;
    diff.times = a.times;
    for (std::size_t n = 0; n < a.fields.size(); ++n) diff.fields.push_back(a.fields[n] - b.fields[n]);
    double worst = 0.0;
    for (const auto& pr : diag.pairs) worst = std::max(worst, spacetime_norm(diff, pr.p, pr.r.value()));
    return worst;
  };

  Trajectory current = free_trajectory(op, v0, T, n_t);
  int rises = 0;
  for (int it = 1; it <= max_iter; ++it) {
    Trajectory next = duhamel_apply(op, current, v0, T, n_t, params);
    for (const auto& f : next.fields)
      if (!f.finite()) throw NumericalError("picard_solve: iterate became non-finite at iteration " + std::to_string(it));
    const double d = distance(next, current);
    if (!diag.distances.empty()) {
      const double prev = diag.distances.back();
      diag.ratios.push_back(prev == 0.0 ? 0.0 : d / prev);
      rises = d > prev ? rises + 1 : 0;
    }
    diag.distances.push_back(d);
    diag.iterations = it;
    current = std::move(next);

    if (d < tol) {
      diag.converged = true;
      diag.message = "converged";
      break;
    }
    if (rises >= 3) {
      diag.diverged = true;
      diag.message = "diverged: distance grew in three consecutive iterations";
      break;
    }
  }
  if (!diag.converged && !diag.diverged) diag.message = "max_iter reached without convergence";
  res.trajectory = std::move(current);
  return res;
}

StrichartzReport strichartz_ratio(const SpectralLaplacian& op, const RadialField& v0, double s,
                                  const std::vector<StrichartzPair>& pairs, double T, int n_t) {
  const int N = op.grid().dimension();
  if (pairs.empty()) throw std::invalid_argument("strichartz_ratio: no pairs given");
  const Scalar exact_s = Scalar::from_decimal_double(s);
  for (const auto& pr : pairs)
    if (!is_admissible(N, exact_s, pr.p, pr.r))
      throw HypothesisError("strichartz: pair (p=" + pr.p.str() + ", r=" + pr.r.str() + ") is not " +
                            exact_s.str() + "-admissible in dimension " + std::to_string(N));

  const double den = sobolev_norm(op, s, v0);
  if (den == 0.0) throw std::invalid_argument("strichartz_ratio: initial data has zero Sobolev norm");

  StrichartzReport rep;
  rep.s = s;
  rep.pairs = pairs;
  rep.T = T;
  rep.n_t = n_t;
  const Trajectory free = free_trajectory(op, v0, T, n_t);
  for (const auto& pr : pairs) {
    rep.ratios.push_back(spacetime_norm(free, pr.p, pr.r.value()) / den);
    rep.max_ratio = std::max(rep.max_ratio, rep.ratios.back());
  }
  return rep;
}

GlobalBoundReport global_bound_check(const TrajectoryRecord& record, const ModelParams& params,
                                     std::optional<double> gn_constant) {
  params.validate();
  if (params.eps != -1) throw HypothesisError("global bound: applies to the focusing case eps = -1 only");
  if (!gn_constant || !(*gn_constant > 0.0) || !std::isfinite(*gn_constant))
    throw HypothesisError("global bound: needs an empirical Gagliardo-Nirenberg constant; run the gn sweep first");
  if (record.times.empty()) throw std::invalid_argument("global bound: empty trajectory");

  GlobalBoundReport rep;
  rep.gn_constant = *gn_constant;
  const double q = params.q.value();
  rep.D = critical_data(params).D.value();
  rep.subcritical = rep.D < 2.0;
  rep.initial_energy = record.energy.front();
  rep.times = record.times;

  const double D = rep.D;
  const double E0 = rep.initial_energy;
  // the mass is conserved, so the coefficient is fixed by t = 0
  const double K = 2.0 / (1.0 + q) * rep.gn_constant * std::pow(std::sqrt(record.mass.front()), 1.0 + q - D);
  const double tol = 1e-10 * std::max(1.0, std::abs(E0));
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const double X = record.laplacian_norm[i];
    const double slack = E0 - X * X * (1.0 - K * std::pow(X, D - 2.0));
    rep.slack.push_back(slack);
    if (slack < -tol) ++rep.violations;
    rep.max_laplacian_norm = std::max(rep.max_laplacian_norm, X);
  }

  if (D < 2.0) {
    // f(X) = X² - K X^D is increasing past its minimiser; the ceiling solves f(X) = E0
    auto f = [&](double X) { return X * X - K * std::pow(X, D); };
    const double lo0 = D > 0.0 ? std::pow(0.5 * D * K, 1.0 / (2.0 - D)) : 0.0;
    if (E0 >= f(lo0)) {
      double lo = lo0;
      double hi = std::max(1.0, 2.0 * lo0);
      while (f(hi) < E0) hi *= 2.0;
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < E0 ? lo : hi) = mid;
      }
      rep.ceiling = hi;
    }
  } else if (D == 2.0 && K < 1.0 && E0 >= 0.0) {
    rep.ceiling = std::sqrt(E0 / (1.0 - K));
  }
  if (rep.ceiling) rep.below_ceiling = rep.max_laplacian_norm <= *rep.ceiling * (1.0 + 1e-9);
  return rep;
}

std::vector<RadialField> scattering_profile(const SpectralLaplacian& op, const TrajectoryRecord& record) {
  if (record.snapshots.size() != record.times.size())
    throw std::invalid_argument("scattering_profile: trajectory was recorded without snapshots");
  std::vector<RadialField> out;
  out.reserve(record.snapshots.size());
  for (std::size_t i = 0; i < record.snapshots.size(); ++i)
    out.push_back(free_propagate(op, record.snapshots[i], -record.times[i]));
  return out;
}

ScatteringReport scattering_cauchy_check(const SpectralLaplacian& op, const TrajectoryRecord& record) {
  if (record.snapshots.size() < 3)
    throw std::invalid_argument("scattering check: needs at least 3 snapshots, got " +
                                std::to_string(record.snapshots.size()));
  if (record.snapshots.size() != record.times.size())
    throw std::invalid_argument("scattering check: trajectory was recorded without snapshots");
  // increments are taken on the profile's eigen-coefficients, where the bracket
  // norm is diagonal; a synthesis/analysis round trip would put roundoff into
  // the modes the μ² weight amplifies most
  const auto& mu = op.eigenvalues();
  auto profile_coeffs = [&](std::size_t i) {
    Eigen::VectorXcd c = op.analysis(record.snapshots[i]);
    c.array() *= phases(op, -record.times[i]).array();
    return c;
  };
  ScatteringReport rep;
  Eigen::VectorXcd prev = profile_coeffs(0);
  for (std::size_t i = 0; i + 1 < record.snapshots.size(); ++i) {
    Eigen::VectorXcd next = profile_coeffs(i + 1);
    double acc = 0.0;
    for (int k = 0; k < mu.size(); ++k) acc += (1.0 + mu[k] * mu[k]) * std::norm(next[k] - prev[k]);
    rep.times.push_back(record.times[i]);
    rep.increments.push_back(std::sqrt(acc));
    prev = std::move(next);
  }
  const std::size_t n = rep.increments.size();
  rep.final_third_start = (2 * n) / 3;
  rep.nonincreasing_final_third = true;
  for (std::size_t i = rep.final_third_start + 1; i < n; ++i)
    if (rep.increments[i] > rep.increments[i - 1]) rep.nonincreasing_final_third = false;
  rep.profile = op.synthesis(prev);
  rep.profile_h2_norm = h2_bracket_norm(op, 2.0, rep.profile);
  return rep;
}

} // namespace bilab
