#include "bilab/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bilab/errors.hpp"

namespace bilab {

namespace {

Extended plus(const Scalar& a, const Extended& e) {
  if (e.is_infinite()) return e;
  return Extended(a + e.finite());
}

Condition make_condition(std::string name, bool satisfied, Extended left, Extended right) {
  return Condition{std::move(name), satisfied, std::move(left), std::move(right)};
}

Condition at_least(std::string name, const Extended& left, const Extended& right) {
  return make_condition(std::move(name), left >= right, left, right);
}

Condition at_most(std::string name, const Extended& left, const Extended& right) {
  return make_condition(std::move(name), left <= right, left, right);
}

Condition greater(std::string name, const Extended& left, const Extended& right) {
  return make_condition(std::move(name), left > right, left, right);
}

Condition less(std::string name, const Extended& left, const Extended& right) {
  return make_condition(std::move(name), left < right, left, right);
}

void finish(RegimeReport& report) {
  bool all = true;
  for (const auto& c : report.conditions) all = all && c.satisfied;
  report.verdict = all ? Verdict::InScope : Verdict::OutOfScope;
}

// 2b/(N-1), +inf for N = 1
Extended strauss_shift(int N, const Scalar& b) { return bound_over(Scalar(2) * b, Scalar(N - 1)); }

bool all_satisfied(const std::vector<Condition>& cs, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to && i < cs.size(); ++i)
    if (!cs[i].satisfied) return false;
  return true;
}

} // namespace

void ModelParams::validate() const {
  if (N < 1) throw std::invalid_argument("dimension N must be >= 1, got " + std::to_string(N));
  if (b < Scalar(0)) throw std::invalid_argument("source exponent b must be >= 0, got " + b.str());
  if (q <= Scalar(1)) throw std::invalid_argument("nonlinearity exponent q must be > 1, got " + q.str());
  if (eps != 1 && eps != -1) throw std::invalid_argument("sign eps must be +1 or -1, got " + std::to_string(eps));
}

std::string ModelParams::str() const {
  std::ostringstream os;
  os << "N=" << N << " b=" << b.str() << " q=" << q.str() << " eps=" << (eps > 0 ? "+1" : "-1");
  return os.str();
}

Extended critical_exponent(int N, const Scalar& b, const Scalar& s) {
  const Scalar gap = Scalar(N) - Scalar(2) * s;
  if (gap <= Scalar(0)) return Extended::infinity();
  return Extended(Scalar(1) + (Scalar(8) + Scalar(2) * b) / gap);
}

CriticalData critical_data(const ModelParams& params, const Scalar& s) {
  if (params.q <= Scalar(1))
    throw std::invalid_argument("critical_data: q must be > 1, got " + params.q.str());
  params.validate();
  const Scalar N(params.N);
  const Scalar& b = params.b;
  const Scalar& q = params.q;
  CriticalData d;
  d.s_c = N / Scalar(2) - (Scalar(4) + b) / (q - Scalar(1));
  d.q_m = Scalar(1) + (Scalar(8) + Scalar(2) * b) / N;
  d.q_e = critical_exponent(params.N, b, s);
  d.D = (N * q - N - Scalar(2) * b) / Scalar(4);
  return d;
}

AdmissibleWindow admissible_window(int N, const Scalar& s) {
  if (N <= 4) return {Scalar(2), Extended::infinity()};
  const Scalar n(N);
  Scalar lower = Scalar(2) * n / (n - Scalar(2) * s);
  if (lower < Scalar(2)) lower = Scalar(2);
  return {lower, Extended(Scalar(2) * n / (n - Scalar(4)))};
}

Extended pair_exponent(int N, const Scalar& s, const Scalar& r) {
  if (N < 1) throw std::invalid_argument("pair_exponent: N must be >= 1");
  if (s >= Scalar(2)) throw HypothesisError("pair_exponent: regularity s must be < 2, got " + s.str());
  const auto window = admissible_window(N, s);
  if (!window.contains(r)) {
    throw HypothesisError("pair_exponent: r=" + r.str() + " outside the admissible window [" +
                          window.lower.str() + ", " + window.upper.str() + ") for N=" + std::to_string(N) +
                          ", s=" + s.str());
  }
  const Scalar rhs = Scalar(N) * (Scalar::ratio(1, 2) - Scalar(1) / r) - s;
  if (rhs < Scalar(0))
    throw HypothesisError("pair_exponent: N(1/2-1/r) - s = " + rhs.str() + " < 0 would need p < 0");
  if (rhs == Scalar(0)) return Extended::infinity();
  return Extended(Scalar(4) / rhs);
}

bool is_admissible(int N, const Scalar& s, const Extended& p, const Scalar& r) {
  if (N < 1 || s >= Scalar(2)) return false;
  if (!admissible_window(N, s).contains(r)) return false;
  if (p < Extended(1)) return false;
  const Scalar rhs = Scalar(N) * (Scalar::ratio(1, 2) - Scalar(1) / r);
  const Scalar lhs = p.is_infinite() ? s : Scalar(4) / p.finite() + s;
  return lhs == rhs;
}

std::string to_string(TheoremTag tag) {
  switch (tag) {
  case TheoremTag::EnergyLocal: return "EnergyLocal";
  case TheoremTag::H1Local: return "H1Local";
  case TheoremTag::SmallDataGlobal: return "SmallDataGlobal";
  case TheoremTag::GlobalExtension: return "GlobalExtension";
  }
  return "?";
}

std::string to_string(Verdict v) { return v == Verdict::InScope ? "InScope" : "OutOfScope"; }

bool Interval::contains(const Scalar& x) const {
  const Extended e(x);
  const bool above = lo_closed ? e >= lo : e > lo;
  const bool below = hi_closed ? e <= hi : e < hi;
  return above && below;
}

std::string Interval::str() const {
  return std::string(lo_closed ? "[" : "(") + lo.str() + ", " + hi.str() +
         (hi_closed && !hi.is_infinite() ? "]" : ")");
}

bool RegimeReport::q_in_intervals(const Scalar& q) const {
  for (const auto& iv : q_intervals)
    if (iv.contains(q)) return true;
  return false;
}

RegimeReport classify_energy_local(const ModelParams& params) {
  params.validate();
  const int N = params.N;
  const Scalar n(N);
  const Scalar& b = params.b;
  const Scalar& q = params.q;
  const Extended qe = critical_exponent(N, b, Scalar(2));
  const Extended shift = strauss_shift(N, b);
  const Extended lower = plus(Scalar(1) + Scalar(2) / n, shift);

  RegimeReport rep;
  rep.tag = TheoremTag::EnergyLocal;
  rep.conditions.push_back(at_least("N >= 5", Extended(n), Extended(5)));
  if (N == 5) {
    rep.conditions.push_back(at_least("b >= 2/9", Extended(b), Extended(Scalar::ratio(2, 9))));
    rep.conditions.push_back(at_most("b <= 38/45", Extended(b), Extended(Scalar::ratio(38, 45))));
  } else {
    const Scalar ceiling = (n - Scalar(1)) * (Scalar(4) + Scalar(3) * n) / (Scalar(3) * n);
    rep.conditions.push_back(at_most("b <= (N-1)(4+3N)/(3N)", Extended(b), Extended(ceiling)));
  }
  const std::size_t branch_end = rep.conditions.size();
  rep.conditions.push_back(at_least("q >= 1+2/N+2b/(N-1)", Extended(q), lower));
  rep.conditions.push_back(at_most("q <= q^e = 1+(8+2b)/(N-4)", Extended(q), qe));
  finish(rep);

  if (!qe.is_infinite() && Extended(q) == qe) rep.flags.push_back("small-data-only");

  if (all_satisfied(rep.conditions, 0, branch_end)) {
    if (N >= 6) {
      // refined range: [1+2b/(N-1)+2/N, 1+(8+2b)/(N-4)]
      rep.q_intervals.push_back({lower, qe, true, true});
    } else {
      // N = 5: [1+2b/(N-1)+2/N, 1+2b/(N-4)+N/(N-2)] ∪ [1+2b/(N-1)+2/(N-4), q^e]
      const Scalar first_hi = Scalar(1) + Scalar(2) * b / (n - Scalar(4)) + n / (n - Scalar(2));
      const Extended second_lo = plus(Scalar(1) + Scalar(2) / (n - Scalar(4)), shift);
      rep.q_intervals.push_back({lower, Extended(first_hi), true, true});
      rep.q_intervals.push_back({second_lo, qe, true, true});
    }
  }
  return rep;
}

RegimeReport classify_h1_local(const ModelParams& params) {
  params.validate();
  const int N = params.N;
  const Scalar n(N);
  const Scalar& b = params.b;
  const Scalar& q = params.q;
  const Extended q1e = critical_exponent(N, b, Scalar(1));
  const Extended lower = plus(Scalar(1), strauss_shift(N, b));

  RegimeReport rep;
  rep.tag = TheoremTag::H1Local;
  rep.conditions.push_back(at_least("N >= 3", Extended(n), Extended(3)));
  rep.conditions.push_back(at_most("b <= 4(N-1)", Extended(b), Extended(Scalar(4) * (n - Scalar(1)))));
  rep.conditions.push_back(at_least("q >= 1+2b/(N-1)", Extended(q), lower));
  rep.conditions.push_back(at_most("q <= q_1^e = 1+(8+2b)/(N-2)", Extended(q), q1e));
  finish(rep);

  if (!q1e.is_infinite() && Extended(q) == q1e) rep.flags.push_back("small-data-only");
  if (all_satisfied(rep.conditions, 0, 2)) rep.q_intervals.push_back({lower, q1e, true, true});
  return rep;
}

RegimeReport classify_small_data_global(const ModelParams& params) {
  params.validate();
  const int N = params.N;
  const Scalar n(N);
  const Scalar& q = params.q;
  const auto crit = critical_data(params);
  const Extended strauss_lower = plus(Scalar(2), strauss_shift(N, params.b));

  RegimeReport rep;
  rep.tag = TheoremTag::SmallDataGlobal;
  rep.conditions.push_back(at_least("N >= 5", Extended(n), Extended(5)));
  rep.conditions.push_back(at_least("q >= 2+2b/(N-1)", Extended(q), strauss_lower));
  rep.conditions.push_back(greater("q > q_m = 1+(8+2b)/N", Extended(q), Extended(crit.q_m)));
  rep.conditions.push_back(less("q < q^e = 1+(8+2b)/(N-4)", Extended(q), crit.q_e));
  finish(rep);

  // max{q_m, 2+2b/(N-1)}; on a tie the closed Strauss bound is the one quoted
  const bool strauss_active = strauss_lower >= Extended(crit.q_m);
  rep.flags.push_back(strauss_active ? "active-lower-bound: 2+2b/(N-1)" : "active-lower-bound: q_m");

  if (N >= 5) {
    Interval iv;
    if (strauss_active) {
      iv.lo = strauss_lower;
      iv.lo_closed = !(strauss_lower == Extended(crit.q_m));
    } else {
      iv.lo = Extended(crit.q_m);
      iv.lo_closed = false;
    }
    iv.hi = crit.q_e;
    iv.hi_closed = false;
    if (iv.lo < iv.hi) rep.q_intervals.push_back(iv);
  }
  return rep;
}

RegimeReport classify_global_extension(const ModelParams& params, bool small_mass) {
  const auto local = classify_energy_local(params);
  const auto crit = critical_data(params);
  const Extended q(params.q);
  const Extended qm(crit.q_m);

  RegimeReport rep;
  rep.tag = TheoremTag::GlobalExtension;
  int satisfied = 0;
  for (const auto& c : local.conditions) satisfied += c.satisfied ? 1 : 0;
  rep.conditions.push_back(make_condition("EnergyLocal hypotheses hold", local.verdict == Verdict::InScope,
                                          Extended(satisfied),
                                          Extended(static_cast<int>(local.conditions.size()))));

  rep.branches.push_back(less("q < q_m", q, qm));
  rep.branches.push_back(make_condition(std::string("q = q_m and small mass (") + (small_mass ? "yes" : "no") + ")",
                                        q == qm && small_mass, q, qm));
  rep.branches.push_back(make_condition("eps = +1 and q < q^e", params.eps == 1 && q < crit.q_e, q, crit.q_e));
  bool any = false;
  for (const auto& br : rep.branches) any = any || br.satisfied;
  rep.conditions.push_back(
      make_condition("q < q_m or (q = q_m and small mass) or (eps = +1 and q < q^e)", any, q, qm));
  finish(rep);

  if (!local.q_intervals.empty()) {
    const Extended lo = local.q_intervals.front().lo;
    if (params.eps == 1) {
      rep.q_intervals.push_back({lo, crit.q_e, true, false});
    } else {
      rep.q_intervals.push_back({lo, qm, true, small_mass});
    }
  }
  return rep;
}

ScatteringPairTriple scattering_triple(const ModelParams& params) {
  params.validate();
  const int N = params.N;
  if (N < 2) throw HypothesisError("scattering_triple: needs N >= 2 for 2b/(N-1)");
  const Scalar n(N);
  const Scalar& b = params.b;
  const Scalar& q = params.q;

  ScatteringPairTriple t;
  t.nu = q - Scalar(1) - Scalar(2) * b / (n - Scalar(1));
  if (t.nu <= Scalar(0))
    throw HypothesisError("scattering_triple: nu = q-1-2b/(N-1) = " + t.nu.str() + " must be > 0");
  t.s_nu = n / Scalar(2) - Scalar(4) / t.nu;
  if (t.s_nu <= Scalar(0))
    throw HypothesisError("scattering_triple: s_nu = N/2-4/nu = " + t.s_nu.str() + " must be > 0");
  t.r = Scalar(2) + t.nu;

  const Scalar top = Scalar(4) * t.nu * (Scalar(2) + t.nu);
  auto over = [](const Scalar& num, const Scalar& den) {
    return den == Scalar(0) ? Extended::infinity() : Extended(num / den);
  };
  t.p = over(Scalar(8) * (Scalar(2) + t.nu), n * t.nu);
  t.k = over(top, Scalar(8) - (n - Scalar(4)) * t.nu);
  t.m = over(top, n * t.nu * t.nu + (n - Scalar(4)) * t.nu - Scalar(8));

  const Scalar rhs = n * (Scalar::ratio(1, 2) - Scalar(1) / t.r);
  const std::array<const Extended*, 3> exps{&t.p, &t.k, &t.m};
  const std::array<Scalar, 3> regs{Scalar(0), t.s_nu, -t.s_nu};
  const std::array<const char*, 3> names{"(p,r) 0-admissible", "(k,r) s_nu-admissible", "(m,r) (-s_nu)-admissible"};
  for (std::size_t i = 0; i < 3; ++i) {
    const Extended& x = *exps[i];
    const Scalar lhs = (x.is_infinite() ? Scalar(0) : Scalar(4) / x.finite()) + regs[i];
    t.residuals[i] = std::abs((lhs - rhs).value());
    if (!(t.residuals[i] < 1e-12)) {
      throw NumericalError(std::string("scattering_triple: identity for ") + names[i] +
                           " fails with residual " + std::to_string(t.residuals[i]));
    }
    t.in_window[i] = is_admissible(N, regs[i], x, t.r);
  }
  return t;
}

} // namespace bilab
