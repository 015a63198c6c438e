#pragma once

// Exponent algebra for i v_t + Δ²v = -ε|x|^b |v|^{q-1} v: critical indices,
// admissible Strichartz pairs and the hypotheses of the local/global
// well-posedness results. Pure functions on values; nothing here touches a
// grid.

#include <array>
#include <string>
#include <vector>

#include "bilab/number.hpp"

namespace bilab {

struct ModelParams {
  int N = 1;
  Scalar b;
  Scalar q;
  int eps = 1; ///< +1 defocusing, -1 focusing

  /// Throws std::invalid_argument unless N >= 1, b >= 0, q > 1, eps = ±1.
  void validate() const;
  std::string str() const;
};

struct CriticalData {
  Scalar s_c; ///< N/2 - (4+b)/(q-1)
  Scalar q_m; ///< 1 + (8+2b)/N
  Extended q_e; ///< 1 + (8+2b)/(N-2s), +inf when N <= 2s
  Scalar D; ///< (Nq - N - 2b)/4
};

/// q_e(s) for the given dimension and inhomogeneity.
Extended critical_exponent(int N, const Scalar& b, const Scalar& s);

CriticalData critical_data(const ModelParams& params, const Scalar& s = Scalar(2));

/// Window for the space exponent of an s-admissible pair: [lower, upper),
/// upper = +inf for N <= 4.
struct AdmissibleWindow {
  Scalar lower;
  Extended upper;
  bool contains(const Scalar& r) const { return r >= lower && Extended(r) < upper; }
};

AdmissibleWindow admissible_window(int N, const Scalar& s);

/// Time exponent p solving 4/p + s = N(1/2 - 1/r). Returns +inf when the
/// right side vanishes. Throws HypothesisError outside the window or when
/// the right side is negative.
Extended pair_exponent(int N, const Scalar& s, const Scalar& r);

/// True iff 4/p + s = N(1/2 - 1/r), r lies in the window, s < 2 and p >= 1.
bool is_admissible(int N, const Scalar& s, const Extended& p, const Scalar& r);

enum class TheoremTag { EnergyLocal, H1Local, SmallDataGlobal, GlobalExtension };
enum class Verdict { InScope, OutOfScope };

std::string to_string(TheoremTag tag);
std::string to_string(Verdict v);

struct Condition {
  std::string name; ///< formula the comparison was made against
  bool satisfied = false;
  Extended left;
  Extended right;
};

struct Interval {
  Extended lo;
  Extended hi;
  bool lo_closed = true;
  bool hi_closed = true;
  bool contains(const Scalar& x) const;
  std::string str() const;
};

struct RegimeReport {
  TheoremTag tag = TheoremTag::EnergyLocal;
  Verdict verdict = Verdict::OutOfScope;
  std::vector<Condition> conditions;
  std::vector<Interval> q_intervals;
  /// e.g. "small-data-only" at the energy-critical endpoint
  std::vector<std::string> flags;
  /// Alternatives of a disjunctive hypothesis, listed for explanation only.
  std::vector<Condition> branches;

  bool q_in_intervals(const Scalar& q) const;
};

RegimeReport classify_energy_local(const ModelParams& params);
RegimeReport classify_h1_local(const ModelParams& params);
RegimeReport classify_small_data_global(const ModelParams& params);
/// InScope reads "global"; OutOfScope reads "local only".
RegimeReport classify_global_extension(const ModelParams& params, bool small_mass);

/// Exponents used for the small-data nonlinear estimates:
/// r = 2 + ν = 1 + q - 2b/(N-1), s_ν = N/2 - 4/ν and the time exponents
/// p (0-admissible), k (s_ν-admissible), m ((-s_ν)-admissible).
struct ScatteringPairTriple {
  Scalar nu;
  Scalar r;
  Scalar s_nu;
  Extended p;
  Extended k; ///< may be negative when ν > 8/(N-4); see in_window
  Extended m;
  /// |4/x + s - N(1/2 - 1/r)| for x = p, k, m with s = 0, s_ν, -s_ν
  std::array<double, 3> residuals{};
  /// whether each pair also satisfies the window condition on r
  std::array<bool, 3> in_window{};
};

/// Throws HypothesisError when ν <= 0 or s_ν <= 0, NumericalError when an
/// admissibility identity fails by more than 1e-12.
ScatteringPairTriple scattering_triple(const ModelParams& params);

} // namespace bilab
