#include "bilab/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "bilab/errors.hpp"

namespace bilab::cli {

namespace fs = std::filesystem;

// `where` names the JSON path in error messages
TestFamily family_at(const Json& j, const std::string& where);

namespace {

// ---------------------------------------------------------------- config reading

class Obj {
public:
  Obj(const Json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw std::invalid_argument(path_ + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
      if (!keys.count(item.key())) throw std::invalid_argument("unknown key '" + path_ + "." + item.key() + "'");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  const Json& at(const std::string& k) const {
    if (!has(k)) throw std::invalid_argument(path_ + ": missing key '" + k + "'");
    return j_.at(k);
  }

  std::string path(const std::string& k) const { return path_ + "." + k; }

  double number(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_number()) throw std::invalid_argument(path(k) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw std::invalid_argument(path(k) + ": expected a finite number");
    return x;
  }
  double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

  int integer(const std::string& k) const {
    const Json& v = at(k);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x == std::floor(x) && std::abs(x) < 2e9) return static_cast<int>(x);
    }
    throw std::invalid_argument(path(k) + ": expected an integer");
  }
  int integer(const std::string& k, int fallback) const { return has(k) ? integer(k) : fallback; }

  bool boolean(const std::string& k, bool fallback) const {
    if (!has(k)) return fallback;
    const Json& v = at(k);
    if (!v.is_boolean()) throw std::invalid_argument(path(k) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_string()) throw std::invalid_argument(path(k) + ": expected a string");
    return v.get<std::string>();
  }

  Scalar scalar(const std::string& k) const { return scalar_of(at(k), path(k)); }

  static Scalar scalar_of(const Json& v, const std::string& where) {
    if (v.is_number_integer()) return Scalar(v.get<std::int64_t>());
    if (v.is_number()) return Scalar::from_decimal_double(v.get<double>());
    if (v.is_string()) {
      try {
        return Scalar::parse(v.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
      }
    }
    throw std::invalid_argument(where + ": expected a number or a fraction string");
  }

private:
  const Json& j_;
  std::string path_;
};

// integers as integers, other exact values as "p/q" so they survive a round trip
Json scalar_json(const Scalar& v) {
  if (v.exact()) {
    if (v.rational()->den() == 1) return v.rational()->num();
    return v.str();
  }
  return v.value();
}

Json params_json(const ModelParams& p) {
  return Json{{"N", p.N}, {"b", scalar_json(p.b)}, {"q", scalar_json(p.q)}, {"eps", p.eps}};
}

Json grid_json(int N, double R, int M) { return Json{{"N", N}, {"R", R}, {"M", M}}; }

Extended extended_of(const Json& v, const std::string& where) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return Extended::infinity();
  }
  return Extended(Obj::scalar_of(v, where));
}

std::variant<TestFamily, RadialField> parse_initial(const Json& j, const std::string& where, GridPtr grid,
                                                    const fs::path& base, std::string& file_out) {
  if (j.is_object() && j.contains("file")) {
    Obj o(j, where, {"file"});
    fs::path path = o.string("file");
    if (path.is_relative()) path = base / path;
    path = fs::absolute(path).lexically_normal();
    file_out = path.string();
    return io::read_field_csv(path, std::move(grid));
  }
  return family_at(j, where);
}

Json initial_json(const std::variant<TestFamily, RadialField>& initial, const std::string& file) {
  if (const auto* f = std::get_if<TestFamily>(&initial)) return io::to_json(*f);
  return Json{{"file", file}};
}

// ---------------------------------------------------------------- output helpers

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

void finish(const fs::path& dir, const std::string& command, const Json& config, std::vector<std::string> outputs,
            Json& summary) {
  const std::string hash = io::manifest_hash(command, config);
  summary["manifest_hash"] = hash;
  io::write_json(dir / "summary.json", summary);
  outputs.push_back("summary.json");
  io::write_json(dir / "manifest.json", io::make_manifest(command, config, outputs));
}

Json regime_verdicts(const ModelParams& p) {
  Json j;
  j["EnergyLocal"] = to_string(classify_energy_local(p).verdict);
  j["H1Local"] = to_string(classify_h1_local(p).verdict);
  j["SmallDataGlobal"] = to_string(classify_small_data_global(p).verdict);
  j["GlobalExtension"] = to_string(classify_global_extension(p, false).verdict);
  return j;
}

Json monitors_at(const TrajectoryRecord& rec, std::size_t i) {
  return Json{{"t", rec.times[i]},
              {"mass", rec.mass[i]},
              {"energy", rec.energy[i]},
              {"h2norm", rec.h2_norm[i]},
              {"laplacian_norm", rec.laplacian_norm[i]},
              {"boundary_mass", rec.boundary_mass[i]}};
}

Json trajectory_summary(const TrajectoryRecord& rec, const ModelParams& p) {
  double worst_boundary = 0.0;
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    if (rec.mass[i] > 0.0) worst_boundary = std::max(worst_boundary, rec.boundary_mass[i] / rec.mass[i]);
  Json j{{"steps", rec.steps},
         {"dt", rec.dt},
         {"samples", rec.times.size()},
         {"max_mass_drift", rec.max_mass_drift()},
         {"max_energy_drift", rec.max_energy_drift()},
         {"blowup_flag", rec.blowup_flag},
         {"halt_reason", to_string(rec.halt)},
         {"unreliable", rec.unreliable},
         {"max_boundary_mass_fraction", worst_boundary},
         {"initial", monitors_at(rec, 0)},
         {"final", monitors_at(rec, rec.times.size() - 1)}};
  j["blowup_time"] = rec.blowup_time ? Json(*rec.blowup_time) : Json(nullptr);
  const bool supercritical_focusing = p.eps == -1 && p.q > critical_data(p).q_m;
  j["observational"] = supercritical_focusing;
  if (supercritical_focusing)
    j["note"] = "focusing, q > q_m: a blow-up flag is a threshold crossing observed numerically, not a theorem";
  return j;
}

// ---------------------------------------------------------------- regimes text

void print_condition(std::ostream& os, const Condition& c) {
  os << "  [" << (c.satisfied ? "yes" : " no") << "] " << c.name << ": " << c.left.str() << " vs " << c.right.str()
     << "\n";
}

void print_report(std::ostream& os, const RegimeReport& r) {
  os << to_string(r.tag) << ": " << to_string(r.verdict) << "\n";
  for (const auto& c : r.conditions) print_condition(os, c);
  if (!r.branches.empty()) {
    os << "  alternatives:\n";
    for (const auto& c : r.branches) os << "    [" << (c.satisfied ? "yes" : " no") << "] " << c.name << "\n";
  }
  if (!r.q_intervals.empty()) {
    os << "  q intervals:";
    for (const auto& iv : r.q_intervals) os << " " << iv.str();
    os << "\n";
  }
  for (const auto& f : r.flags) os << "  flag: " << f << "\n";
}

// ---------------------------------------------------------------- dispatch

Json load_config(const std::string& path) { return io::read_json(path); }

fs::path config_base(const std::string& path) {
  const fs::path p = fs::absolute(path);
  return p.parent_path();
}

void print(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

Json dispatch_config(const std::string& command, const Json& config, const fs::path& base, const fs::path& out_dir) {
  if (command == "simulate") return cmd_simulate(parse_simulate(config, base), out_dir);
  if (command == "scatter") return cmd_scatter(parse_simulate(config, base, false), out_dir);
  if (command == "picard") return cmd_picard(parse_picard(config, base), out_dir);
  if (command == "strichartz") return cmd_strichartz(parse_strichartz(config), out_dir);
  if (command == "inequality") {
    if (!config.is_object() || !config.contains("tag") || !config.at("tag").is_string())
      throw std::invalid_argument("inequality config needs a string 'tag'");
    Json rest = config;
    rest.erase("tag");
    return cmd_inequality(parse_inequality(parse_inequality_tag(config.at("tag").get<std::string>()), rest), &out_dir);
  }
  throw std::invalid_argument("unknown command '" + command + "' in manifest");
}

} // namespace

// ---------------------------------------------------------------- parsing

ModelParams parse_params(const Json& j) {
  Obj o(j, "params", {"N", "b", "q", "eps"});
  ModelParams p;
  p.N = o.integer("N");
  p.b = o.scalar("b");
  p.q = o.scalar("q");
  p.eps = o.integer("eps", 1);
  p.validate();
  return p;
}

TestFamily family_at(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw std::invalid_argument(where + ": expected an object with a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  TestFamily f;
  if (kind == "Gaussian") {
    Obj o(j, where, {"kind", "a", "amplitude"});
    f = TestFamily::gaussian(o.number("a"), o.number("amplitude", 1.0));
  } else if (kind == "RingBump") {
    Obj o(j, where, {"kind", "c", "sigma", "amplitude"});
    f = TestFamily::ring_bump(o.number("c"), o.number("sigma"), o.number("amplitude", 1.0));
  } else if (kind == "PolyGaussian") {
    Obj o(j, where, {"kind", "m", "a", "amplitude"});
    f = TestFamily::poly_gaussian(o.integer("m"), o.number("a"), o.number("amplitude", 1.0));
  } else {
    throw std::invalid_argument(where + ".kind: unknown kind '" + kind +
                                "' (expected Gaussian, RingBump, PolyGaussian)");
  }
  f.validate();
  return f;
}

TestFamily parse_family(const Json& j) { return family_at(j, "family"); }

void parse_grid(const Json& j, int N, double& R, int& M) {
  Obj o(j, "grid", {"N", "R", "M"});
  if (o.has("N") && o.integer("N") != N)
    throw std::invalid_argument("grid.N = " + std::to_string(o.integer("N")) + " differs from params.N = " +
                                std::to_string(N));
  R = o.number("R");
  M = o.integer("M");
  if (!(R > 0.0)) throw std::invalid_argument("grid.R must be > 0");
  if (M < 8) throw std::invalid_argument("grid.M must be >= 8");
}

SimulateConfig parse_simulate(const Json& j, const fs::path& base, bool allow_gn) {
  SimulateConfig c;
  EvolutionConfig& e = c.evolution;
  if (allow_gn) {
    Obj o(j, "config", {"params", "grid", "initial", "dt", "T", "stride", "threshold", "nonlinear", "store_snapshots",
                        "boundary_halt_fraction", "gn_constant"});
    if (o.has("gn_constant")) c.gn_constant = o.number("gn_constant");
  } else {
    Obj(j, "config", {"params", "grid", "initial", "dt", "T", "stride", "threshold", "nonlinear", "store_snapshots",
                      "boundary_halt_fraction"});
  }
  Obj o(j, "config", {"params", "grid", "initial", "dt", "T", "stride", "threshold", "nonlinear", "store_snapshots",
                      "boundary_halt_fraction", "gn_constant"});
  e.params = parse_params(o.at("params"));
  parse_grid(o.at("grid"), e.params.N, e.R, e.M);
  e.initial = parse_initial(o.at("initial"), o.path("initial"), build_grid(e.params.N, e.R, e.M), base,
                            c.initial_file);
  e.dt = o.number("dt");
  e.T = o.number("T");
  e.stride = o.integer("stride", 1);
  e.threshold = o.number("threshold", 1e6);
  e.nonlinear = o.boolean("nonlinear", true);
  e.store_snapshots = o.boolean("store_snapshots", false);
  e.boundary_halt_fraction = o.number("boundary_halt_fraction", 1e-4);
  e.validate();
  if (!(e.dt < e.T)) throw std::invalid_argument("config: dt must be smaller than T");
  return c;
}

PicardConfig parse_picard(const Json& j, const fs::path& base) {
  Obj o(j, "config", {"params", "grid", "initial", "T", "n_t", "tol", "max_iter", "reference_dt"});
  PicardConfig c;
  c.params = parse_params(o.at("params"));
  parse_grid(o.at("grid"), c.params.N, c.R, c.M);
  c.initial = parse_initial(o.at("initial"), o.path("initial"), build_grid(c.params.N, c.R, c.M), base,
                            c.initial_file);
  c.T = o.number("T");
  c.n_t = o.integer("n_t");
  c.tol = o.number("tol", 1e-12);
  c.max_iter = o.integer("max_iter", 50);
  if (o.has("reference_dt")) c.reference_dt = o.number("reference_dt");
  if (!(c.T > 0.0)) throw std::invalid_argument("config.T must be > 0");
  if (c.n_t < 1) throw std::invalid_argument("config.n_t must be >= 1");
  if (!(c.tol > 0.0)) throw std::invalid_argument("config.tol must be > 0");
  if (c.max_iter < 1) throw std::invalid_argument("config.max_iter must be >= 1");
  if (c.reference_dt) {
    const double ratio = (c.T / c.n_t) / *c.reference_dt;
    if (!(*c.reference_dt > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw std::invalid_argument("config.reference_dt must divide T/n_t");
  }
  return c;
}

StrichartzConfig parse_strichartz(const Json& j) {
  Obj o(j, "config", {"grid", "s", "pairs", "initial", "families", "T", "n_t"});
  StrichartzConfig c;
  {
    Obj g(o.at("grid"), "grid", {"N", "R", "M"});
    c.N = g.integer("N");
    if (c.N < 1) throw std::invalid_argument("grid.N must be >= 1");
  }
  parse_grid(o.at("grid"), c.N, c.R, c.M);
  c.s = o.number("s", 0.0);
  c.T = o.number("T");
  c.n_t = o.integer("n_t", 100);
  if (!(c.T > 0.0)) throw std::invalid_argument("config.T must be > 0");
  if (c.n_t < 1) throw std::invalid_argument("config.n_t must be >= 1");

  if (o.has("initial") == o.has("families"))
    throw std::invalid_argument("config: give exactly one of 'initial' (one family) or 'families' (a list)");
  if (o.has("initial")) {
    c.data.push_back(family_at(o.at("initial"), "config.initial"));
  } else {
    const Json& list = o.at("families");
    if (!list.is_array() || list.empty()) throw std::invalid_argument("config.families: expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i)
      c.data.push_back(family_at(list[i], "config.families[" + std::to_string(i) + "]"));
  }

  if (o.has("pairs")) {
    const Json& list = o.at("pairs");
    if (!list.is_array() || list.empty()) throw std::invalid_argument("config.pairs: expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "config.pairs[" + std::to_string(i) + "]";
      const Json& pr = list[i];
      if (!pr.is_array() || pr.size() != 2) throw std::invalid_argument(where + ": expected [p, r]");
      c.pairs.push_back({extended_of(pr[0], where + ".p"), Obj::scalar_of(pr[1], where + ".r")});
    }
  } else {
    const Scalar s = Scalar::from_decimal_double(c.s);
    if (s == Scalar(0)) c.pairs.push_back({Extended::infinity(), Scalar(2)});
    for (const auto& pr : interior_pairs(c.N, s)) c.pairs.push_back(pr);
  }
  return c;
}

InequalityConfig parse_inequality(InequalityTag tag, const Json& j) {
  Obj o(j, "config", {"params", "N", "s", "rho", "grid", "families"});
  InequalityConfig c;
  c.tag = tag;
  if (o.has("params")) {
    c.args.params = parse_params(o.at("params"));
    c.N = c.args.params->N;
    if (o.has("N") && o.integer("N") != c.N) throw std::invalid_argument("config.N differs from params.N");
  } else {
    c.N = o.integer("N", 5);
  }
  if (c.N < 1) throw std::invalid_argument("config.N must be >= 1");
  c.args.s = o.number("s", tag == InequalityTag::Hardy ? 1.0 : 0.5);
  c.args.rho = o.number("rho", 2.0);
  if (o.has("grid")) parse_grid(o.at("grid"), c.N, c.R, c.M);
  if (o.has("families")) {
    const Json& list = o.at("families");
    if (!list.is_array()) throw std::invalid_argument("config.families: expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      c.families.push_back(family_at(list[i], "config.families[" + std::to_string(i) + "]"));
    if (c.families.empty()) throw std::invalid_argument("config.families: empty family list");
  }
  if (tag == InequalityTag::GagliardoNirenberg && !c.args.params)
    throw std::invalid_argument("gn needs model parameters (--b, --q or a 'params' object)");
  return c;
}

Json to_json(const SimulateConfig& c) {
  const EvolutionConfig& e = c.evolution;
  Json j{{"params", params_json(e.params)},
         {"grid", grid_json(e.params.N, e.R, e.M)},
         {"initial", initial_json(e.initial, c.initial_file)},
         {"dt", e.dt},
         {"T", e.T},
         {"stride", e.stride},
         {"threshold", e.threshold},
         {"nonlinear", e.nonlinear},
         {"store_snapshots", e.store_snapshots},
         {"boundary_halt_fraction", e.boundary_halt_fraction}};
  if (c.gn_constant) j["gn_constant"] = *c.gn_constant;
  return j;
}

Json to_json(const PicardConfig& c) {
  Json j{{"params", params_json(c.params)},
         {"grid", grid_json(c.params.N, c.R, c.M)},
         {"initial", initial_json(c.initial, c.initial_file)},
         {"T", c.T},
         {"n_t", c.n_t},
         {"tol", c.tol},
         {"max_iter", c.max_iter}};
  if (c.reference_dt) j["reference_dt"] = *c.reference_dt;
  return j;
}

Json to_json(const StrichartzConfig& c) {
  Json pairs = Json::array();
  for (const auto& pr : c.pairs)
    pairs.push_back({pr.p.is_infinite() ? Json("inf") : scalar_json(pr.p.finite()), scalar_json(pr.r)});
  Json families = Json::array();
  for (const auto& f : c.data) families.push_back(io::to_json(f));
  return Json{{"grid", grid_json(c.N, c.R, c.M)}, {"s", c.s},     {"pairs", pairs},
              {"families", families},             {"T", c.T},     {"n_t", c.n_t}};
}

Json to_json(const InequalityConfig& c) {
  Json j{{"N", c.N}, {"s", c.args.s}, {"rho", c.args.rho}, {"grid", grid_json(c.N, c.R, c.M)}};
  if (c.args.params) j["params"] = params_json(*c.args.params);
  if (!c.families.empty()) {
    Json families = Json::array();
    for (const auto& f : c.families) families.push_back(io::to_json(f));
    j["families"] = families;
  }
  return j;
}

// ---------------------------------------------------------------- commands

Json cmd_regimes(const ModelParams& params, bool small_mass, std::ostream& text) {
  params.validate();
  const CriticalData crit = critical_data(params);
  const std::vector<RegimeReport> reports{classify_energy_local(params), classify_h1_local(params),
                                          classify_small_data_global(params),
                                          classify_global_extension(params, small_mass)};

  text << params.str() << (small_mass ? " (small mass)" : "") << "\n";
  text << "s_c = " << crit.s_c.str() << "   q_m = " << crit.q_m.str() << "   q_e = " << crit.q_e.str()
       << "   D = " << crit.D.str() << "\n\n";
  for (const auto& r : reports) {
    print_report(text, r);
    text << "\n";
  }

  Json j{{"params", io::to_json(params)}, {"small_mass", small_mass}, {"critical", io::to_json(crit)}};
  j["reports"] = Json::array();
  for (const auto& r : reports) j["reports"].push_back(io::to_json(r));
  try {
    const auto triple = scattering_triple(params);
    j["scattering_triple"] = io::to_json(triple);
    text << "scattering triple: nu = " << triple.nu.str() << ", r = " << triple.r.str() << ", s_nu = "
         << triple.s_nu.str() << ", p = " << triple.p.str() << ", k = " << triple.k.str() << ", m = "
         << triple.m.str() << "\n";
  } catch (const HypothesisError& e) {
    j["scattering_triple"] = nullptr;
    text << "scattering triple: not available (" << e.what() << ")\n";
  }
  return j;
}

Json cmd_inequality(const InequalityConfig& config, const fs::path* out_dir) {
  check_ratio_hypothesis(config.tag, config.N, config.args);
  const SpectralLaplacian op(build_grid(config.N, config.R, config.M), BasisAccuracy::Lapack);
  const auto families = config.families.empty() ? default_families(config.R) : config.families;
  const RatioReport rep = sweep(op, config.tag, families, config.args);

  Json summary = io::to_json(rep);
  summary["grid"] = io::to_json(op.grid());
  summary.erase("ratios");
  const auto worst = std::max_element(rep.samples.begin(), rep.samples.end(),
                                      [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  summary["argmax"] = worst->member.describe();
  if (config.tag == InequalityTag::Hardy && config.args.s == 1.0 && config.args.rho == 2.0 && config.N > 2) {
    const double ceiling = 2.0 / (config.N - 2);
    summary["classical_ceiling"] = ceiling;
    summary["below_ceiling"] = rep.max_ratio <= ceiling + 1e-3;
  }
  if (out_dir) {
    prepare_dir(*out_dir);
    Json cfg = to_json(config);
    cfg["tag"] = to_string(config.tag);
    const std::string hash = io::manifest_hash("inequality", cfg);
    write_text(*out_dir / "sweep.csv", [&](std::ostream& os) { io::write_sweep_csv(os, rep, hash); });
    finish(*out_dir, "inequality", cfg, {"sweep.csv"}, summary);
  }
  return summary;
}

Json cmd_simulate(const SimulateConfig& config, const fs::path& out_dir) {
  const EvolutionConfig& e = config.evolution;
  if (config.gn_constant && e.params.eps != -1)
    throw HypothesisError("gn_constant given: the global bound check applies to the focusing case eps = -1 only");
  const SpectralLaplacian op(build_grid(e.params.N, e.R, e.M));
  const TrajectoryRecord rec = evolve(op, e);

  Json summary = trajectory_summary(rec, e.params);
  summary["params"] = io::to_json(e.params);
  summary["grid"] = io::to_json(op.grid());
  summary["regimes"] = regime_verdicts(e.params);
  if (e.store_snapshots) {
    double deviation = 0.0;
    for (std::size_t i = 0; i < rec.times.size(); ++i)
      deviation = std::max(deviation,
                           std::sqrt(mass(rec.snapshots[i] - free_propagate(op, rec.snapshots[0], rec.times[i]))));
    summary["free_flow_deviation"] = deviation;
  }
  if (config.gn_constant) summary["global_bound"] = io::to_json(global_bound_check(rec, e.params, config.gn_constant));

  prepare_dir(out_dir);
  const Json cfg = to_json(config);
  const std::string hash = io::manifest_hash("simulate", cfg);
  std::vector<std::string> outputs{"trajectory.csv", "final_field.csv"};
  write_text(out_dir / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, rec, hash); });
  write_text(out_dir / "final_field.csv", [&](std::ostream& os) { io::write_field_csv(os, rec.final_state, hash); });
  if (e.store_snapshots) {
    prepare_dir(out_dir / "snapshots");
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
      std::ostringstream name;
      name << "snapshots/snapshot_" << std::setw(5) << std::setfill('0') << i << ".csv";
      write_text(out_dir / name.str(), [&](std::ostream& os) { io::write_field_csv(os, rec.snapshots[i], hash); });
      outputs.push_back(name.str());
    }
  }
  finish(out_dir, "simulate", cfg, outputs, summary);
  return summary;
}

Json cmd_picard(const PicardConfig& config, const fs::path& out_dir) {
  const SpectralLaplacian op(build_grid(config.params.N, config.R, config.M));
  EvolutionConfig ref;
  ref.params = config.params;
  ref.R = config.R;
  ref.M = config.M;
  ref.initial = config.initial;
  const RadialField v0 = initial_field(ref, op.grid_ptr());

  PicardResult res = picard_solve(op, v0, config.T, config.params, config.n_t, config.tol, config.max_iter);
  PicardDiagnostics& diag = res.diagnostics;

  // split-step reference sampled at the Picard times
  const double sample_dt = config.T / config.n_t;
  ref.dt = config.reference_dt.value_or(sample_dt);
  ref.T = config.T;
  ref.stride = static_cast<int>(std::lround(sample_dt / ref.dt));
  ref.store_snapshots = true;
  ref.threshold = std::numeric_limits<double>::max();
  const TrajectoryRecord rec = evolve(op, ref);
  Json reference{{"dt", ref.dt}, {"halt_reason", to_string(rec.halt)}, {"unreliable", rec.unreliable}};
  if (rec.times.size() == res.trajectory.times.size()) {
    Trajectory split;
    split.times = rec.times;
    split.fields = rec.snapshots;
    diag.mismatch = sup_l2_distance(split, res.trajectory);
  }

  Json summary = io::to_json(diag);
  const double budget = 10.0 * (ref.dt * ref.dt + sample_dt);
  summary["budget"] = budget;
  summary["within_budget"] = diag.mismatch ? Json(*diag.mismatch <= budget) : Json(nullptr);
  bool contracting = true;
  for (double r : diag.ratios) contracting = contracting && r < 1.0;
  summary["contracting"] = contracting;
  summary["reference"] = reference;
  summary["params"] = io::to_json(config.params);
  summary["grid"] = io::to_json(op.grid());
  summary["initial_h2norm"] = h2_bracket_norm(op, 2.0, v0);

  prepare_dir(out_dir);
  const Json cfg = to_json(config);
  const std::string hash = io::manifest_hash("picard", cfg);
  write_text(out_dir / "picard_final.csv",
             [&](std::ostream& os) { io::write_field_csv(os, res.trajectory.fields.back(), hash); });
  finish(out_dir, "picard", cfg, {"picard_final.csv"}, summary);
  if (diag.diverged) throw NumericalError("picard: " + diag.message);
  return summary;
}

Json cmd_strichartz(const StrichartzConfig& config, const fs::path& out_dir) {
  const Scalar s = Scalar::from_decimal_double(config.s);
  for (const auto& pr : config.pairs)
    if (!is_admissible(config.N, s, pr.p, pr.r))
      throw HypothesisError("strichartz: pair (p=" + pr.p.str() + ", r=" + pr.r.str() + ") is not " + s.str() +
                            "-admissible in dimension " + std::to_string(config.N));
  const SpectralLaplacian op(build_grid(config.N, config.R, config.M), BasisAccuracy::Lapack);

  std::vector<StrichartzReport> reports;
  for (const auto& f : config.data)
    reports.push_back(strichartz_ratio(op, f.generate(op.grid_ptr()), config.s, config.pairs, config.T, config.n_t));

  Json summary{{"s", config.s}, {"T", config.T}, {"n_t", config.n_t}, {"grid", io::to_json(op.grid())}};
  Json pairs = Json::array();
  for (const auto& pr : config.pairs) pairs.push_back(io::to_json(pr));
  summary["pairs"] = pairs;
  double best = 0.0;
  Json per_pair_max = Json::array();
  for (std::size_t k = 0; k < config.pairs.size(); ++k) {
    double m = 0.0;
    for (const auto& r : reports) m = std::max(m, r.ratios[k]);
    per_pair_max.push_back(m);
    best = std::max(best, m);
  }
  summary["max_ratio_per_pair"] = per_pair_max;
  summary["max_ratio"] = best;
  summary["data"] = config.data.size();

  prepare_dir(out_dir);
  const Json cfg = to_json(config);
  const std::string hash = io::manifest_hash("strichartz", cfg);
  write_text(out_dir / "strichartz.csv", [&](std::ostream& os) {
    os << "# manifest_hash=" << hash << "\n";
    os << "datum,kind,a,c,sigma,m,amplitude,p,r,ratio\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& f = config.data[i];
      for (std::size_t k = 0; k < config.pairs.size(); ++k)
        os << i << ',' << to_string(f.kind) << ',' << io::format_double(f.a) << ',' << io::format_double(f.c) << ','
           << io::format_double(f.sigma) << ',' << f.m << ',' << io::format_double(f.amplitude) << ','
           << config.pairs[k].p.str() << ',' << config.pairs[k].r.str() << ','
           << io::format_double(reports[i].ratios[k]) << '\n';
    }
  });
  finish(out_dir, "strichartz", cfg, {"strichartz.csv"}, summary);
  return summary;
}

Json cmd_scatter(const SimulateConfig& config, const fs::path& out_dir) {
  EvolutionConfig e = config.evolution;
  e.store_snapshots = true;
  const SpectralLaplacian op(build_grid(e.params.N, e.R, e.M));
  const TrajectoryRecord rec = evolve(op, e);
  const ScatteringReport sc = scattering_cauchy_check(op, rec);

  Json summary = trajectory_summary(rec, e.params);
  summary["params"] = io::to_json(e.params);
  summary["grid"] = io::to_json(op.grid());
  summary["small_data_global"] = to_string(classify_small_data_global(e.params).verdict);
  Json increments = Json::array();
  for (double d : sc.increments) increments.push_back(d);
  summary["increments"] = increments;
  summary["final_third_start_time"] = sc.times[sc.final_third_start];
  summary["nonincreasing_final_third"] = sc.nonincreasing_final_third;
  summary["profile_h2norm"] = sc.profile_h2_norm;

  // ‖v‖ against the free flow on quadrature-representable s_c-admissible pairs
  Json echo{{"s_c", io::to_json(critical_data(e.params).s_c)}};
  try {
    const auto pairs = interior_pairs(e.params.N, critical_data(e.params).s_c);
    const auto ratios = strichartz_echo(op, rec, pairs);
    Json list = Json::array();
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      Json pj = io::to_json(pairs[k]);
      pj["ratio"] = ratios[k];
      list.push_back(pj);
      worst = std::max(worst, ratios[k]);
    }
    echo["pairs"] = list;
    echo["max_ratio"] = worst;
  } catch (const HypothesisError& err) {
    echo["unavailable"] = err.what();
  }
  double sup_l2 = 0.0;
  for (double m : rec.mass) sup_l2 = std::max(sup_l2, std::sqrt(m));
  echo["sup_l2_over_initial"] = rec.mass.front() > 0.0 ? sup_l2 / std::sqrt(rec.mass.front()) : 0.0;
  summary["strichartz_echo"] = echo;

  prepare_dir(out_dir);
  const Json cfg = to_json(config);
  const std::string hash = io::manifest_hash("scatter", cfg);
  write_text(out_dir / "increments.csv", [&](std::ostream& os) { io::write_increments_csv(os, sc, hash); });
  write_text(out_dir / "profile.csv", [&](std::ostream& os) { io::write_field_csv(os, sc.profile, hash); });
  write_text(out_dir / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, rec, hash); });
  finish(out_dir, "scatter", cfg, {"increments.csv", "profile.csv", "trajectory.csv"}, summary);
  return summary;
}

// ---------------------------------------------------------------- entry point

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial laboratory for the inhomogeneous biharmonic NLS"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version());

  int N = 0;
  std::string b_text = "0";
  std::string q_text;
  int eps = 1;
  bool small_mass = false;
  std::string json_path;
  auto* regimes = app.add_subcommand("regimes", "Classify (N, b, q, eps) against the well-posedness hypotheses");
  regimes->add_option("--N", N, "dimension")->required();
  regimes->add_option("--b", b_text, "inhomogeneity exponent, decimal or fraction");
  regimes->add_option("--q", q_text, "nonlinearity exponent, decimal or fraction")->required();
  regimes->add_option("--eps", eps, "+1 defocusing, -1 focusing");
  regimes->add_flag("--small-mass", small_mass, "assume the mass-critical small-mass condition holds");
  regimes->add_option("--json", json_path, "also write the report as JSON");

  std::string tag_text;
  std::string config_path;
  std::string out_dir;
  std::optional<int> iN;
  std::optional<std::string> ib, iq;
  std::optional<int> ieps, iM;
  std::optional<double> is, irho, iR;
  auto* inequality = app.add_subcommand("inequality", "Sweep an inequality ratio over test profiles");
  inequality->add_option("tag", tag_text, "strauss, fractional-strauss, hardy, gn, interpolation")->required();
  inequality->add_option("--config", config_path, "JSON configuration");
  inequality->add_option("--N", iN, "dimension");
  inequality->add_option("--b", ib, "inhomogeneity exponent (gn)");
  inequality->add_option("--q", iq, "nonlinearity exponent (gn)");
  inequality->add_option("--eps", ieps, "sign (gn; does not affect the ratio)");
  inequality->add_option("--s", is, "regularity s");
  inequality->add_option("--rho", irho, "Lebesgue exponent rho");
  inequality->add_option("--R", iR, "grid radius");
  inequality->add_option("--M", iM, "grid points");
  inequality->add_option("--out", out_dir, "write sweep.csv, summary.json and manifest.json here");

  std::map<std::string, CLI::App*> config_commands;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"simulate", "Split-step evolution with conservation monitors"},
           {"picard", "Picard iteration of the Duhamel map against a split-step reference"},
           {"strichartz", "Empirical Strichartz ratios of the free flow"},
           {"scatter", "Scattering-profile Cauchy check"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    config_commands[name] = sub;
  }
  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest.json");
  rerun->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", out_dir, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (regimes->parsed()) {
      ModelParams p{N, Scalar::parse(b_text), Scalar::parse(q_text), eps};
      const Json j = cmd_regimes(p, small_mass, out);
      if (!json_path.empty()) io::write_json(json_path, j);
      return kExitOk;
    }
    if (inequality->parsed()) {
      const InequalityTag tag = parse_inequality_tag(tag_text);
      Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
      if (!cfg.is_object()) throw std::invalid_argument("config: expected an object");
      const bool gn = tag == InequalityTag::GagliardoNirenberg;
      if (gn && (iN || ib || iq || ieps)) {
        Json params = cfg.contains("params") ? cfg["params"] : Json::object();
        if (iN) params["N"] = *iN;
        if (ib) params["b"] = *ib;
        if (iq) params["q"] = *iq;
        if (ieps) params["eps"] = *ieps;
        if (!params.contains("b")) params["b"] = 0;
        cfg["params"] = params;
        cfg.erase("N");
      } else {
        if (ib || iq || ieps) throw std::invalid_argument("--b, --q and --eps apply to the gn inequality only");
        if (iN) cfg["N"] = *iN;
      }
      if (is) cfg["s"] = *is;
      if (irho) cfg["rho"] = *irho;
      if (iR || iM) {
        Json grid = cfg.contains("grid") ? cfg["grid"] : Json{{"R", 12.0}, {"M", 2000}};
        if (iR) grid["R"] = *iR;
        if (iM) grid["M"] = *iM;
        cfg["grid"] = grid;
      }
      const auto config = parse_inequality(tag, cfg);
      const fs::path dir(out_dir);
      print(out, cmd_inequality(config, out_dir.empty() ? nullptr : &dir));
      return kExitOk;
    }
    for (const auto& [name, sub] : config_commands) {
      if (!sub->parsed()) continue;
      print(out, dispatch_config(name, load_config(config_path), config_base(config_path), out_dir));
      return kExitOk;
    }
    if (rerun->parsed()) {
      const Json manifest = load_config(manifest_path);
      Obj o(manifest, "manifest", {"command", "config", "version", "manifest_hash", "outputs"});
      const std::string command = o.string("command");
      print(out, dispatch_config(command, o.at("config"), config_base(manifest_path), out_dir));
      if (o.has("version") && o.string("version") != io::version())
        err << "note: manifest was written by version " << o.string("version") << ", this is " << io::version()
            << "\n";
      return kExitOk;
    }
  } catch (const HypothesisError& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const Json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitParse;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

} // namespace bilab::cli
