#include "bilab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#ifndef BILAB_VERSION
#define BILAB_VERSION "unknown"
#endif

namespace bilab::io {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void hash_line(std::ostream& os, const std::string& hash) {
  if (!hash.empty()) os << "# manifest_hash=" << hash << "\n";
}

double parse_cell(std::string_view cell, int line) {
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::invalid_argument("field csv line " + std::to_string(line) + ": malformed number '" +
                                std::string(cell) + "'");
  return v;
}

} // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(std::ostream& os, const RadialField& u, const std::string& hash) {
  hash_line(os, hash);
  os << "r,re,im\n";
  const auto& r = u.grid->nodes();
  for (int j = 0; j < u.size(); ++j)
    os << format_double(r[j]) << ',' << format_double(u.values[j].real()) << ','
       << format_double(u.values[j].imag()) << '\n';
}

RadialField read_field_csv(std::istream& is, GridPtr grid) {
  RadialField u = RadialField::zeros(grid);
  const auto& nodes = grid->nodes();
  const double tol = 1e-9 * std::max(1.0, grid->radius());
  std::string line;
  int lineno = 0;
  bool header = false;
  int row = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "r,re,im") throw std::invalid_argument("field csv: expected header 'r,re,im', got '" + line + "'");
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw std::invalid_argument("field csv line " + std::to_string(lineno) + ": expected three columns");
    if (row >= grid->size()) throw std::invalid_argument("field csv: more rows than grid points");
    const std::string_view view(line);
    const double r = parse_cell(view.substr(0, c1), lineno);
    const double re = parse_cell(view.substr(c1 + 1, c2 - c1 - 1), lineno);
    const double im = parse_cell(view.substr(c2 + 1), lineno);
    if (std::abs(r - nodes[row]) > tol)
      throw std::invalid_argument("field csv line " + std::to_string(lineno) + ": radius " + format_double(r) +
                                  " does not match grid node " + format_double(nodes[row]));
    u.values[row++] = Complex(re, im);
  }
  if (!header) throw std::invalid_argument("field csv: missing header");
  if (row != grid->size())
    throw std::invalid_argument("field csv: " + std::to_string(row) + " rows for a grid of " +
                                std::to_string(grid->size()) + " points");
  if (!u.finite()) throw std::invalid_argument("field csv: non-finite values");
  return u;
}

RadialField read_field_csv(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open field file " + path.string());
  return read_field_csv(in, std::move(grid));
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec, const std::string& hash) {
  hash_line(os, hash);
  os << "t,mass,energy,h2norm,boundary_mass\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    os << format_double(rec.times[i]) << ',' << format_double(rec.mass[i]) << ',' << format_double(rec.energy[i])
       << ',' << format_double(rec.h2_norm[i]) << ',' << format_double(rec.boundary_mass[i]) << '\n';
}

void write_sweep_csv(std::ostream& os, const RatioReport& rep, const std::string& hash) {
  hash_line(os, hash);
  os << "kind,a,c,sigma,m,amplitude,ratio,scale_residual\n";
  for (const auto& s : rep.samples) {
    const auto& f = s.member;
    os << to_string(f.kind) << ',' << format_double(f.a) << ',' << format_double(f.c) << ','
       << format_double(f.sigma) << ',' << f.m << ',' << format_double(f.amplitude) << ','
       << format_double(s.ratio) << ',' << format_double(s.scale_residual) << '\n';
  }
}

void write_increments_csv(std::ostream& os, const ScatteringReport& rep, const std::string& hash) {
  hash_line(os, hash);
  os << "t,increment\n";
  for (std::size_t i = 0; i < rep.increments.size(); ++i)
    os << format_double(rep.times[i]) << ',' << format_double(rep.increments[i]) << '\n';
}

Json to_json(const Scalar& v) {
  if (v.exact() && v.rational()->den() == 1) return v.rational()->num();
  return num(v.value());
}

Json to_json(const Extended& v) {
  if (v.is_infinite()) return "inf";
  return to_json(v.finite());
}

Json to_json(const ModelParams& p) {
  return Json{{"N", p.N}, {"b", to_json(p.b)}, {"q", to_json(p.q)}, {"eps", p.eps}};
}

Json to_json(const CriticalData& c) {
  return Json{{"s_c", to_json(c.s_c)}, {"q_m", to_json(c.q_m)}, {"q_e", to_json(c.q_e)}, {"D", to_json(c.D)}};
}

Json to_json(const RegimeReport& r) {
  Json conditions = Json::array();
  for (const auto& c : r.conditions)
    conditions.push_back({{"name", c.name}, {"satisfied", c.satisfied}, {"left", to_json(c.left)},
                          {"right", to_json(c.right)}, {"left_exact", c.left.str()}, {"right_exact", c.right.str()}});
  Json branches = Json::array();
  for (const auto& c : r.branches)
    branches.push_back({{"name", c.name}, {"satisfied", c.satisfied}});
  Json intervals = Json::array();
  for (const auto& iv : r.q_intervals) intervals.push_back(iv.str());
  return Json{{"theorem", to_string(r.tag)}, {"verdict", to_string(r.verdict)}, {"conditions", conditions},
              {"q_intervals", intervals}, {"flags", r.flags}, {"branches", branches}};
}

Json to_json(const ScatteringPairTriple& t) {
  return Json{{"nu", to_json(t.nu)},   {"r", to_json(t.r)},   {"s_nu", to_json(t.s_nu)},
              {"p", to_json(t.p)},     {"k", to_json(t.k)},   {"m", to_json(t.m)},
              {"residuals", {num(t.residuals[0]), num(t.residuals[1]), num(t.residuals[2])}},
              {"in_window", {t.in_window[0], t.in_window[1], t.in_window[2]}}};
}

Json to_json(const RadialGrid& g) { return Json{{"N", g.dimension()}, {"R", g.radius()}, {"M", g.size()}}; }

Json to_json(const TestFamily& f) {
  Json j{{"kind", to_string(f.kind)}, {"amplitude", f.amplitude}};
  switch (f.kind) {
  case TestFamily::Kind::Gaussian: j["a"] = f.a; break;
  case TestFamily::Kind::RingBump:
    j["c"] = f.c;
    j["sigma"] = f.sigma;
    break;
  case TestFamily::Kind::PolyGaussian:
    j["m"] = f.m;
    j["a"] = f.a;
    break;
  }
  return j;
}

Json to_json(const RatioReport& r) {
  Json ratios = Json::array();
  for (const auto& s : r.samples) ratios.push_back(num(s.ratio));
  Json args{{"s", r.args.s}, {"rho", r.args.rho}};
  if (r.args.params) args["params"] = to_json(*r.args.params);
  return Json{{"inequality", to_string(r.tag)},
              {"family", r.family},
              {"args", args},
              {"samples", r.samples.size()},
              {"ratios", ratios},
              {"max_ratio", num(r.max_ratio)},
              {"scale_invariance_residual", num(r.scale_invariance_residual)}};
}

Json to_json(const StrichartzPair& p) { return Json{{"p", to_json(p.p)}, {"r", to_json(p.r)}}; }

Json to_json(const StrichartzReport& r) {
  Json pairs = Json::array();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    Json pj = to_json(r.pairs[i]);
    pj["ratio"] = num(r.ratios[i]);
    pairs.push_back(pj);
  }
  return Json{{"s", r.s}, {"T", r.T}, {"n_t", r.n_t}, {"pairs", pairs}, {"max_ratio", num(r.max_ratio)}};
}

Json to_json(const PicardDiagnostics& d) {
  Json distances = Json::array();
  for (double x : d.distances) distances.push_back(num(x));
  Json ratios = Json::array();
  for (double x : d.ratios) ratios.push_back(num(x));
  Json pairs = Json::array();
  for (const auto& p : d.pairs) pairs.push_back(to_json(p));
  Json j{{"distances", distances}, {"ratios", ratios},         {"pairs", pairs},
         {"converged", d.converged}, {"diverged", d.diverged}, {"iterations", d.iterations},
         {"tol", d.tol},             {"message", d.message}};
  j["mismatch"] = d.mismatch ? num(*d.mismatch) : Json(nullptr);
  return j;
}

Json to_json(const GlobalBoundReport& r) {
  Json slack = Json::array();
  for (double x : r.slack) slack.push_back(num(x));
  Json j{{"gn_constant", r.gn_constant},
         {"D", r.D},
         {"subcritical", r.subcritical},
         {"initial_energy", num(r.initial_energy)},
         {"slack", slack},
         {"violations", r.violations},
         {"max_laplacian_norm", num(r.max_laplacian_norm)},
         {"below_ceiling", r.below_ceiling}};
  j["ceiling"] = r.ceiling ? num(*r.ceiling) : Json(nullptr);
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string manifest_hash(const std::string& command, const Json& config) {
  return sha256_hex(Json{{"command", command}, {"config", config}, {"version", version()}}.dump());
}

Json make_manifest(const std::string& command, const Json& config, const std::vector<std::string>& outputs) {
  return Json{{"command", command},
              {"config", config},
              {"version", version()},
              {"manifest_hash", manifest_hash(command, config)},
              {"outputs", outputs}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string version() { return BILAB_VERSION; }

} // namespace bilab::io
