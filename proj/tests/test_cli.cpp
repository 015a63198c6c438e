#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bilab/cli.hpp"

using namespace bilab;
using namespace bilab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = BILAB_CONFIG_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run bilab_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// A fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("bilab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Json summary(const std::string& dir) { return io::read_json(fs::path(dir) / "summary.json"); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Every regular file under a, relative path and bytes equal to its twin under b.
void check_identical_trees(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    CAPTURE(rel.string());
    REQUIRE(fs::exists(b / rel));
    CHECK(slurp(entry.path()) == slurp(b / rel));
    ++files;
  }
  std::size_t other = 0;
  for (const auto& entry : fs::recursive_directory_iterator(b))
    if (entry.is_regular_file()) ++other;
  CHECK(files == other);
  CHECK(files > 0);
}

} // namespace

TEST_CASE("regimes prints verdicts and always exits 0") {
  auto r = bilab_run({"regimes", "--N", "6", "--b", "1", "--q", "3", "--eps", "-1"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("EnergyLocal") != std::string::npos);
  CHECK(r.out.find("SmallDataGlobal") != std::string::npos);

  TempDir tmp("regimes");
  r = bilab_run({"regimes", "--N", "5", "--b", "0.1", "--q", "2", "--json", tmp / "r.json"});
  CHECK(r.code == kExitOk);
  const Json j = io::read_json(tmp / "r.json");
  bool found = false;
  for (const auto& rep : j.at("reports"))
    if (rep.at("theorem") == "EnergyLocal") {
      CHECK(rep.at("verdict") == "OutOfScope");
      found = true;
    }
  CHECK(found);

  r = bilab_run({"regimes", "--N", "6", "--b", "1", "--q", "6"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("small-data-only") != std::string::npos);
}

TEST_CASE("exit codes for malformed input and hypothesis violations") {
  CHECK(bilab_run({}).code == kExitParse);
  CHECK(bilab_run({"frobnicate"}).code == kExitParse);
  CHECK(bilab_run({"--help"}).code == kExitOk);
  CHECK(bilab_run({"regimes", "--N", "5", "--q", "abc"}).code == kExitParse);
  CHECK(bilab_run({"regimes", "--N", "0", "--q", "3"}).code == kExitParse);
  CHECK(bilab_run({"inequality", "nosuch"}).code == kExitParse);
  CHECK(bilab_run({"inequality", "hardy", "--b", "1"}).code == kExitParse);

  const auto r = bilab_run({"inequality", "strauss", "--N", "5", "--s", "0.25", "--M", "200"});
  CHECK(r.code == kExitHypothesis);
  CHECK(r.err.find("1/2") != std::string::npos);

  TempDir tmp("codes");
  CHECK(bilab_run({"simulate", "--config", tmp / "missing.json", "--out", tmp / "o"}).code == kExitParse);
  write_text(tmp.path / "broken.json", "{\"params\": ");
  CHECK(bilab_run({"simulate", "--config", tmp / "broken.json", "--out", tmp / "o"}).code == kExitParse);
  write_text(tmp.path / "s.json", R"({"grid": {"N": 6, "R": 40, "M": 200}, "s": 0, "pairs": [[5, 3]],
    "families": [{"kind": "Gaussian", "a": 1}], "T": 0.5, "n_t": 20})");
  const auto s = bilab_run({"strichartz", "--config", tmp / "s.json", "--out", tmp / "o"});
  CHECK(s.code == kExitHypothesis);
  CHECK(s.err.find("admissible") != std::string::npos);
}

TEST_CASE("unknown configuration keys are rejected by path") {
  Json cfg = io::read_json(kConfigs / "linear.json");
  cfg["initial"]["radius"] = 3;
  TempDir tmp("unknown");
  write_text(tmp.path / "c.json", cfg.dump());
  const auto r = bilab_run({"simulate", "--config", tmp / "c.json", "--out", tmp / "o"});
  CHECK(r.code == kExitParse);
  CHECK(r.err.find("initial.radius") != std::string::npos);

  CHECK_THROWS_AS(parse_params(Json{{"N", 5}, {"b", 1}, {"q", 3}, {"eps", 1}, {"extra", 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_params(Json{{"N", 5}, {"b", 1}, {"q", "x/y"}, {"eps", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_params(Json{{"N", 5.5}, {"b", 1}, {"q", 3}, {"eps", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_params(Json{{"N", 5}, {"b", 1}, {"q", 3}, {"eps", 2}}), std::invalid_argument);
}

TEST_CASE("normalised configurations are fixed points of parse") {
  const fs::path base = kConfigs;
  for (const char* name : {"linear.json", "small_data.json", "focusing_blowup.json"}) {
    CAPTURE(name);
    const Json once = to_json(parse_simulate(io::read_json(kConfigs / name), base));
    CHECK(to_json(parse_simulate(once, base)) == once);
  }
  const Json picard = to_json(parse_picard(io::read_json(kConfigs / "picard.json"), base));
  CHECK(to_json(parse_picard(picard, base)) == picard);
  const Json strichartz = to_json(parse_strichartz(io::read_json(kConfigs / "strichartz.json")));
  CHECK(to_json(parse_strichartz(strichartz)) == strichartz);
  const Json ineq = to_json(parse_inequality(InequalityTag::Hardy, Json{{"N", 6}, {"s", 1}, {"rho", 2}}));
  CHECK(to_json(parse_inequality(InequalityTag::Hardy, ineq)) == ineq);
}

TEST_CASE("linear sanity config: free flow, conserved mass, hashed outputs") {
  TempDir tmp("linear");
  const auto r = bilab_run({"simulate", "--config", (kConfigs / "linear.json").string(), "--out", tmp / "a"});
  REQUIRE(r.code == kExitOk);
  const Json s = summary(tmp / "a");
  CHECK(s.at("max_mass_drift").get<double>() < 1e-12);
  CHECK(s.at("free_flow_deviation").get<double>() < 1e-12);
  CHECK(s.at("blowup_flag") == false);
  CHECK(s.at("halt_reason") == "none");

  const std::string hash = s.at("manifest_hash");
  const Json manifest = io::read_json(fs::path(tmp / "a") / "manifest.json");
  CHECK(manifest.at("manifest_hash") == hash);
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("version") == io::version());
  for (const auto& out : manifest.at("outputs")) {
    const fs::path p = fs::path(tmp / "a") / out.get<std::string>();
    CAPTURE(p.string());
    REQUIRE(fs::exists(p));
    if (p.extension() == ".csv") CHECK(slurp(p).rfind("# manifest_hash=" + hash + "\n", 0) == 0);
  }
  CHECK(fs::exists(fs::path(tmp / "a") / "snapshots"));

  // identical config, identical bytes; a rerun from the manifest reproduces them
  REQUIRE(bilab_run({"simulate", "--config", (kConfigs / "linear.json").string(), "--out", tmp / "b"}).code ==
          kExitOk);
  check_identical_trees(tmp / "a", tmp / "b");
  REQUIRE(bilab_run({"rerun", tmp / "a/manifest.json", "--out", tmp / "c"}).code == kExitOk);
  check_identical_trees(tmp / "a", tmp / "c");

  const auto sc = bilab_run({"scatter", "--config", (kConfigs / "linear.json").string(), "--out", tmp / "s"});
  REQUIRE(sc.code == kExitOk);
  for (const auto& d : summary(tmp / "s").at("increments")) CHECK(d.get<double>() < 1e-12);
}

TEST_CASE("initial data read from a field file") {
  TempDir tmp("file");
  REQUIRE(bilab_run({"simulate", "--config", (kConfigs / "linear.json").string(), "--out", tmp / "a"}).code ==
          kExitOk);
  Json cfg = io::read_json(kConfigs / "linear.json");
  cfg["initial"] = Json{{"file", "a/final_field.csv"}};
  write_text(tmp.path / "from_file.json", cfg.dump());
  const auto r = bilab_run({"simulate", "--config", tmp / "from_file.json", "--out", tmp / "b"});
  REQUIRE(r.code == kExitOk);
  const Json a = summary(tmp / "a");
  const Json b = summary(tmp / "b");
  CHECK(b.at("initial").at("mass").get<double>() ==
        doctest::Approx(a.at("final").at("mass").get<double>()).epsilon(1e-14));
  // the normalised config records the absolute path
  const Json manifest = io::read_json(fs::path(tmp / "b") / "manifest.json");
  CHECK(fs::path(manifest.at("config").at("initial").at("file").get<std::string>()).is_absolute());

  cfg["initial"] = Json{{"file", "nowhere.csv"}};
  write_text(tmp.path / "missing.json", cfg.dump());
  CHECK(bilab_run({"simulate", "--config", tmp / "missing.json", "--out", tmp / "c"}).code == kExitParse);
  cfg["grid"]["M"] = 128;
  cfg["initial"] = Json{{"file", "a/final_field.csv"}};
  write_text(tmp.path / "coarse.json", cfg.dump());
  CHECK(bilab_run({"simulate", "--config", tmp / "coarse.json", "--out", tmp / "d"}).code == kExitParse);
}

TEST_CASE("focusing large-amplitude run flags blow-up and still exits 0") {
  TempDir tmp("blowup");
  const auto r =
      bilab_run({"simulate", "--config", (kConfigs / "focusing_blowup.json").string(), "--out", tmp / "o"});
  CHECK(r.code == kExitOk);
  const Json s = summary(tmp / "o");
  CHECK(s.at("blowup_flag") == true);
  CHECK(s.at("blowup_time").is_number());
  CHECK(s.at("halt_reason") == "threshold");
  CHECK(s.at("observational") == true);
}

TEST_CASE("small-data scatter: increments non-increasing over the final third") {
  TempDir tmp("scatter");
  const auto r = bilab_run({"scatter", "--config", (kConfigs / "small_data.json").string(), "--out", tmp / "o"});
  REQUIRE(r.code == kExitOk);
  const Json s = summary(tmp / "o");
  CHECK(s.at("nonincreasing_final_third") == true);
  CHECK(s.at("halt_reason") == "none");
  CHECK(fs::exists(fs::path(tmp / "o") / "increments.csv"));
  CHECK(fs::exists(fs::path(tmp / "o") / "profile.csv"));
}

TEST_CASE("picard: converges on small data, exits 4 when the iteration diverges") {
  TempDir tmp("picard");
  auto r = bilab_run({"picard", "--config", (kConfigs / "picard.json").string(), "--out", tmp / "ok"});
  REQUIRE(r.code == kExitOk);
  const Json s = summary(tmp / "ok");
  CHECK(s.at("converged") == true);
  CHECK(s.at("within_budget") == true);
  CHECK(s.at("contracting") == true);

  Json cfg = io::read_json(kConfigs / "picard.json");
  cfg["initial"]["amplitude"] = 30;
  write_text(tmp.path / "big.json", cfg.dump());
  r = bilab_run({"picard", "--config", tmp / "big.json", "--out", tmp / "big"});
  CHECK(r.code == kExitNumerical);
  // diagnostics are still written before the abort
  CHECK(summary(tmp / "big").at("diverged") == true);
}

TEST_CASE("inequality hardy stays under the classical ceiling") {
  TempDir tmp("hardy");
  const auto r = bilab_run({"inequality", "hardy", "--N", "5", "--s", "1", "--rho", "2", "--M", "800", "--out",
                            tmp / "o"});
  REQUIRE(r.code == kExitOk);
  const Json s = summary(tmp / "o");
  CHECK(s.at("below_ceiling") == true);
  CHECK(s.at("max_ratio").get<double>() <= 2.0 / 3.0 + 1e-3);
  CHECK(fs::exists(fs::path(tmp / "o") / "sweep.csv"));
}
