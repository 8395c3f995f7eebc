// Drives the nhpp executable end to end.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nhpp/io.hpp"
#include "nhpp/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("nhpp_cli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run nhpp_cli(const Sandbox& box, const std::string& args) {
  const fs::path out = box / "stdout.txt";
  const fs::path err = box / "stderr.txt";
  const std::string cmd = std::string(NHPP_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t data_lines(const fs::path& csv) {
  const std::string text = slurp(csv);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

void same_files(const fs::path& a, const fs::path& b, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    INFO(n);
    REQUIRE(fs::exists(a / n));
    CHECK(slurp(a / n) == slurp(b / n));
  }
}

const char* kShortChain = "--n-iter 1500 --burn-in 500";

}  // namespace

TEST_CASE("simulate preset 2 seed 7 gives a plausible count") {
  Sandbox box;
  const Run r = nhpp_cli(box, "simulate --preset 2 --seed 7 --out-dir " + (box / "s").string());
  REQUIRE(r.code == 0);
  const std::size_t k = data_lines(box / "s" / "points.csv");
  CHECK(k >= 300);
  CHECK(k <= 530);
}

TEST_CASE("simulate is deterministic and replays from its manifest") {
  Sandbox box;
  const std::string a = (box / "a").string();
  const std::string b = (box / "b").string();
  const std::string c = (box / "c").string();
  REQUIRE(nhpp_cli(box, "simulate --preset 1 --seed 11 --out-dir " + a).code == 0);
  REQUIRE(nhpp_cli(box, "simulate --preset 1 --seed 11 --out-dir " + b).code == 0);
  same_files(a, b, {"points.csv", "fit.json", "manifest.json"});
  REQUIRE(nhpp_cli(box, "simulate --config " + a + "/manifest.json --out-dir " + c).code == 0);
  same_files(a, c, {"points.csv", "fit.json", "manifest.json"});

  // Raster covariates are written next to the pattern.
  const std::string d = (box / "d").string();
  REQUIRE(nhpp_cli(box, "simulate --preset 4 --seed 3 --out-dir " + d).code == 0);
  CHECK(fs::exists(box / "d" / "covariate_3.txt"));
  const json fit = json::parse(slurp(box / "d" / "fit.json"));
  CHECK(fit["fields"][0] == "raster:covariate_1.txt");
}

TEST_CASE("invalid preset exits with a configuration error and usage hint") {
  Sandbox box;
  const Run r = nhpp_cli(box, "simulate --preset 9 --seed 1 --out-dir " + (box / "x").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("preset 9") != std::string::npos);
  CHECK(r.err.find("--help") != std::string::npos);
}

TEST_CASE("missing seed and unknown flags are configuration errors") {
  Sandbox box;
  CHECK(nhpp_cli(box, "simulate --preset 2 --out-dir " + (box / "x").string()).code == 2);
  CHECK(nhpp_cli(box, "simulate --preset 2 --seed 1 --bogus").code == 2);
  CHECK(nhpp_cli(box, "").code == 2);
}

TEST_CASE("missing input file exits 4, fit failure exits 3") {
  Sandbox box;
  const Run missing =
      nhpp_cli(box, "fit --points " + (box / "none.csv").string() + " --seed 1 --out-dir " +
                        (box / "f").string());
  CHECK(missing.code == 4);
  CHECK(missing.err.find("none.csv") != std::string::npos);

  nhpp::io::write_text(box / "pts.csv", "x,y\n0.5,0.5\n");
  nhpp::io::write_text(box / "cfg.json",
                       R"({"points": "pts.csv", "fields": ["x"], "model": [1], "seed": 1,
                           "mcmc": {"n_iter": 200, "burn_in": 100, "initial_beta": [-10000]}})");
  const Run failed = nhpp_cli(box, "fit --config " + (box / "cfg.json").string() +
                                       " --out-dir " + (box / "f").string());
  CHECK(failed.code == 3);
  CHECK(failed.err.find("beta_1") != std::string::npos);
}

TEST_CASE("homogeneous fit matches the conjugate posterior") {
  Sandbox box;
  const nhpp::Region region;
  nhpp::IntensitySpec hpp;
  hpp.lambda0 = 200.0;
  const auto pattern = nhpp::simulate_nhpp(hpp, region, nhpp::PerCell{10, 10}, 5);
  nhpp::io::write_pattern_csv(box / "hpp.csv", pattern);
  const std::string out = (box / "f").string();
  const Run r = nhpp_cli(box, "fit --points " + (box / "hpp.csv").string() +
                                  " --seed 9 --grid 10,10 --out-dir " + out);
  REQUIRE(r.code == 0);
  const json summary = json::parse(slurp(box / "f" / "summary.json"));
  const json& l0 = summary["parameters"][0];
  REQUIRE(l0["name"] == "lambda0");
  const double k = static_cast<double>(pattern.size());
  const double shape = 0.01 + k;
  const double rate = 0.01 + 1.0;
  // Direct Gibbs draws: the effective sample size is the kept count.
  const double se = std::sqrt(shape) / rate / std::sqrt(summary["n_kept"].get<double>());
  CHECK(std::abs(l0["mean"].get<double>() - shape / rate) < 3.0 * se);
  CHECK(std::abs(l0["sd"].get<double>() - std::sqrt(shape) / rate) <
        0.05 * std::sqrt(shape) / rate);
  for (const char* f :
       {"chain.csv", "criteria.json", "event_terms.csv", "intensity.csv", "manifest.json"}) {
    CHECK(fs::exists(box / "f" / f));
  }
  CHECK(data_lines(box / "f" / "intensity.csv") == 100);
  CHECK(data_lines(box / "f" / "event_terms.csv") == pattern.size());
}

TEST_CASE("empty pattern with no covariates: lpml is minus the integral term") {
  Sandbox box;
  nhpp::io::write_text(box / "empty.csv", "x,y\n");
  const std::string out = (box / "f").string();
  const Run r = nhpp_cli(box, "fit --points " + (box / "empty.csv").string() +
                                  " --seed 2 --grid 20,20 " + kShortChain + " --out-dir " + out);
  REQUIRE(r.code == 0);
  const json crit = json::parse(slurp(box / "f" / "criteria.json"));
  CHECK(crit["lpml"].get<double>() == doctest::Approx(-crit["integral_term"].get<double>())
                                          .epsilon(1e-12));
  CHECK(crit["model"] == "homogeneous");
}

TEST_CASE("fit replays byte for byte from its manifest") {
  Sandbox box;
  REQUIRE(nhpp_cli(box, "simulate --preset 2 --seed 4 --out-dir " + (box / "s").string()).code ==
          0);
  const std::string a = (box / "a").string();
  const std::string b = (box / "b").string();
  REQUIRE(nhpp_cli(box, "fit --config " + (box / "s" / "fit.json").string() +
                            " --seed 8 --jobs 2 " + kShortChain + " --out-dir " + a)
              .code == 0);
  REQUIRE(nhpp_cli(box, "fit --config " + a + "/manifest.json --out-dir " + b).code == 0);
  same_files(a, b,
             {"chain.csv", "summary.json", "criteria.json", "event_terms.csv", "intensity.csv",
              "manifest.json"});
  const json m = json::parse(slurp(box / "a" / "manifest.json"));
  CHECK(!m.contains("jobs"));
  CHECK(!m.contains("out_dir"));
  CHECK(fs::path(m["points"].get<std::string>()).is_absolute());
}

TEST_CASE("select with three analytic covariates plus homogeneous has 8 rows") {
  Sandbox box;
  const nhpp::Region region;
  nhpp::IntensitySpec spec;
  spec.lambda0 = 100.0;
  spec.terms = {{nhpp::CovariateField::coord_x(), 1.0},
                {nhpp::CovariateField::coord_y(), 0.5},
                {nhpp::CovariateField::distance_to(0.3, 0.6), -2.0}};
  const auto pattern = nhpp::simulate_nhpp(spec, region, nhpp::PerCell{50, 50}, 17);
  nhpp::io::write_pattern_csv(box / "quakes.csv", pattern);
  const std::string a = (box / "a").string();
  const std::string args = "select --points " + (box / "quakes.csv").string() +
                           " --fields x,y,dist:0.3:0.6 --include-homogeneous --seed 5 --grid "
                           "50,50 " + kShortChain;
  REQUIRE(nhpp_cli(box, args + " --out-dir " + a).code == 0);
  CHECK(data_lines(box / "a" / "selection.csv") == 8);
  const json report = json::parse(slurp(box / "a" / "selection.json"));
  CHECK(report["rows"].size() == 8);

  const std::string b = (box / "b").string();
  REQUIRE(nhpp_cli(box, "select --config " + a + "/manifest.json --jobs 3 --out-dir " + b).code ==
          0);
  same_files(a, b, {"selection.csv", "selection.json", "manifest.json"});
}

TEST_CASE("study preset 2 with 10 replicates is reproducible") {
  Sandbox box;
  const std::string a = (box / "a").string();
  const std::string b = (box / "b").string();
  const std::string c = (box / "c").string();
  const std::string args =
      std::string("study --preset 2 --replicates 10 --seed 21 ") + kShortChain + " --out-dir ";
  REQUIRE(nhpp_cli(box, args + a).code == 0);
  REQUIRE(nhpp_cli(box, args + b).code == 0);
  same_files(a, b, {"study.csv", "study_differences.csv", "study.json", "manifest.json"});
  REQUIRE(nhpp_cli(box, "study --config " + a + "/manifest.json --out-dir " + c).code == 0);
  same_files(a, c, {"study.csv", "study_differences.csv", "study.json"});
  CHECK(slurp(box / "a" / "study.csv").rfind("model,avg_dic,avg_lpml,dic_sel_pct,lpml_sel_pct",
                                            0) == 0);
  CHECK(data_lines(box / "a" / "study.csv") == 4);
}

TEST_CASE("oracle on the two-sample fixture converges") {
  Sandbox box;
  const std::string a = (box / "a").string();
  REQUIRE(nhpp_cli(box, "oracle --fixture two-sample --out-dir " + a).code == 0);
  const auto lines = slurp(box / "a" / "oracle.csv");
  std::istringstream in(lines);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,oracle,lpml,abs_diff");
  double last = 1.0;
  int rows = 0;
  while (std::getline(in, line)) {
    last = std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(last < 1e-2);

  const std::string b = (box / "b").string();
  REQUIRE(nhpp_cli(box, "oracle --config " + a + "/manifest.json --out-dir " + b).code == 0);
  same_files(a, b, {"oracle.csv", "manifest.json"});
  CHECK(nhpp_cli(box, "oracle --fixture three-sample --out-dir " + a).code == 2);
}

TEST_CASE("oracle on a fitted chain replays from its manifest") {
  Sandbox box;
  REQUIRE(nhpp_cli(box, "simulate --preset 2 --seed 4 --out-dir " + (box / "s").string()).code ==
          0);
  const std::string f = (box / "f").string();
  REQUIRE(nhpp_cli(box, "fit --config " + (box / "s" / "fit.json").string() + " --seed 8 " +
                            kShortChain + " --out-dir " + f)
              .code == 0);
  const std::string a = (box / "a").string();
  const std::string b = (box / "b").string();
  REQUIRE(nhpp_cli(box, "oracle --chain " + f + "/chain.csv --points " +
                            (box / "s" / "points.csv").string() +
                            " --fields x2 --schedule 10,20 --out-dir " + a)
              .code == 0);
  CHECK(data_lines(box / "a" / "oracle.csv") == 2);
  REQUIRE(nhpp_cli(box, "oracle --config " + a + "/manifest.json --out-dir " + b).code == 0);
  same_files(a, b, {"oracle.csv", "manifest.json"});
  // The chain has one coefficient; two fields do not match it.
  CHECK(nhpp_cli(box, "oracle --chain " + f + "/chain.csv --points " +
                          (box / "s" / "points.csv").string() + " --out-dir " + a)
            .code == 2);
}

TEST_CASE("flags override config values") {
  Sandbox box;
  nhpp::io::write_text(box / "cfg.json", R"({"preset": 1, "seed": 3})");
  const std::string a = (box / "a").string();
  REQUIRE(nhpp_cli(box, "simulate --config " + (box / "cfg.json").string() +
                            " --preset 2 --method thinning --out-dir " + a)
              .code == 0);
  const json m = json::parse(slurp(box / "a" / "manifest.json"));
  CHECK(m["preset"] == 2);
  CHECK(m["seed"] == 3);
  CHECK(m["method"] == "thinning");
}

TEST_CASE("study uses the preset prior unless overridden") {
  Sandbox box;
  const std::string a = (box / "a").string();
  const std::string b = (box / "b").string();
  const std::string args =
      std::string("study --preset 2 --replicates 1 --seed 2 ") + kShortChain + " --out-dir ";
  REQUIRE(nhpp_cli(box, args + a).code == 0);
  REQUIRE(nhpp_cli(box, args + b + " --prior default").code == 0);
  const json preset = json::parse(slurp(box / "a" / "manifest.json"));
  const json vague = json::parse(slurp(box / "b" / "manifest.json"));
  CHECK(preset["prior"]["a1"] == 1.0);
  CHECK(vague["prior"]["a1"] == 0.01);
  CHECK(slurp(box / "a" / "study.json") != slurp(box / "b" / "study.json"));
}
