#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "spsim/cli/commands.hpp"
#include "spsim/config.hpp"
#include "spsim/estimators/csv_io.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kPresets = std::string(SPSIM_SOURCE_DIR) + "/presets/";

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "spsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = spsim::cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("sweep and budget emit the summary schema") {
  const auto r = invoke({"sweep", "--config", kPresets + "micropillar.cfg"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"quantity", "value", "uncertainty", "inputs_digest", "seed", "version", "details", "warnings"})
    CHECK(j.contains(key));
  CHECK(j["quantity"] == "polarized_extraction_efficiency");
  CHECK(j["value"].get<double>() == doctest::Approx(0.92848).epsilon(1e-4));
  CHECK(j["inputs_digest"].get<std::string>().size() == 16);

  const auto csv = invoke({"sweep", "--config", kPresets + "micropillar.cfg", "--format", "csv"});
  CHECK(csv.out.rfind("purcell_F,ratio_r,efficiency,power_factor\n", 0) == 0);

  const auto b = invoke({"budget", "--config", kPresets + "bullseye.cfg"});
  REQUIRE(b.code == 0);
  const auto jb = nlohmann::json::parse(b.out);
  CHECK(jb["quantity"] == "missing_factor");
  CHECK(jb["value"].get<double>() == doctest::Approx(0.8615).epsilon(1e-3));
  CHECK(b.err.find("stage") != std::string::npos);
}

TEST_CASE("repeated runs with one seed are byte-identical") {
  const auto dir = scratch("repeat");
  const auto cfg = write_config(dir, slurp(kPresets + "micropillar.cfg") + "");
  // Shorter photon stream for a quick test.
  std::string text = slurp(cfg);
  text.replace(text.find("n_pulses = 1000000"), 18, "n_pulses = 20000");
  std::ofstream(cfg) << text;

  const auto a = dir / "a", b = dir / "b";
  REQUIRE(invoke({"g2", "--config", cfg.string(), "--seed", "99", "--out", a.string()}).code == 0);
  REQUIRE(invoke({"g2", "--config", cfg.string(), "--seed", "99", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "g2.csv") == slurp(b / "g2.csv"));
  CHECK(slurp(a / "g2.json") == slurp(b / "g2.json"));
  CHECK_FALSE(slurp(a / "g2.csv").empty());

  const auto c = dir / "c";
  REQUIRE(invoke({"g2", "--config", cfg.string(), "--seed", "100", "--out", c.string()}).code == 0);
  CHECK(slurp(a / "g2.csv") != slurp(c / "g2.csv"));
  const auto ja = nlohmann::json::parse(slurp(a / "g2.json"));
  const auto jc = nlohmann::json::parse(slurp(c / "g2.json"));
  CHECK(ja["seed"] == 99);
  CHECK(ja["inputs_digest"] != jc["inputs_digest"]);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  SUBCASE("unknown flag") { CHECK(invoke({"sweep", "--bogus"}).code == 1); }
  SUBCASE("missing subcommand") { CHECK(invoke({}).code == 1); }
  SUBCASE("bad format") {
    CHECK(invoke({"sweep", "--config", kPresets + "micropillar.cfg", "--format", "xml"}).code == 1);
  }
  SUBCASE("invalid config writes nothing") {
    const auto cfg = write_config(dir, "[budget]\nstage.internal_quantum = 1.5\n");
    const auto out = dir / "out";
    const auto r = invoke({"sweep", "--config", cfg.string(), "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("run.cfg") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "sweep.csv"));
    CHECK_FALSE(fs::exists(out / "sweep.json"));
  }
  SUBCASE("g2 without a seed") {
    std::string text = slurp(kPresets + "micropillar.cfg");
    text.erase(text.find("[run]"));
    const auto cfg = write_config(dir, text);
    const auto r = invoke({"g2", "--config", cfg.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("seed") != std::string::npos);
  }
  SUBCASE("integrator failure is numerical") {
    std::string text = slurp(kPresets + "micropillar.cfg");
    text.replace(text.find("rtol = 1e-8"), 11, "rtol = 1e-300");
    text.replace(text.find("atol = 1e-12"), 12, "atol = 1e-300");
    const auto cfg = write_config(dir, text);
    CHECK(invoke({"rabi", "--config", cfg.string()}).code == 2);
  }
}

TEST_CASE("fit subcommand on CSV files") {
  const auto dir = scratch("fit");
  {
    std::ofstream f(dir / "spec.csv");
    spsim::estimators::write_spectrum(f, synth::spectrum(synth::Doublet{}));
  }
  auto r = invoke({"fit", "doublet", "--input", (dir / "spec.csv").string()});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["quantity"] == "splitting_ghz");
  CHECK(j["value"].get<double>() == doctest::Approx(186.4).epsilon(1e-3));
  CHECK(j["seed"].is_null());

  {
    std::ofstream p(dir / "par.csv"), c(dir / "cross.csv");
    auto rounded = [](spsim::estimators::CoincidenceHistogram h) {
      for (auto& v : h.counts) v = std::round(v);
      return h;
    };
    spsim::estimators::write_histogram(p, rounded(synth::histogram(0.05, 1e7, 61.0)));
    spsim::estimators::write_histogram(c, rounded(synth::histogram(0.5, 1e7, 61.0)));
  }
  r = invoke({"fit", "hom", "-i", (dir / "par.csv").string(), "-i", (dir / "cross.csv").string(), "--format", "csv"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("visibility_raw,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 15)) == doctest::Approx(0.9).epsilon(1e-4));

  r = invoke({"fit", "lifetime", "--input", (dir / "spec.csv").string()});
  CHECK(r.code == 1);
  r = invoke({"fit", "g2", "--input", (dir / "missing.csv").string()});
  CHECK(r.code == 1);
}
