#include <doctest.h>

#include <sstream>
#include <string>

#include "spsim/config.hpp"
#include "spsim/errors.hpp"
#include "spsim/model.hpp"

using namespace spsim;

namespace {

config::RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return config::parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const std::string kMinimal =
    "[cavity]\nlambda_H_nm = 897.04\nlambda_V_nm = 896.54\nq_H = 5016\nq_V = 4075\n"
    "[scenario]\npurcell_measured = 17.8\n";

}  // namespace

TEST_CASE("presets load") {
  const auto mp = config::load_config(SPSIM_SOURCE_DIR "/presets/micropillar.cfg");
  CHECK(mp.cavity.linewidth_H_ghz == doctest::Approx(model::linewidth_from_q(897.04, 5016)));
  CHECK(mp.cavity.linewidth_V_ghz == doctest::Approx(model::linewidth_from_q(896.54, 4075)));
  CHECK(mp.purcell_measured == 17.8);
  CHECK(mp.emitter.tau_bulk_ps == 1090.0);
  CHECK(mp.budget.stages.size() == 3);
  CHECK(mp.collection.detector_efficiency == 0.76);
  CHECK(mp.correlation.reflectance == 0.47);
  CHECK(mp.calibrate_pi);
  REQUIRE(mp.seed.has_value());

  const auto be = config::load_config(SPSIM_SOURCE_DIR "/presets/bullseye.cfg");
  CHECK(be.cavity.splitting_ghz() == doctest::Approx(2800.0).epsilon(1e-3));
  CHECK(be.cavity.splitting_ghz() / be.cavity.linewidth_V_ghz == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(be.cavity.splitting_ghz() / be.cavity.linewidth_H_ghz == doctest::Approx(1.3).epsilon(1e-3));
  REQUIRE(be.budget_target.has_value());
  CHECK(*be.budget_target == 0.56);
}

TEST_CASE("defaults and canonical listing") {
  const auto cfg = parse(kMinimal);
  CHECK(cfg.emitter.lambda_nm == 897.04);
  CHECK(cfg.pulse.fwhm_ps == 2.0);
  CHECK(cfg.hilbert.dim() == 18);
  CHECK(cfg.canonical.find("cavity.q_H=5016\n") != std::string::npos);
  const auto again = parse(kMinimal);
  CHECK(config::fnv1a64(cfg.canonical) == config::fnv1a64(again.canonical));
  const auto other = parse(kMinimal + "[run]\nseed = 3\n");
  CHECK(config::fnv1a64(cfg.canonical) != config::fnv1a64(other.canonical));
  CHECK(other.seed == 3u);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(config::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(config::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(config::fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(config::digest_hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("validation errors name the location") {
  CHECK(error_of("[cavity\nx=1\n").find("test.cfg:1") != std::string::npos);
  CHECK(error_of(kMinimal + "[bogus]\na = 1\n").find("unknown section [bogus]") != std::string::npos);
  CHECK(error_of(kMinimal + "[pulse]\nfwhm = 2\n").find("[pulse] fwhm: unknown key") != std::string::npos);
  CHECK(error_of(kMinimal + "[pulse]\nfwhm_ps = abc\n").find("[pulse] fwhm_ps") != std::string::npos);
  CHECK(error_of(kMinimal + "[pulse]\npolarization = D\n").find("expected H or V") != std::string::npos);
  CHECK(error_of(kMinimal + "[correlation]\nreflectance = 1.5\n").find("reflectance") != std::string::npos);
  CHECK(error_of(kMinimal + "[correlation]\nside_peaks = 4\n").find("side_peaks") != std::string::npos);
  CHECK(error_of(kMinimal + "[budget]\nstage.a = 0\n").find("[budget]") != std::string::npos);
  CHECK(error_of(kMinimal + "[hilbert]\nn_max_H = 20\nn_max_V = 20\n").find("[hilbert]") != std::string::npos);
  CHECK(error_of("[cavity]\nlambda_H_nm = 897\nlambda_V_nm = 896\nq_H = 5016\nlinewidth_H_ghz = 60\nq_V = 4000\n")
            .find("exactly one") != std::string::npos);
  CHECK(error_of(kMinimal + "[run]\nseed = -4\n").find("seed") != std::string::npos);
}

TEST_CASE("explicit area disables calibration") {
  const auto cfg = parse(kMinimal + "[pulse]\narea_rad = 3.0\ndetuning_ghz = 10\n");
  CHECK_FALSE(cfg.calibrate_pi);
  CHECK(cfg.pulse.area_rad == 3.0);
  CHECK(cfg.pulse.detuning_per_ps == doctest::Approx(2 * 3.141592653589793 * 10e-3));
}

TEST_CASE("budget-only configs need no cavity") {
  const auto cfg = parse("[budget]\nstage.blinking = 0.65\ntarget = 0.56\n");
  CHECK_FALSE(cfg.has_cavity());
  CHECK_THROWS_AS(cfg.coupled_system(), ValidationError);
}
