#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "spsim/errors.hpp"
#include "spsim/estimators/csv_io.hpp"
#include "spsim/estimators/histogram.hpp"
#include "spsim/estimators/least_squares.hpp"
#include "spsim/estimators/lifetime.hpp"
#include "spsim/estimators/localization.hpp"
#include "spsim/estimators/polarization.hpp"
#include "spsim/estimators/spectrum.hpp"
#include "synthetic.hpp"

using namespace spsim;
using namespace spsim::estimators;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

bool close(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(b[i]))) return false;
  return true;
}

}  // namespace

TEST_CASE("Levenberg-Marquardt") {
  SUBCASE("straight line matches normal equations") {
    Eigen::VectorXd x(6), y(6);
    x << 0, 1, 2, 3, 4, 5;
    y << 1.1, 2.9, 5.2, 7.1, 8.8, 11.2;
    ModelFn line = [&](const Eigen::VectorXd& p, Eigen::VectorXd& f) { f = p[0] + p[1] * x.array(); };
    const auto fit = levenberg_marquardt(line, y, Eigen::Vector2d(0, 0), {});
    Eigen::MatrixXd X(6, 2);
    X.col(0).setOnes();
    X.col(1) = x;
    const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    CHECK(fit.converged);
    CHECK(fit.params[0] == doctest::Approx(beta[0]).epsilon(1e-8));
    CHECK(fit.params[1] == doctest::Approx(beta[1]).epsilon(1e-8));
    const double s2 = (y - X * beta).squaredNorm() / 4.0;
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * s2;
    CHECK(fit.sigma(1) == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-5));
  }
  SUBCASE("Poisson loss recovers the sample mean for a constant model") {
    Eigen::VectorXd y(5);
    y << 3, 0, 7, 2, 4;
    ModelFn constant = [](const Eigen::VectorXd& p, Eigen::VectorXd& f) { f.setConstant(5, p[0]); };
    FitOptions opt;
    opt.loss = Loss::poisson;
    opt.lower = Eigen::VectorXd::Constant(1, 1e-9);
    const auto fit = levenberg_marquardt(constant, y, Eigen::VectorXd::Constant(1, 1.0), opt);
    CHECK(fit.params[0] == doctest::Approx(3.2).epsilon(1e-8));
    // Inverse Fisher information of a Poisson mean: mean / n.
    CHECK(fit.sigma(0) == doctest::Approx(std::sqrt(3.2 / 5)).epsilon(1e-4));
  }
  SUBCASE("bounds are respected") {
    Eigen::VectorXd y(3);
    y << -1, -2, -3;
    ModelFn constant = [](const Eigen::VectorXd& p, Eigen::VectorXd& f) { f.setConstant(3, p[0]); };
    FitOptions opt;
    opt.lower = Eigen::VectorXd::Constant(1, 0.0);
    const auto fit = levenberg_marquardt(constant, y, Eigen::VectorXd::Constant(1, 1.0), opt);
    CHECK(fit.params[0] == 0.0);
  }
}

TEST_CASE("Lorentzian doublet fit") {
  const synth::Doublet d;
  const auto fit = fit_lorentzian_doublet(synth::spectrum(d));
  CHECK(fit.first.center_nm == doctest::Approx(d.c1).epsilon(1e-9));
  CHECK(fit.second.center_nm == doctest::Approx(d.c2).epsilon(1e-9));
  CHECK(fit.first.fwhm_nm == doctest::Approx(d.w1).epsilon(1e-6));
  CHECK(fit.second.fwhm_nm == doctest::Approx(d.w2).epsilon(1e-6));
  CHECK(fit.first.amplitude == doctest::Approx(d.a1).epsilon(1e-6));
  CHECK(fit.background == doctest::Approx(d.bg).epsilon(1e-6));
  const double c = 299792458.0;
  CHECK(fit.splitting_ghz == doctest::Approx((c / (d.c1 * 1e-9) - c / (d.c2 * 1e-9)) / 1e9).epsilon(1e-6));

  synth::Doublet single = d;
  single.a1 = 0.0;
  CHECK(error_of([&] { fit_lorentzian_doublet(synth::spectrum(single)); }).find("single peak") != std::string::npos);
  Spectrum shortspec;
  shortspec.wavelength_nm = {1, 2, 3};
  shortspec.intensity = {1, 2, 3};
  CHECK_THROWS_AS(fit_lorentzian_doublet(shortspec), ValidationError);
}

TEST_CASE("Malus-law degree of polarization") {
  const auto fit = fit_malus_dop(synth::polar(1000.0, 40.0, 32.0));
  CHECK(fit.dop == doctest::Approx(1000.0 / 1080.0).epsilon(1e-9));
  CHECK(fit.axis_deg == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(fit.background == doctest::Approx(40.0).epsilon(1e-9));
  CHECK(fit.axis_defined);
  // DOP from a pair of orthogonal intensities.
  const auto hv = fit_malus_dop(synth::polar(13.7e6 - 0.54e6, 0.54e6, 0.0));
  CHECK(hv.dop == doctest::Approx((13.7 - 0.54) / (13.7 + 0.54)).epsilon(1e-9));

  const auto flat = fit_malus_dop(synth::polar(0.0, 500.0, 0.0));
  CHECK(flat.dop == 0.0);
  CHECK_FALSE(flat.axis_defined);

  PolarScan few;
  few.angle_deg = {0, 20, 40, 60, 80};
  few.intensity = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(fit_malus_dop(few), ValidationError);
}

TEST_CASE("IRF-convolved lifetime fit") {
  const double sigma = 20.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  for (double t : {50.0, 100.0, 130.0}) CHECK(exp_gaussian(t, 100.0, 61.0, sigma) == doctest::Approx(synth::emg(t, 100.0, 61.0, sigma)).epsilon(1e-12));
  // Far before t0 the asymptotic branch must stay finite and small.
  CHECK(exp_gaussian(0.0, 400.0, 5.0, 10.0) >= 0.0);
  CHECK(exp_gaussian(0.0, 400.0, 5.0, 10.0) < 1e-100);

  const auto fit = fit_exp_lifetime(synth::decay(5000.0, 100.0, 61.0, 2.0, 20.0));
  CHECK(fit.tau_ps == doctest::Approx(61.0).epsilon(1e-6));
  CHECK(fit.t0_ps == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(fit.amplitude == doctest::Approx(5000.0).epsilon(1e-6));
  CHECK(fit.background == doctest::Approx(2.0).epsilon(1e-5));

  SUBCASE("no IRF") {
    const auto f0 = fit_exp_lifetime(synth::decay(5000.0, 101.0, 69.1, 1.0, 0.0));
    CHECK(f0.tau_ps == doctest::Approx(69.1).epsilon(1e-6));
  }
  SUBCASE("short window rejected") {
    CHECK(error_of([] { fit_exp_lifetime(synth::decay(5000.0, 20.0, 61.0, 1.0, 20.0, nullptr, 100)); })
              .find("lifetimes") != std::string::npos);
  }
  SUBCASE("poorly resolved lifetime warns") {
    const auto f = fit_exp_lifetime(synth::decay(5000.0, 100.0, 3.0, 1.0, 20.0));
    CHECK_FALSE(f.warnings.empty());
  }
}

TEST_CASE("coincidence histogram estimators") {
  const auto h = synth::histogram(0.025, 1e5, 61.0);
  const auto areas = peak_areas(h);
  CHECK(areas.max_order == 8);
  CHECK(areas.at(3) == doctest::Approx(1e5).epsilon(1e-9));
  const auto g = g2_from_histogram(h);
  CHECK(g.value == doctest::Approx(0.025).epsilon(1e-9));
  CHECK(g.side_peaks_per_side == 7);
  CHECK(g.uncertainty == doctest::Approx(0.025 * std::sqrt(1.0 / 2500 + 1.0 / 1.4e6)).epsilon(1e-6));

  CHECK(error_of([] { g2_from_histogram(synth::histogram(0.1, 100, 61.0, nullptr, 200, 5)); }).find("5 side peaks") !=
        std::string::npos);
  auto broken = h;
  broken.counts.pop_back();
  CHECK_THROWS_AS(g2_from_histogram(broken), ValidationError);

  const auto raw = hom_visibility_raw(synth::histogram(0.05, 1e5, 61.0), synth::histogram(0.5, 1e5, 61.0));
  CHECK(raw.visibility == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(raw.parallel_normalized == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("HOM correction") {
  const auto c = hom_corrected(0.913, 0.025, 0.47);
  const double S = 0.47 * 0.47 + 0.53 * 0.53;
  CHECK(c.value == doctest::Approx((0.913 * S + 2 * 0.025 * kHomBackgroundCoefficient) / (2 * 0.47 * 0.53)));
  CHECK(std::abs(c.value - 0.975) <= 0.010);
  CHECK_FALSE(c.clamped);
  // Balanced splitter without multi-photon background leaves the visibility unchanged.
  CHECK(hom_corrected(0.9, 0.0, 0.5).value == doctest::Approx(0.9));
  // The correction grows with the splitter imbalance.
  double prev = 0.0;
  for (double r : {0.5, 0.47, 0.44, 0.40}) {
    const double v = hom_corrected(0.8, 0.025, r).value;
    CHECK(v > prev);
    prev = v;
  }
  const auto over = hom_corrected(0.99, 0.2, 0.45);
  CHECK(over.clamped);
  CHECK(over.value == 1.0);
  CHECK_FALSE(over.warning.empty());
  CHECK_THROWS_AS(hom_corrected(1.2, 0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(hom_corrected(0.5, 1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(hom_corrected(0.5, 0.0, 1.0), ValidationError);
}

TEST_CASE("HOM correction agrees with a brute-force splitter simulation") {
  const double p = 0.6, R = 0.47;
  for (double overlap : {0.95, 0.8}) {
    const double mu = oracle::leakage_for_g2_bisect(0.025, p);
    const auto mz = oracle::mach_zehnder(p, mu, overlap, R, 1'000'000, 17);
    const auto c = hom_corrected(std::clamp(mz.visibility_raw, 0.0, 1.0), mz.g2, R);
    CHECK(c.unclamped == doctest::Approx(overlap).epsilon(0.01 / overlap));
  }
}

TEST_CASE("2D Gaussian localization") {
  const auto fit = fit_gaussian_centroid_2d(synth::spot(4000.0, 15.3, 14.6, 2.2, 100.0));
  CHECK(fit.x_nm == doctest::Approx(15.3 * 50).epsilon(1e-6));
  CHECK(fit.y_nm == doctest::Approx(14.6 * 50).epsilon(1e-6));
  CHECK(fit.sigma_nm == doctest::Approx(2.2 * 50).epsilon(1e-6));
  CHECK(fit.background == doctest::Approx(100.0).epsilon(1e-6));
  CHECK_FALSE(fit.saturated);

  auto two = synth::spot(4000.0, 8.0, 8.0, 1.5, 100.0);
  const auto other = synth::spot(3500.0, 22.0, 21.0, 1.5, 0.0);
  for (std::size_t i = 0; i < two.pixels.size(); ++i) two.pixels[i] += other.pixels[i];
  CHECK(error_of([&] { fit_gaussian_centroid_2d(two); }).find("multiple") != std::string::npos);

  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(fit_gaussian_centroid_2d(synth::spot(3.0, 15, 15, 2, 100.0, &rng)), ValidationError);

  auto sat = synth::spot(70000.0, 15.0, 15.0, 2.0, 100.0);
  for (auto& v : sat.pixels) v = std::min(v, 65535.0);
  CHECK(fit_gaussian_centroid_2d(sat).saturated);
}

TEST_CASE("CSV round trips") {
  SUBCASE("spectrum") {
    const auto s = synth::spectrum(synth::Doublet{});
    std::stringstream io;
    write_spectrum(io, s);
    const auto back = read_spectrum(io);
    CHECK(close(back.wavelength_nm, s.wavelength_nm));
    CHECK(close(back.intensity, s.intensity));
  }
  SUBCASE("histogram") {
    std::mt19937_64 rng(1);
    const auto h = synth::histogram(0.1, 1000, 61.0, &rng);
    std::stringstream io;
    write_histogram(io, h);
    const auto back = read_histogram(io);
    CHECK(back.counts == h.counts);
    CHECK(back.half_bins == h.half_bins);
    CHECK(back.bin_ps == doctest::Approx(h.bin_ps));
  }
  SUBCASE("polar scan, decay trace, image") {
    const auto p = synth::polar(10, 1, 0);
    std::stringstream a;
    write_polar_scan(a, p);
    CHECK(close(read_polar_scan(a).intensity, p.intensity));
    const auto d = synth::decay(100, 50, 30, 1, 20);
    std::stringstream b;
    write_decay_trace(b, d);
    const auto db = read_decay_trace(b);
    CHECK(close(db.counts, d.counts));
    CHECK(db.irf_fwhm_ps == 20.0);
    const auto img = synth::spot(100, 5, 5, 1, 1, nullptr, 11, 40.0);
    std::stringstream c;
    write_image(c, img);
    const auto ib = read_image(c);
    CHECK(close(ib.pixels, img.pixels));
    CHECK(ib.pixel_pitch_nm == 40.0);
  }
  SUBCASE("errors carry the line number") {
    std::istringstream bad("# comment\nwavelength_nm,intensity\n900.0,1\n900.1,x\n");
    CHECK(error_of([&] { read_spectrum(bad, "s.csv"); }).find("s.csv:4") != std::string::npos);
    std::istringstream nohdr("rep_period_ps,100\ndelay_ps,counts\n0,1\n");
    CHECK(error_of([&] { read_histogram(nohdr, "h.csv"); }).find("bin_ps") != std::string::npos);
    std::istringstream frac("rep_period_ps,100\nbin_ps,10\ndelay_ps,counts\n0,1.5\n");
    CHECK(error_of([&] { read_histogram(frac, "h.csv"); }).find("integer") != std::string::npos);
    CHECK_THROWS_AS(read_file("/nonexistent/file.csv", read_spectrum), ValidationError);
  }
}
