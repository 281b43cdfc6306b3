#include "spsim/dynamics/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsim/errors.hpp"

namespace spsim::dynamics {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Dopri5::Dopri5(Rhs rhs, std::size_t n, OdeOptions options)
    : rhs_(std::move(rhs)), n_(n), opt_(options),
      k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), tmp_(n), y_new_(n) {
  require(opt_.rtol > 0 && opt_.atol > 0, "integrator tolerances must be positive");
}

void Dopri5::reset() {
  fsal_valid_ = false;
  h_ = 0.0;
  err_prev_ = 1e-4;
}

double Dopri5::initial_step(double t, const std::vector<cplx>& y, double t_end) {
  // Hairer-Norsett-Wanner starting step heuristic.
  double d0 = 0, d1 = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sc = opt_.atol + opt_.rtol * std::abs(y[i]);
    d0 += std::norm(y[i]) / (sc * sc);
    d1 += std::norm(k1_[i]) / (sc * sc);
  }
  d0 = std::sqrt(d0 / n_);
  d1 = std::sqrt(d1 / n_);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t_end - t);
  for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h0 * k1_[i];
  rhs_(t + h0, tmp_, k2_);
  ++stats_.rhs_evaluations;
  double d2 = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sc = opt_.atol + opt_.rtol * std::abs(y[i]);
    d2 += std::norm(k2_[i] - k1_[i]) / (sc * sc);
  }
  d2 = std::sqrt(d2 / n_) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, t_end - t});
}

void Dopri5::advance(double& t, std::vector<cplx>& y, double t_end) {
  require(y.size() == n_, "state length does not match integrator");
  if (t_end <= t) return;
  if (!fsal_valid_) {
    rhs_(t, y, k1_);
    ++stats_.rhs_evaluations;
    fsal_valid_ = true;
  }
  if (h_ <= 0) h_ = initial_step(t, y, t_end);

  while (t < t_end) {
    if (stats_.accepted + stats_.rejected >= opt_.max_steps) {
      std::ostringstream msg;
      msg << "integrator step budget exhausted at t=" << t << " ps (h=" << h_ << ")";
      throw NumericalError(msg.str());
    }
    const bool last = t + h_ >= t_end * (1 - 1e-15);
    const double h = last ? t_end - t : h_;

    auto stage = [&](std::vector<cplx>& out, double tc, auto&& combine) {
      for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * combine(i);
      rhs_(t + tc * h, tmp_, out);
      ++stats_.rhs_evaluations;
    };
    stage(k2_, c2, [&](std::size_t i) { return a21 * k1_[i]; });
    stage(k3_, c3, [&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; });
    stage(k4_, c4, [&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; });
    stage(k5_, c5, [&](std::size_t i) { return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]; });
    stage(k6_, 1.0, [&](std::size_t i) {
      return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    });
    for (std::size_t i = 0; i < n_; ++i)
      y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
    rhs_(t + h, y_new_, k7_);
    ++stats_.rhs_evaluations;

    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const cplx e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
      err += std::norm(e) / (sc * sc);
    }
    err = std::sqrt(err / n_);
    if (!std::isfinite(err)) throw NumericalError("integrator produced a non-finite state");

    if (err <= 1.0 || h <= opt_.h_min) {
      if (err > 1.0) {
        std::ostringstream msg;
        msg << "integrator step underflow at t=" << t << " ps: h=" << h << " ps, scaled error=" << err;
        throw NumericalError(msg.str());
      }
      t = last ? t_end : t + h;
      y.swap(y_new_);
      k1_.swap(k7_);
      ++stats_.accepted;
      // PI controller (Hairer's beta = 0.04).
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_prev_, 0.04);
      fac = std::clamp(fac, 0.2, 5.0);
      err_prev_ = std::max(err, 1e-4);
      // A step shortened to hit t_end says nothing about the natural step size.
      if (!last || h >= h_) h_ = h * fac;
    } else {
      ++stats_.rejected;
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
}

}  // namespace spsim::dynamics
