#include "spsim/estimators/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spsim/errors.hpp"

namespace spsim::estimators {

namespace {

struct Evaluator {
  const ModelFn& model;
  const Eigen::VectorXd& y;
  const FitOptions& opt;

  double cost(const Eigen::VectorXd& f) const {
    if (opt.loss == Loss::squared) {
      const Eigen::VectorXd r = y - f;
      return opt.weights.size() ? (opt.weights.array() * r.array().square()).sum() : r.squaredNorm();
    }
    double d = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double fi = f[i];
      if (!(fi > 0)) return std::numeric_limits<double>::infinity();
      d += fi - y[i] + (y[i] > 0 ? y[i] * std::log(y[i] / fi) : 0.0);
    }
    return 2.0 * d;
  }

  Eigen::VectorXd weights(const Eigen::VectorXd& f) const {
    if (opt.loss == Loss::poisson) return f.cwiseMax(1e-300).cwiseInverse();
    return opt.weights.size() ? opt.weights : Eigen::VectorXd::Ones(y.size());
  }

  void project(Eigen::VectorXd& p) const {
    if (opt.lower.size()) p = p.cwiseMax(opt.lower);
    if (opt.upper.size()) p = p.cwiseMin(opt.upper);
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
    const Eigen::Index n = p.size();
    Eigen::MatrixXd J(y.size(), n);
    Eigen::VectorXd fp(y.size()), fm(y.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const double typical = opt.scale.size() ? opt.scale[j] : 0.0;
      const double h = 1e-6 * std::max({std::abs(p[j]), std::abs(typical), 1e-8});
      Eigen::VectorXd pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      model(pp, fp);
      model(pm, fm);
      J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
  }
};

}  // namespace

FitResult levenberg_marquardt(const ModelFn& model, const Eigen::VectorXd& data, Eigen::VectorXd start,
                              const FitOptions& options) {
  const Eigen::Index n = start.size();
  require(n > 0, "fit needs at least one parameter");
  require(data.size() >= n, "fit needs at least as many data points as parameters");
  require(!options.weights.size() || options.weights.size() == data.size(), "weights do not match data");
  Evaluator ev{model, data, options};
  ev.project(start);

  Eigen::VectorXd f(data.size());
  model(start, f);
  double cost = ev.cost(f);
  require(std::isfinite(cost), "fit starting point gives a non-finite cost");

  FitResult res;
  res.params = start;
  double lambda = 1e-3;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    const Eigen::MatrixXd J = ev.jacobian(res.params);
    const Eigen::VectorXd w = ev.weights(f);
    const Eigen::MatrixXd JtW = J.transpose() * w.asDiagonal();
    const Eigen::MatrixXd A = JtW * J;
    Eigen::VectorXd g = JtW * (data - f);
    // Parameters pinned at a bound with the descent direction pointing outward stay fixed.
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool at_lo = options.lower.size() && res.params[j] <= options.lower[j] && g[j] < 0;
      const bool at_hi = options.upper.size() && res.params[j] >= options.upper[j] && g[j] > 0;
      if (at_lo || at_hi) {
        frozen[static_cast<std::size_t>(j)] = true;
        g[j] = 0.0;
      }
    }
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd M = A;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (frozen[static_cast<std::size_t>(j)]) {
          M.row(j).setZero();
          M.col(j).setZero();
          M(j, j) = 1.0;
        } else {
          M(j, j) += lambda * std::max(A(j, j), 1e-300);
        }
      }
      const Eigen::VectorXd step = M.ldlt().solve(g);
      Eigen::VectorXd trial = res.params + step;
      ev.project(trial);
      Eigen::VectorXd ft(data.size());
      model(trial, ft);
      const double c = ev.cost(ft);
      const double dp = (trial - res.params).norm();
      if (std::isfinite(c) && c <= cost) {
        const double rel = (cost - c) / std::max(cost, 1e-300);
        tiny_step = rel < options.tolerance || dp <= options.tolerance * (res.params.norm() + options.tolerance);
        res.params = trial;
        f = ft;
        cost = c;
        lambda = std::max(lambda / 5.0, 1e-12);
        accepted = true;
        break;
      }
      if (dp <= options.tolerance * (res.params.norm() + options.tolerance)) {
        tiny_step = true;
        break;
      }
      lambda *= 8.0;
    }
    if (tiny_step) {
      res.converged = true;
      break;
    }
    if (!accepted) {
      res.message = "no descent direction found";
      break;
    }
  }
  if (!res.converged && res.message.empty()) res.message = "iteration limit reached";

  res.cost = cost;
  res.residual_norm = (data - f).norm();
  const Eigen::MatrixXd J = ev.jacobian(res.params);
  const Eigen::VectorXd w = ev.weights(f);
  const Eigen::MatrixXd fisher = J.transpose() * w.asDiagonal() * J;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(fisher);
  if (lu.isInvertible()) {
    res.covariance = lu.inverse();
    if (options.loss == Loss::squared && !options.weights.size() && data.size() > n)
      res.covariance *= cost / static_cast<double>(data.size() - n);
  } else {
    res.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    if (res.message.empty()) res.message = "singular Fisher matrix; parameters not identifiable";
  }
  if (res.converged && res.message.empty()) res.message = "converged";
  return res;
}

}  // namespace spsim::estimators
