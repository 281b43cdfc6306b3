#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace spsim::estimators {

enum class Loss { squared, poisson };

// Model evaluated at every data point at once: pred.size() == data.size().
using ModelFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& pred)>;

struct FitOptions {
  Loss loss = Loss::squared;
  int max_iterations = 200;
  double tolerance = 1e-13;  // relative change in cost and parameters
  Eigen::VectorXd lower;     // optional per-parameter lower bounds (empty = none)
  Eigen::VectorXd upper;
  Eigen::VectorXd weights;   // squared loss only (empty = unit)
  Eigen::VectorXd scale;     // typical parameter magnitudes for finite differences
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double cost = 0.0;  // weighted sum of squares, or Poisson deviance
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;

  double sigma(int i) const { return std::sqrt(std::max(covariance(i, i), 0.0)); }
};

// Levenberg-Marquardt with a central-difference Jacobian. Squared-loss
// covariances are scaled by the reduced chi-square when no weights are given;
// Poisson covariances are the inverse Fisher information.
FitResult levenberg_marquardt(const ModelFn& model, const Eigen::VectorXd& data, Eigen::VectorXd start,
                              const FitOptions& options = {});

}  // namespace spsim::estimators
