#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ionlattice {

enum class FitModel {
  kOffsetPowerLaw,     // y = a + b x^-B
  kInverseSqrt,        // y = o + p x^-1/2
  kThroughOrigin,      // y = k x
};

std::string_view to_string(FitModel m);
int parameter_count(FitModel m);
double evaluate_model(FitModel m, const Eigen::VectorXd& params, double x);

struct FitResult {
  FitModel model = FitModel::kThroughOrigin;
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;        // 1-sigma from the covariance
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;    // y - model
  double residual_norm = 0.0;
  double r_squared = 0.0;       // 1 - SS_res / SS_tot, SS_tot about the mean
  double x_min = 0.0;
  double x_max = 0.0;
  bool converged = false;
  int starts = 0;
};

struct FitOptions {
  int starts = 16;
  int max_iterations = 200;
  std::uint64_t seed = 1;
  // Weights per point (1/sigma_i); empty means unweighted.
  std::vector<double> weights;
};

// Damped Gauss-Newton (Levenberg-Marquardt) from several starting points;
// the best residual wins. Linear models are solved directly.
FitResult fit_scaling_law(FitModel model, const std::vector<double>& x, const std::vector<double>& y,
                          const FitOptions& options = {});

// Slope of log y against log x by ordinary least squares.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ionlattice
