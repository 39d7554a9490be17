#include "ionlattice/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace ionlattice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::kOffsetPowerLaw: return "a+b*x^-B";
    case FitModel::kInverseSqrt: return "o+p*x^-0.5";
    case FitModel::kThroughOrigin: return "k*x";
  }
  return "?";
}

int parameter_count(FitModel m) {
  switch (m) {
    case FitModel::kOffsetPowerLaw: return 3;
    case FitModel::kInverseSqrt: return 2;
    case FitModel::kThroughOrigin: return 1;
  }
  return 0;
}

double evaluate_model(FitModel m, const VectorXd& p, double x) {
  switch (m) {
    case FitModel::kOffsetPowerLaw: return p[0] + p[1] * std::pow(x, -p[2]);
    case FitModel::kInverseSqrt: return p[0] + p[1] / std::sqrt(x);
    case FitModel::kThroughOrigin: return p[0] * x;
  }
  return 0.0;
}

namespace {

// d model / d params at x
VectorXd model_gradient(FitModel m, const VectorXd& p, double x) {
  VectorXd g(parameter_count(m));
  switch (m) {
    case FitModel::kOffsetPowerLaw: {
      const double t = std::pow(x, -p[2]);
      g << 1.0, t, -p[1] * t * std::log(x);
      break;
    }
    case FitModel::kInverseSqrt: g << 1.0, 1.0 / std::sqrt(x); break;
    case FitModel::kThroughOrigin: g << x; break;
  }
  return g;
}

struct Problem {
  FitModel model;
  const std::vector<double>& x;
  const std::vector<double>& y;
  VectorXd w;

  VectorXd residual(const VectorXd& p) const {
    VectorXd r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = w[i] * (y[i] - evaluate_model(model, p, x[i]));
    return r;
  }

  MatrixXd jacobian(const VectorXd& p) const {
    MatrixXd j(static_cast<Eigen::Index>(x.size()), parameter_count(model));
    for (std::size_t i = 0; i < x.size(); ++i) j.row(i) = w[i] * model_gradient(model, p, x[i]).transpose();
    return j;
  }
};

struct Candidate {
  VectorXd params;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
};

Candidate levenberg_marquardt(const Problem& prob, VectorXd p, int max_iterations) {
  double lambda = 1e-3;
  VectorXd r = prob.residual(p);
  double cost = r.squaredNorm();
  Candidate out;
  for (int it = 0; it < max_iterations; ++it) {
    const MatrixXd j = prob.jacobian(p);
    const MatrixXd jtj = j.transpose() * j;
    const VectorXd g = j.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const VectorXd step = a.ldlt().solve(g);
      const VectorXd trial = p + step;
      if (!trial.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const VectorXd rt = prob.residual(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct <= cost) {
        const double rel = (cost - ct) / std::max(cost, 1e-300);
        const double step_rel = step.norm() / std::max(p.norm(), 1e-300);
        p = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (rel < 1e-15 || step_rel < 1e-13) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      out.converged = true;  // no descent direction left
      break;
    }
    if (out.converged) break;
  }
  out.params = p;
  out.cost = cost;
  return out;
}

VectorXd linear_solve(const Problem& prob, int n) {
  // All supported linear forms have model = J p with J independent of p.
  const MatrixXd j = prob.jacobian(VectorXd::Zero(n));
  VectorXd yw(static_cast<Eigen::Index>(prob.y.size()));
  for (std::size_t i = 0; i < prob.y.size(); ++i) yw[i] = prob.w[i] * prob.y[i];
  return j.colPivHouseholderQr().solve(yw);
}

}  // namespace

FitResult fit_scaling_law(FitModel model, const std::vector<double>& x, const std::vector<double>& y,
                          const FitOptions& options) {
  const int n = parameter_count(model);
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  const std::size_t min_points = model == FitModel::kOffsetPowerLaw ? 4 : static_cast<std::size_t>(n + 1);
  if (x.size() < min_points && !(model == FitModel::kThroughOrigin && x.size() >= 1))
    throw std::invalid_argument("too few points for " + std::string(to_string(model)));
  for (double xi : x)
    if (!(xi > 0.0)) throw std::invalid_argument("fit abscissae must be positive");

  VectorXd w = VectorXd::Ones(static_cast<Eigen::Index>(x.size()));
  if (!options.weights.empty()) {
    if (options.weights.size() != x.size()) throw std::invalid_argument("weights differ in length");
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = options.weights[i];
  }
  const Problem prob{model, x, y, w};

  FitResult res;
  res.model = model;
  res.x_min = *std::min_element(x.begin(), x.end());
  res.x_max = *std::max_element(x.begin(), x.end());

  Candidate best;
  if (model != FitModel::kOffsetPowerLaw) {
    best.params = linear_solve(prob, n);
    best.cost = prob.residual(best.params).squaredNorm();
    best.converged = true;
    res.starts = 1;
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> exponent_dist(0.05, 3.0);
    for (int s = 0; s < options.starts; ++s) {
      // For a fixed exponent the model is linear in (a, b); seed from that solve.
      const double expo = s == 0 ? 0.5 : exponent_dist(rng);
      MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
      VectorXd yw(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) {
        a(i, 0) = w[i];
        a(i, 1) = w[i] * std::pow(x[i], -expo);
        yw[i] = w[i] * y[i];
      }
      const Eigen::Vector2d ab = a.colPivHouseholderQr().solve(yw);
      VectorXd p0(3);
      p0 << ab[0], ab[1], expo;
      Candidate c = levenberg_marquardt(prob, p0, options.max_iterations);
      if (c.cost < best.cost) best = c;
    }
    res.starts = options.starts;
  }

  res.params = best.params;
  res.converged = best.converged && best.params.allFinite();
  const VectorXd r = prob.residual(best.params);
  res.residuals.resize(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) res.residuals[i] = y[i] - evaluate_model(model, best.params, x[i]);
  res.residual_norm = r.norm();

  const MatrixXd j = prob.jacobian(best.params);
  const auto dof = static_cast<double>(x.size()) - n;
  const double s2 = dof > 0 ? r.squaredNorm() / dof : 0.0;
  // Column scaling keeps the pseudo-inverse meaningful when parameters differ by many decades.
  VectorXd scale = j.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < scale.size(); ++c)
    if (!(scale[c] > 0.0)) scale[c] = 1.0;
  const MatrixXd js = j * scale.cwiseInverse().asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(js.transpose() * js);
  res.covariance = scale.cwiseInverse().asDiagonal() * cod.pseudoInverse() * scale.cwiseInverse().asDiagonal() *
                   (dof > 0 ? s2 : 1.0);
  res.sigma = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += res.residuals[i] * res.residuals[i];
  }
  res.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return res;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log slope needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ionlattice
