#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ionlattice/fit.hpp"
#include "ionlattice/optimizer.hpp"

using namespace ionlattice;

namespace {

LatticeSpec square(int m) {
  LatticeSpec spec;
  spec.sites_per_side = m;
  spec.separation = 174e-6;
  spec.radius = 45e-6;
  return spec;
}

PseudoContext reference_drive() {
  PseudoContext ctx;
  ctx.rf_amplitude = 100.0;
  ctx.drive = 2.0 * constants::kPi * 30e6;
  return ctx;
}

std::vector<double> eval(FitModel m, const Eigen::VectorXd& p, const std::vector<double>& x) {
  std::vector<double> y;
  for (double v : x) y.push_back(evaluate_model(m, p, v));
  return y;
}

TrapSite fake_site(int i, int j, double height, double omega) {
  TrapSite s;
  s.index = {i, j, Eigen::Vector2d(i * 50e-6, j * 50e-6)};
  s.status = SiteStatus::kTrap;
  s.null.status = NullStatus::kConverged;
  s.ion_height = height;
  s.modes.omega = {omega, 2 * omega, 3 * omega};
  s.modes.radial_index = 0;
  s.modes.is_minimum = true;
  return s;
}

}  // namespace

TEST_CASE("noiseless synthetic data is recovered exactly") {
  const std::vector<double> N{4, 9, 16, 25, 36, 49, 81, 121, 169, 225};
  {
    Eigen::VectorXd p(3);
    p << 0.20, 5.21, 0.74;
    const auto fit = fit_scaling_law(FitModel::kOffsetPowerLaw, N, eval(FitModel::kOffsetPowerLaw, p, N));
    CHECK(fit.converged);
    for (int k = 0; k < 3; ++k) CHECK(fit.params[k] == doctest::Approx(p[k]).epsilon(1e-8));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    Eigen::VectorXd p(3);
    p << -5.0, 101.0, 0.29;
    const auto fit = fit_scaling_law(FitModel::kOffsetPowerLaw, N, eval(FitModel::kOffsetPowerLaw, p, N));
    for (int k = 0; k < 3; ++k) CHECK(fit.params[k] == doctest::Approx(p[k]).epsilon(1e-8));
  }
  {
    const std::vector<double> m{9, 24, 40, 88, 138, 171};
    Eigen::VectorXd p(2);
    p << 12.0, 340.0;
    const auto fit = fit_scaling_law(FitModel::kInverseSqrt, m, eval(FitModel::kInverseSqrt, p, m));
    for (int k = 0; k < 2; ++k) CHECK(fit.params[k] == doctest::Approx(p[k]).epsilon(1e-8));
  }
  {
    const std::vector<double> a{0.1, 0.2, 0.3, 0.4, 0.5};
    Eigen::VectorXd p(1);
    p << 98.0;
    const auto fit = fit_scaling_law(FitModel::kThroughOrigin, a, eval(FitModel::kThroughOrigin, p, a));
    CHECK(fit.params[0] == doctest::Approx(98.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.residual_norm < 1e-12);
  }
}

TEST_CASE("one percent noise is recovered within three sigma") {
  const std::vector<double> N{4, 9, 16, 25, 36, 49, 64, 81, 100, 121, 144, 169, 196, 225};
  Eigen::VectorXd p(3);
  p << 0.20, 5.21, 0.74;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.01);
  int within = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    auto y = eval(FitModel::kOffsetPowerLaw, p, N);
    std::vector<double> w;
    for (auto& v : y) {
      w.push_back(1.0 / (0.01 * v));
      v *= 1.0 + noise(rng);
    }
    FitOptions opt;
    opt.weights = w;
    opt.seed = 1 + t;
    const auto fit = fit_scaling_law(FitModel::kOffsetPowerLaw, N, y, opt);
    REQUIRE(fit.sigma.size() == 3);
    bool ok = true;
    for (int k = 0; k < 3; ++k) ok = ok && std::abs(fit.params[k] - p[k]) <= 3.0 * fit.sigma[k];
    within += ok;
  }
  MESSAGE(within << " of " << trials << " fits within 3 sigma");
  // Three independent 3-sigma bands: expect about 99 %.
  CHECK(within >= trials - 2);
}

TEST_CASE("fit argument checks") {
  CHECK_THROWS_AS(fit_scaling_law(FitModel::kOffsetPowerLaw, {1, 2, 3}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(fit_scaling_law(FitModel::kInverseSqrt, {1, 2}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(fit_scaling_law(FitModel::kThroughOrigin, {1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("log-log slope") {
  std::vector<double> x, y;
  for (int k = 1; k <= 8; ++k) {
    x.push_back(0.1 * k);
    y.push_back(7.0 * std::pow(0.1 * k, 3.0));
  }
  CHECK(log_log_slope(x, y) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ridge coefficients from an exactly linear ridge") {
  std::vector<RidgePoint> ridge;
  for (int k = 1; k <= 7; ++k) {
    RidgePoint p;
    p.alpha = 0.05e-6 * k;
    p.cell.ion_height = 98.0 * p.alpha;
    p.cell.A = 174.0 * p.alpha;
    p.cell.R = 45.0 * p.alpha;
    p.cell.eta_geo = 0.145;
    p.cell.ksim_scaled = 3.3e40;
    p.cell.valid = true;
    ridge.push_back(p);
  }
  RidgePoint edge = ridge.back();
  edge.alpha = 0.5e-6;
  edge.cell.A = 1.0;
  edge.on_grid_edge = true;
  ridge.push_back(edge);
  const auto k = extract_k_coefficients(ridge);
  CHECK(k.samples == 7);
  CHECK(k.k_r == doctest::Approx(98.0).epsilon(1e-12));
  CHECK(k.k_A == doctest::Approx(174.0).epsilon(1e-12));
  CHECK(k.k_R == doctest::Approx(45.0).epsilon(1e-12));
  CHECK(k.r_fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.cubic_slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(k.linear);
  ridge.resize(4);
  CHECK_THROWS_AS(extract_k_coefficients(ridge), std::invalid_argument);
}

TEST_CASE("homogeneity of identical and single sites") {
  std::vector<TrapSite> same;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) same.push_back(fake_site(i, j, 40e-6, 2e7));
  CHECK(homogeneity_from_sites(same).H == 0.0);
  CHECK(homogeneity_from_sites({fake_site(0, 0, 40e-6, 2e7)}).H == 0.0);
}

TEST_CASE("homogeneity is invariant under a uniform rescaling of K_sim") {
  std::vector<TrapSite> sites, scaled;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> h(35e-6, 45e-6), w(1.8e7, 2.2e7);
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      const double hh = h(rng), ww = w(rng);
      sites.push_back(fake_site(i, j, hh, ww));
      scaled.push_back(fake_site(i, j, 1.7 * hh, 0.6 * ww));  // every K_n x 1.7^4 / 0.36
    }
  const auto a = homogeneity_from_sites(sites);
  const auto b = homogeneity_from_sites(scaled);
  CHECK(a.H > 0.0);
  CHECK(b.H == doctest::Approx(a.H).epsilon(1e-12));
  CHECK(a.sigma_H > 0.0);
  CHECK(a.sigma_H_caption == doctest::Approx(0.13 / 5.0 * a.H).epsilon(1e-14));
}

TEST_CASE("homogeneity does not depend on the drive") {
  const auto spec = square(3);
  auto ctx = reference_drive();
  const double g = 0.7;
  const auto a = evaluate_homogeneity(spec, g, ctx, 4.0, 1);
  ctx.rf_amplitude *= 3;
  ctx.drive *= 0.5;
  const auto b = evaluate_homogeneity(spec, g, ctx, 4.0, 1);
  CHECK(b.H == doctest::Approx(a.H).epsilon(1e-6));
}

TEST_CASE("optimal gap is an interior minimum") {
  for (int m : {3, 4, 5, 6, 7}) {
    GSearchOptions o;
    o.threads = 0;
    const auto opt = optimize_g(square(m), reference_drive(), o);
    CAPTURE(m);
    CHECK_FALSE(opt.at_boundary);
    CHECK(opt.best.g_over_L > o.lower);
    CHECK(opt.best.g_over_L < o.upper);
    CHECK(opt.best.H <= opt.grid_H.front());
    CHECK(opt.best.H <= opt.grid_H.back());
    for (double h : opt.grid_H) CHECK(opt.best.H <= h + 1e-12);
  }
}

TEST_CASE("side sweep is normalized to the reference polygon") {
  LatticeSpec spec;
  spec.sites_per_side = 3;
  spec.separation = 52e-6;
  spec.radius = 14e-6;
  SidesOptions o;
  o.sides = {4, 25, 100};
  o.reoptimize_g = false;
  o.fixed_g_over_L = 0.76;
  const auto pts = sweep_polygon_sides(spec, reference_drive(), NoiseModel::cryogenic(), o);
  REQUIRE(pts.size() == 3);
  CHECK(pts[2].scaled == 1.0);
  CHECK(pts[0].scaled < 0.95);
  CHECK(pts[1].scaled > pts[0].scaled);
  CHECK(pts[1].scaled <= 1.0);
}

TEST_CASE("scan axes and the merged-site boundary") {
  const auto axis = grid_axis(30e-6, 40e-6, 2e-6);
  REQUIRE(axis.size() == 6);
  CHECK(axis.back() == doctest::Approx(40e-6).epsilon(1e-12));
  LatticeSpec tmpl;
  tmpl.sites_per_side = 3;
  ScanOptions o;
  o.a_min = 40e-6;
  o.a_max = 60e-6;
  o.r_min = 10e-6;
  o.r_max = 20e-6;
  o.resolution = 5e-6;
  o.g_over_L = 0.8;
  o.threads = 1;
  const auto grid = scan_A_R(tmpl, o);
  for (const auto& c : grid.cells) CHECK(c.R < c.A / 3.0);
  int valid = 0;
  for (const auto& c : grid.cells) {
    if (!c.valid) continue;
    ++valid;
    // Minimum-depth alpha from the reference by the alpha^2 law.
    CHECK(c.alpha == doctest::Approx(o.alpha_ref * std::sqrt(o.min_depth / c.depth_ref)).epsilon(1e-12));
    CHECK(c.ksim_scaled > 0.0);
  }
  CHECK(valid > 0);
}
