// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ionlattice/config.hpp"
#include "ionlattice/field.hpp"
#include "ionlattice/fit.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/metrics.hpp"
#include "ionlattice/optimizer.hpp"
#include "ionlattice/pipelines.hpp"
#include "ionlattice/trap.hpp"

using namespace ionlattice;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

constexpr double kPi = constants::kPi;
constexpr double kUm = 1e-6;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  criterion %d  %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

void info(const std::string& line) {
  std::printf("INFO  %s\n", line.c_str());
  std::fflush(stdout);
}

bool within_rel(double v, double target, double tol) { return std::abs(v - target) <= tol * std::abs(target); }

Vector3d quadrature_kernel(const Vector2d& a, const Vector2d& b, const Vector3d& p) {
  const Vector3d a3(a.x(), a.y(), 0.0), d3(b.x() - a.x(), b.y() - a.y(), 0.0);
  Vector3d out;
  for (int c = 0; c < 3; ++c) {
    auto f = [&](double t) {
      const Vector3d r = p - (a3 + t * d3);
      return r.cross(d3)[c] / std::pow(r.norm(), 3);
    };
    out[c] = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
  }
  return out;
}

void table_reproduction(Outcome& o, const ValidationReport& rep) {
  double worst_r = 0.0, worst_w = 0.0;
  for (const auto& r : rep.rows) {
    worst_r = std::max(worst_r, r.r_deviation);
    worst_w = std::max(worst_w, r.omega_deviation);
  }
  o.detail << " max r deviation " << worst_r * 100 << " % (tol 2 %), max omega deviation " << worst_w * 100
           << " % (tol 3 %)";
  o.require(rep.rows.size() == 6, "six rows");
  o.require(rep.table_pass, "row tolerances");
}

void field_oracle(Outcome& o) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nv(3, 12);
  std::uniform_real_distribution<double> rad(10e-6, 60e-6), shift(-50e-6, 50e-6), px(-120e-6, 120e-6),
      pz(5e-6, 150e-6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nv(rng);
    const Vector2d c(shift(rng), shift(rng));
    std::vector<Vector2d> v;
    for (int k = 0; k < n; ++k) v.push_back(c + rad(rng) * Vector2d(std::cos(2 * kPi * k / n), std::sin(2 * kPi * k / n)));
    v.push_back(v.front());
    const Vector3d p(px(rng), px(rng), pz(rng));
    Vector3d closed = Vector3d::Zero(), quad = Vector3d::Zero();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      closed += segment_kernel(v[k], v[k + 1], p);
      quad += quadrature_kernel(v[k], v[k + 1], p);
    }
    worst = std::max(worst, (closed - quad).norm() / quad.norm());
  }
  ElectrodeLayout disk;
  const double R = 50e-6;
  disk.contours.push_back({ContourKind::kOuter, regular_polygon({0, 0}, R, 10000, 0.0, false)});
  double worst_disk = 0.0;
  for (double z : {5e-6, 20e-6, 50e-6, 100e-6, 400e-6}) {
    const double exact = R * R / std::pow(R * R + z * z, 1.5);
    worst_disk = std::max(worst_disk, std::abs(field_at(disk, {0, 0, z}).z() - exact) / exact);
  }
  o.detail << " kernel vs quadrature " << worst << " (tol 1e-9), 10^4-gon vs disk " << worst_disk << " (tol 1e-4)";
  o.require(worst < 1e-9, "quadrature oracle");
  o.require(worst_disk < 1e-4, "disk limit");
}

void hessian_check(Outcome& o, const ValidationReport& rep) {
  o.detail << " max radial-mode deviation " << rep.max_hessian_deviation << " (tol 1e-3)";
  o.require(rep.hessian_pass, "Hessian vs sampled curvature");
}

void side_count(Outcome& o, const RunConfig& cfg) {
  const auto rep = run_sides(cfg);
  double s25 = std::nan("");
  for (const auto& p : rep.points)
    if (p.sides == 25) s25 = p.scaled;
  o.detail << " K(25)/K(100) = " << s25 << " (range [0.93, 1.00])";
  if (rep.crossing) o.detail << ", 0.95 reached from n = " << *rep.crossing;
  o.require(s25 >= 0.93 && s25 <= 1.00, "scaled K_sim at 25 sides");
}

void ridge_law(Outcome& o, const RunConfig& cfg, double resolution_um) {
  const auto rep = run_scan(cfg, resolution_um * kUm);
  if (!rep.k) {
    o.require(false, "ridge fit: " + rep.k_error);
    return;
  }
  const auto& k = *rep.k;
  o.detail << " at " << resolution_um << " um: " << k.samples << " alpha samples, R^2 r/A/R = " << k.r_fit.r_squared
           << "/" << k.A_fit.r_squared << "/" << k.R_fit.r_squared << ", cubic slope " << k.cubic_slope
           << ", k_r/k_A/k_R = " << k.k_r << "/" << k.k_A << "/" << k.k_R;
  o.require(k.samples >= 5, ">= 5 alpha samples");
  o.require(k.linear, "R^2 >= 0.99");
  o.require(std::abs(k.cubic_slope - 3.0) <= 0.1, "slope 3.0 +- 0.1");
}

void case_study(Outcome& o, const RunConfig& cfg) {
  const auto r = run_case_study(cfg);
  o.detail << " V0 " << r.operating.voltage << " V, eta " << r.eta_geo << ", k_r " << r.k_r << ", R "
           << r.radius / kUm << " um, A " << r.separation / kUm << " um, L " << r.laser.lsim << ", E0 "
           << r.laser.sim_error << ", J " << r.laser.coupling_rate << " Hz, beta " << r.laser.beta << ", K "
           << r.laser.ksim << ", P " << r.laser.power << " W";
  o.require(within_rel(r.operating.voltage, 34.0, 0.10), "V0");
  o.require(within_rel(r.eta_geo, 0.145, 0.10), "eta_geo");
  o.require(within_rel(r.k_r, 98.0, 0.10), "k_r");
  o.require(std::abs(r.radius / kUm - 14.0) <= 2.0, "R");
  o.require(std::abs(r.separation / kUm - 52.0) <= 4.0, "A");
  o.require(within_rel(r.laser.lsim, 1.5, 0.20), "L_sim");
  o.require(within_rel(r.laser.sim_error, cfg.max_sim_error, 1e-9), "E0");
  o.require(within_rel(r.laser.coupling_rate, 530.0, 0.20), "J");
  o.require(within_rel(r.laser.beta, 2.8e-5, 0.20), "beta");
  o.require(r.laser.ksim >= 35.0 / 2 && r.laser.ksim <= 35.0 * 2, "K_sim within x2");
}

void homogeneity(Outcome& o, RunConfig cfg) {
  cfg.sites_per_side = 5;
  const auto spec = cfg.lattice();
  const auto opt = homogeneity_optimum(cfg, spec);
  const double expected = 0.20 + 5.21 * std::pow(25.0, -0.74);
  const auto ctx = cfg.reference_context();
  const double h_lo = evaluate_homogeneity(spec, 0.1, ctx, cfg.heating_exponent, cfg.threads).H;
  const double h_hi = evaluate_homogeneity(spec, 1.5, ctx, cfg.heating_exponent, cfg.threads).H;
  o.detail << " optimum g/L " << opt.best.g_over_L << " (target " << expected << " +- 0.10), H " << opt.best.H
           << ", H(0.1) " << h_lo << ", H(1.5) " << h_hi;
  o.require(std::abs(opt.best.g_over_L - expected) <= 0.10, "optimum location");
  o.require(opt.best.H < h_lo && opt.best.H < h_hi, "single dip");
}

void properties(Outcome& o) {
  std::mt19937_64 rng(8);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  };
  const double mass = constants::kYb171IonMassAmu * constants::kAtomicMassUnit;

  LatticeSpec spec;
  spec.separation = 52e-6;
  spec.radius = 14e-6;
  spec.edge_gap = 0.8 * lattice_side_length(3, spec.separation, spec.radius);
  const auto layout = build_lattice_layout(spec, 1.0);
  PseudoContext ctx;
  ctx.rf_amplitude = 30.0;
  bool psi_ok = true;
  std::uniform_real_distribution<double> u(-150e-6, 150e-6), h(0.5e-6, 300e-6);
  for (int k = 0; k < 2000; ++k) psi_ok = psi_ok && pseudopotential(layout, ctx, {u(rng), u(rng), h(rng)}) >= 0.0;
  o.require(psi_ok, "Psi >= 0");

  const auto sites = generate_sites(spec.cell_type, 3, spec.separation);
  double lo = 1e300, hi = 0.0;
  for (double a : {0.05, 0.2, 0.5, 1.0, 1.5}) {
    PseudoContext c;
    c.drive = 2 * kPi * 40e6;
    c.rf_amplitude = a * 1e-6 * c.drive;
    CharacterizeOptions co;
    co.only = {central_site(sites)};
    co.stability_gate = false;
    const auto s = characterize_lattice(build_lattice_layout(spec, c.rf_amplitude), c, sites, co).front();
    const double ratio = s.depth.depth / (a * a);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  const double td_spread = (hi - lo) / lo;
  o.require(td_spread <= 1e-6, "T_D / alpha^2 constant");

  bool gate = !q_accepted(0.9) && !q_accepted(0.95) && q_accepted(0.899);
  try {
    require_stable(0.9);
    gate = false;
  } catch (const std::domain_error&) {
  }
  o.require(gate, "q gate");

  double worst_x4 = 0.0, worst_laser = 0.0, worst_mag = 0.0, worst_limit = 0.0;
  const NoiseModel base = NoiseModel::cryogenic();
  const NoiseModel x4 = NoiseModel::from_preset(NoisePreset::kCustom, base.xi, 4.0);
  bool monotone = true;
  for (int k = 0; k < 200; ++k) {
    const double F = log_uniform(1e-24, 1e-21), k_r = log_uniform(30, 200), k_A = log_uniform(100, 400);
    const double eta = log_uniform(0.05, 0.3), alpha = log_uniform(0.05e-6, 1.5e-6);
    const double w = ridge_omega(k_r, alpha, mass, eta);
    const double pipeline = heating_and_ksim(mass, w, k_A * alpha, k_r * alpha, F, base).ksim;
    const double general = optimized_closed_forms(k_r, k_A, alpha, mass, eta, F, x4).ksim;
    worst_x4 = std::max(worst_x4, std::abs(general - pipeline) / pipeline);

    LaserForceModel lm;
    lm.power = log_uniform(0.1, 20.0);
    lm.sites_per_side = 2 + k % 6;
    const double el = sim_error_laser(lm, k_r, k_A, eta, alpha, mass);
    const double el_c = sim_error(laser_force(lm, k_A, alpha), mass, w, lm.observable_sites, lm.mean_phonon);
    worst_laser = std::max(worst_laser, std::abs(el - el_c) / el_c);

    MagneticForceModel mm;
    mm.current = log_uniform(1.0, 2000.0);
    mm.ion_height_slope = k_r;
    mm.offset_slope = log_uniform(10, 300);
    const double em = sim_error_mag(mm, eta, alpha, mass);
    const double em_c = sim_error(magnetic_force(mm, alpha).force, mass, w, mm.observable_sites, mm.mean_phonon);
    worst_mag = std::max(worst_mag, std::abs(em - em_c) / em_c);

    monotone = monotone && sim_error_laser(lm, k_r, k_A, eta, alpha * 1.01, mass) > el &&
               sim_error_mag(mm, eta, alpha * 1.01, mass) < em;

    const double ideal = sim_error(F, mass, w, 1, 0.0);
    worst_limit = std::max(worst_limit, std::abs(sim_error_heating(F, mass, w, 1, 0.0, 1e13) - ideal) / ideal);
  }
  o.detail << " T_D/alpha^2 spread " << td_spread << ", x=4 vs default " << worst_x4 << ", laser closed/composed "
           << worst_laser << ", magnetic " << worst_mag << ", heating limit " << worst_limit;
  o.require(worst_x4 <= 1e-12, "x = 4 equals default");
  o.require(worst_laser <= 1e-9 && worst_mag <= 1e-9, "closed forms");
  o.require(worst_limit <= 1e-12, "E0(T_J) limit");
  o.require(monotone, "E0 monotonicity");
}

void scaling_substitute(Outcome& o, const RunConfig& cfg) {
  // Synthetic recovery under 1 % noise.
  const std::vector<double> N{4, 9, 16, 25, 36, 49, 64, 81, 100, 121, 144, 169, 196, 225};
  Eigen::VectorXd p(3);
  p << 0.20, 5.21, 0.74;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> y, w;
  for (double n : N) {
    const double v = evaluate_model(FitModel::kOffsetPowerLaw, p, n);
    w.push_back(1.0 / (0.01 * v));
    y.push_back(v * (1.0 + noise(rng)));
  }
  FitOptions fo;
  fo.weights = w;
  fo.seed = cfg.seed;
  const auto fit = fit_scaling_law(FitModel::kOffsetPowerLaw, N, y, fo);
  bool recovered = fit.sigma.size() == 3;
  for (int k = 0; recovered && k < 3; ++k) recovered = std::abs(fit.params[k] - p[k]) <= 3.0 * fit.sigma[k];
  o.detail << " fit (a, b, B) = (" << fit.params[0] << ", " << fit.params[1] << ", " << fit.params[2] << ")";
  o.require(recovered, "synthetic recovery within 3 sigma");

  ScalingOptions so;
  so.scan = cfg.scan(cfg.scaling_resolution_um * kUm);
  so.g_search = cfg.g_search();
  so.bin_width = cfg.alpha_bin_vus * kUm;
  so.seed = cfg.seed;
  const auto study = scaling_study_sizes(cfg.lattice(), {2, 3, 4, 5}, so);
  std::vector<double> g, Ra, Aa;
  o.detail << "; N/g/L/R_alpha/A_alpha:";
  for (const auto& e : study.entries) {
    o.detail << " " << e.site_count << "/" << e.g_over_L;
    g.push_back(e.g_over_L);
    if (e.k) {
      Ra.push_back(e.k->k_R);
      Aa.push_back(e.k->k_A);
      o.detail << "/" << e.k->k_R << "/" << e.k->k_A;
    }
  }
  auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
      if (!(v[k] < v[k - 1])) return false;
    return true;
  };
  o.require(g.size() == 4 && decreasing(g), "g/L decreasing in N");
  o.require(Ra.size() == 4 && decreasing(Ra), "R/alpha decreasing in N");
  o.require(Aa.size() == 4 && decreasing(Aa), "A/alpha decreasing in N");
}

}  // namespace

int main() {
  RunConfig cfg;
  cfg.validate();
  ValidationReport validation;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    validation = run_validation(cfg);
  } catch (const std::exception& e) {
    std::printf("FAIL  validation could not run: %s\n", e.what());
    return 1;
  }
  const double vsecs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  report(1, "five-wire table reproduction", [&](Outcome& o) {
    table_reproduction(o, validation);
    o.detail << ", runtime " << vsecs << " s";
    o.require(vsecs < 60.0, "runtime < 1 min");
  });
  for (const auto& r : validation.literal_rows)
    if (!r.pass)
      info("five-wire inputs as printed: rail " + std::to_string(r.input.rail_width_um) + " um, " +
           std::to_string(r.input.voltage) + " V, " + std::to_string(r.input.drive_mhz) + " MHz gives r " +
           std::to_string(r.r_um) + " um, omega " + std::to_string(r.omega_mhz) + " MHz");
  report(2, "field-solver oracle", field_oracle);
  report(3, "Hessian cross-check", [&](Outcome& o) { hessian_check(o, validation); });
  report(4, "side-count law", [&](Outcome& o) { side_count(o, cfg); });
  report(5, "optimal-ridge linearity and cubic law", [&](Outcome& o) { ridge_law(o, cfg, 1.0); });
  for (double res : {2.0, 5.0}) {
    Outcome o;
    try {
      ridge_law(o, cfg, res);
    } catch (const std::exception& e) {
      o.require(false, e.what());
    }
    info(std::string("ridge at coarser resolution (not gating): ") + (o.pass ? "meets" : "misses") +
         " the criterion;" + o.detail.str());
  }
  report(6, "case study", [&](Outcome& o) {
    RunConfig c = cfg;
    c.resolution_um = 2.0;
    case_study(o, c);
  });
  report(7, "homogeneity optimum for N = 25", [&](Outcome& o) { homogeneity(o, cfg); });
  report(8, "property suites", properties);
  report(9, "scaling substitute", [&](Outcome& o) { scaling_substitute(o, cfg); });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
