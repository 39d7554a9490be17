#include "ionlattice/pipelines.hpp"

#include <algorithm>
#include <cmath>

#include "ionlattice/parallel.hpp"

namespace ionlattice {

namespace {

using constants::kPi;

constexpr double kUm = 1e-6;
constexpr double kToMhz = 1.0 / (2.0 * kPi * 1e6);

double rel_dev(double value, double expected) { return std::abs(value - expected) / std::abs(expected); }

std::vector<double> linear_points(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  return v;
}

std::vector<double> log_points(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  return v;
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

}  // namespace

// ---- validate ---------------------------------------------------------------

std::array<FiveWireCase, 6> five_wire_cases() {
  return {{{100, 50, 500, 75, 55.8, 6.86},
           {100, 50, 250, 60, 55.8, 4.29},
           {200, 100, 250, 30, 110.1, 2.17},
           {200, 100, 500, 40, 110.1, 3.26},
           {300, 150, 250, 20, 165.4, 1.48},
           {300, 150, 500, 25, 165.4, 2.37}}};
}

std::array<FiveWireCase, 6> five_wire_cases_literal() {
  return {{{100, 50, 250, 75, 55.8, 6.86},
           {100, 50, 500, 60, 55.8, 4.29},
           {200, 100, 250, 30, 110.1, 2.17},
           {200, 100, 500, 40, 110.1, 3.26},
           {500, 150, 250, 20, 165.4, 1.48},
           {500, 150, 500, 25, 165.4, 2.37}}};
}

FiveWireResult solve_five_wire(const FiveWireCase& c, double mass) {
  FiveWireResult out;
  out.input = c;
  const ElectrodeLayout layout = build_five_wire(c.rail_width_um * kUm, c.central_width_um * kUm, 3000e-6, c.voltage);
  const NullResult null = find_null(layout, {0.0, 0.0, 0.5 * (c.rail_width_um + c.central_width_um) * kUm});
  if (null.status != NullStatus::kConverged) throw SolverError("five-wire null search did not converge");
  PseudoContext ctx;
  ctx.mass = mass;
  ctx.rf_amplitude = c.voltage;
  ctx.drive = 2.0 * kPi * c.drive_mhz * 1e6;
  const SecularModes modes = secular_frequencies(layout, ctx, null.position);
  // The reported mode oscillates across the rails, along x.
  int across = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(modes.axes(0, k)) > std::abs(modes.axes(0, across))) across = k;
  out.r_um = null.position.z() / kUm;
  out.omega_mhz = modes.omega[static_cast<std::size_t>(across)] * kToMhz;
  for (std::size_t k = 0; k < 3; ++k) out.modes_mhz[k] = modes.omega[k] * kToMhz;
  out.r_deviation = rel_dev(out.r_um, c.expected_r_um);
  out.omega_deviation = rel_dev(out.omega_mhz, c.expected_omega_mhz);
  out.pass = out.r_deviation <= kHeightTolerance && out.omega_deviation <= kFrequencyTolerance;

  const auto sampled = sampled_curvatures(layout, ctx, null.position, modes.axes, 0.02 * null.position.z());
  for (std::size_t k = 0; k < 3; ++k) {
    out.sampled_mhz[k] = std::sqrt(std::max(sampled[k], 0.0) / mass) * kToMhz;
    // Modes along the rails are nearly flat; only the x-z modes are compared.
    out.radial_mode[k] = std::abs(modes.axes(1, static_cast<Eigen::Index>(k))) < std::sqrt(0.5);
    out.mode_deviation[k] = out.modes_mhz[k] > 0.0 ? rel_dev(out.sampled_mhz[k], out.modes_mhz[k]) : 0.0;
    if (out.radial_mode[k]) out.max_radial_deviation = std::max(out.max_radial_deviation, out.mode_deviation[k]);
  }
  return out;
}

ValidationReport run_validation(const RunConfig& config) {
  ValidationReport rep;
  const auto cases = five_wire_cases();
  const auto literal = five_wire_cases_literal();
  rep.rows.resize(cases.size());
  rep.literal_rows.resize(literal.size());
  const double mass = config.mass();
  parallel_for(
      cases.size() * 2,
      [&](std::size_t k) {
        if (k < cases.size())
          rep.rows[k] = solve_five_wire(cases[k], mass);
        else
          rep.literal_rows[k - cases.size()] = solve_five_wire(literal[k - cases.size()], mass);
      },
      config.threads);
  rep.table_pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.pass; });
  for (const auto& r : rep.rows) rep.max_hessian_deviation = std::max(rep.max_hessian_deviation, r.max_radial_deviation);
  rep.hessian_pass = rep.max_hessian_deviation < kCurvatureTolerance;
  return rep;
}

// ---- homogenize ------------------------------------------------------------

GOptimum homogeneity_optimum(const RunConfig& config, const LatticeSpec& spec) {
  const PseudoContext ctx = config.reference_context();
  if (config.optimize_g) return optimize_g(spec, ctx, config.g_search());
  GOptimum g;
  g.best = evaluate_homogeneity(spec, config.g_over_L, ctx, config.heating_exponent, config.threads);
  return g;
}

HomogenizeReport run_homogenize(const RunConfig& config) {
  HomogenizeReport rep;
  LatticeSpec spec = config.lattice();
  const PseudoContext ctx = config.reference_context();
  rep.optimum = homogeneity_optimum(config, spec);
  for (double g : config.homogeneity_slices)
    rep.slices.push_back(evaluate_homogeneity(spec, g, ctx, config.heating_exponent, config.threads));
  spec.edge_gap = rep.optimum.best.g_over_L * lattice_side_length(spec.sites_per_side, spec.separation, spec.radius);
  rep.spec = spec;
  CharacterizeOptions co;
  co.threads = config.threads;
  const ElectrodeLayout layout = build_lattice_layout(spec, ctx.rf_amplitude);
  try {
    rep.sites = characterize_lattice(layout, ctx, generate_sites(spec.cell_type, spec.sites_per_side, spec.separation), co);
  } catch (const std::runtime_error& e) {
    throw SolverError(std::string("no site traps at the homogeneity optimum: ") + e.what());
  }
  return rep;
}

// ---- sides -------------------------------------------------------------------

SidesReport run_sides(const RunConfig& config) {
  SidesReport rep;
  LatticeSpec spec = config.lattice();
  spec.separation = config.sides_separation_um * kUm;
  spec.radius = config.sides_radius_um * kUm;
  SidesOptions so;
  so.sides = config.sides_list;
  so.reference_sides = config.sides_reference;
  so.reoptimize_g = config.sides_reoptimize_g;
  so.metric = config.sides_metric == "minimum-depth" ? SidesMetric::kMinimumDepth : SidesMetric::kFixedDrive;
  so.min_depth = constants::ev_to_joules(config.min_trap_depth_ev);
  so.g_search = config.g_search();
  if (!so.reoptimize_g) so.fixed_g_over_L = homogeneity_optimum(config, spec).best.g_over_L;
  try {
    rep.points = sweep_polygon_sides(spec, config.reference_context(), config.noise(), so);
  } catch (const std::runtime_error& e) {
    throw SolverError(e.what());
  }
  std::vector<SidesPoint> sorted = rep.points;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.sides < b.sides; });
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (!it->valid || it->scaled < rep.threshold) break;
    rep.crossing = it->sides;
  }
  return rep;
}

// ---- scan --------------------------------------------------------------------

ScanReport run_scan(const RunConfig& config, double resolution_m) {
  ScanReport rep;
  rep.resolution = resolution_m;
  const LatticeSpec spec = config.lattice();
  ScanOptions so = config.scan(resolution_m);
  rep.grid.A_values = grid_axis(so.a_min, so.a_max, so.resolution);
  rep.grid.R_values = grid_axis(so.r_min, so.r_max, so.resolution);
  if (rep.grid.A_values.empty() || rep.grid.R_values.empty()) {
    rep.k_error = "empty scan range";
    return rep;
  }
  rep.g_over_L = homogeneity_optimum(config, spec).best.g_over_L;
  so.g_over_L = rep.g_over_L;
  rep.grid = scan_A_R(spec, so);
  rep.ridge = extract_ridge(rep.grid, config.alpha_bin_vus * kUm);
  try {
    rep.k = extract_k_coefficients(rep.ridge);
  } catch (const std::invalid_argument& e) {
    rep.k_error = e.what();
  }
  return rep;
}

// ---- scaling -----------------------------------------------------------------

ScalingReport run_scaling(const RunConfig& config) {
  ScalingReport rep;
  ScalingOptions so;
  so.scan = config.scan(config.scaling_resolution_um * kUm);
  so.g_search = config.g_search();
  so.bin_width = config.alpha_bin_vus * kUm;
  so.seed = config.seed;
  LatticeSpec spec = config.lattice();
  rep.sizes = scaling_study_sizes(spec, config.scaling_sites_per_side, so);
  std::vector<double> masses;
  for (double m : config.scaling_masses_amu) masses.push_back(m * constants::kAtomicMassUnit);
  spec.sites_per_side = config.scaling_mass_sites_per_side;
  rep.masses = scaling_study_masses(spec, masses, so);
  return rep;
}

// ---- case study ------------------------------------------------------------

CaseStudyReport run_case_study(const RunConfig& config) {
  CaseStudyReport rep;
  rep.scan = run_scan(config, config.resolution_um * kUm);
  if (!rep.scan.k)
    throw InfeasibleError("resolution_um", "optimal ridge could not be fitted (" + rep.scan.k_error + ")");
  const KCoefficients& k = *rep.scan.k;
  const double m = config.mass();
  const double e = config.charge();
  const NoiseModel noise = config.noise();
  rep.k_r = k.k_r;
  rep.k_A = k.k_A;
  rep.k_R = k.k_R;
  rep.eta_geo = k.eta_geo;

  // The lowest usable ion height fixes alpha; the ridge fixes the geometry.
  rep.ion_height = config.min_ion_height_um * kUm;
  rep.alpha = rep.ion_height / k.k_r;
  rep.radius = k.k_R * rep.alpha;
  rep.separation = k.k_A * rep.alpha;
  if (!(3.0 * rep.radius < rep.separation))
    throw InfeasibleError("min_ion_height_um", "ridge geometry has merged polygons (3R >= A)");
  rep.omega = ridge_omega(k.k_r, rep.alpha, m, k.eta_geo, e);
  try {
    rep.operating = unique_operating_point(m, config.stability_q, k.k_r, k.eta_geo, rep.alpha,
                                           config.chip_capacitance_pf * 1e-12, config.chip_resistance_ohm, e);
  } catch (const std::domain_error& err) {
    throw InfeasibleError("stability_q", err.what());
  }
  PseudoContext ctx;
  ctx.mass = m;
  ctx.charge = e;
  ctx.rf_amplitude = rep.operating.voltage;
  ctx.drive = rep.operating.drive;
  rep.q = stability_q(k.eta_geo, rep.ion_height, ctx);
  if (!q_accepted(rep.q)) throw InfeasibleError("stability_q", "q outside (0, 0.9)");

  // Laser: the power that puts the error exactly at its ceiling (E0 grows as P^2).
  LaserForceModel laser = config.laser();
  const double e0_ref = sim_error_laser(laser, k.k_r, k.k_A, k.eta_geo, rep.alpha, m, e);
  laser.power *= std::sqrt(config.max_sim_error / e0_ref);
  if (config.max_laser_power_w > 0.0 && laser.power > config.max_laser_power_w)
    throw InfeasibleError("max_laser_power_w", "E0 = " + std::to_string(config.max_sim_error) + " needs " +
                                                   std::to_string(laser.power) + " W");
  {
    LaserCase& l = rep.laser;
    l.power = laser.power;
    l.force = laser_force(laser, k.k_A, rep.alpha);
    const Heating heat = heating_and_ksim(m, rep.omega, rep.separation, rep.ion_height, l.force, noise, e);
    const Coupling c = coupling_and_beta(l.force, m, rep.omega, rep.separation, e);
    const SpontaneousEmission se = spontaneous_emission(laser, k.k_A, rep.alpha, c.interaction_time);
    l.ksim = heat.ksim;
    l.ksim_closed_form = optimized_closed_forms(k.k_r, k.k_A, rep.alpha, m, k.eta_geo, l.force, noise, e).ksim;
    l.lsim = se.lsim.value_or(0.0);
    l.sim_error = sim_error(l.force, m, rep.omega, config.observable_sites, config.mean_phonon);
    l.coupling_rate = c.rate;
    l.beta = c.beta;
    l.interaction_time = c.interaction_time.value_or(0.0);
    l.heating_time = heat.heating_time;
    l.scattering_rate = se.rate;
    l.rabi = se.rabi;
  }

  // Magnetic gradient from a current-carrying wire.
  const double k_a = config.wire_offset_ratio * k.k_r;
  const double theta = config.wire_angle_deg * kPi / 180.0;
  {
    MagneticCase& g = rep.magnetic;
    g.gradient_xz = config.gradient_t_per_m;
    g.current = current_for_gradient(g.gradient_xz, rep.alpha, k.k_r, k_a, theta);
    if (config.max_wire_current_a > 0.0 && g.current > config.max_wire_current_a)
      throw InfeasibleError("max_wire_current_a",
                            "gradient needs " + std::to_string(g.current) + " A through the wire");
    g.force = gradient_force(g.gradient_xz);
    const Heating heat = heating_and_ksim(m, rep.omega, rep.separation, rep.ion_height, g.force, noise, e);
    const Coupling c = coupling_and_beta(g.force, m, rep.omega, rep.separation, e);
    g.ksim = heat.ksim;
    g.sim_error = sim_error(g.force, m, rep.omega, config.observable_sites, config.mean_phonon);
    g.coupling_rate = c.rate;
    g.beta = c.beta;
  }

  const auto alphas = linear_points(config.sweep_alpha_min_vus * kUm, config.sweep_alpha_max_vus * kUm,
                                    config.sweep_alpha_points);
  for (double a : alphas) {
    const double w = ridge_omega(k.k_r, a, m, k.eta_geo, e);
    const double A = k.k_A * a, r = k.k_r * a;
    for (double p : log_points(config.sweep_power_min_w, config.sweep_power_max_w, config.sweep_power_points)) {
      LaserForceModel lm = laser;
      lm.power = p;
      LaserSweepPoint s;
      s.alpha = a;
      s.power = p;
      const double f = laser_force(lm, k.k_A, a);
      const Coupling c = coupling_and_beta(f, m, w, A, e);
      s.sim_error = sim_error(f, m, w, config.observable_sites, config.mean_phonon);
      s.ksim = heating_and_ksim(m, w, A, r, f, noise, e).ksim;
      s.lsim = spontaneous_emission(lm, k.k_A, a, c.interaction_time).lsim.value_or(0.0);
      s.coupling_rate = c.rate;
      rep.laser_sweep.push_back(s);
    }
    for (double b : log_points(config.sweep_gradient_min_t_per_m, config.sweep_gradient_max_t_per_m,
                               config.sweep_gradient_points)) {
      MagneticSweepPoint s;
      s.alpha = a;
      s.gradient_xz = b;
      s.current = current_for_gradient(b, a, k.k_r, k_a, theta);
      const double f = gradient_force(b);
      s.sim_error = sim_error(f, m, w, config.observable_sites, config.mean_phonon);
      s.ksim = heating_and_ksim(m, w, A, r, f, noise, e).ksim;
      s.coupling_rate = coupling_and_beta(f, m, w, A, e).rate;
      rep.magnetic_sweep.push_back(s);
    }
  }
  return rep;
}

// ---- field map ---------------------------------------------------------------

FieldMapReport run_field_map(const RunConfig& config) {
  FieldMapReport rep;
  rep.spec = config.lattice();
  const double L = lattice_side_length(rep.spec.sites_per_side, rep.spec.separation, rep.spec.radius);
  rep.spec.edge_gap = homogeneity_optimum(config, rep.spec).best.g_over_L * L;
  rep.layout = build_lattice_layout(rep.spec, config.rf_voltage_v);
  PseudoContext ctx;
  ctx.mass = config.mass();
  ctx.charge = config.charge();
  ctx.rf_amplitude = config.rf_voltage_v;
  ctx.drive = 2.0 * kPi * config.drive_mhz * 1e6;

  const double extent = config.fieldmap_extent_um > 0.0 ? config.fieldmap_extent_um * kUm : 0.5 * L + rep.spec.edge_gap;
  const int n = config.fieldmap_points;
  const auto across = linear_points(-extent, extent, n);
  std::vector<double> second;
  double height = config.fieldmap_height_um * kUm;
  if (config.fieldmap_plane == "xz") {
    second = linear_points(extent / n, extent, n);
  } else {
    second = across;
    if (!(height > 0.0)) {
      const auto sites = generate_sites(rep.spec.cell_type, rep.spec.sites_per_side, rep.spec.separation);
      CharacterizeOptions co;
      co.only = {central_site(sites)};
      co.compute_depth = false;
      co.stability_gate = false;
      try {
        height = characterize_lattice(rep.layout, ctx, sites, co).front().ion_height;
      } catch (const std::runtime_error& e) {
        throw SolverError(std::string("central site has no null: ") + e.what());
      }
    }
  }
  rep.points.resize(across.size() * second.size());
  parallel_for(
      rep.points.size(),
      [&](std::size_t k) {
        const double u = across[k % across.size()], v = second[k / across.size()];
        FieldMapPoint& p = rep.points[k];
        p.position = config.fieldmap_plane == "xz" ? Eigen::Vector3d(u, 0.0, v) : Eigen::Vector3d(u, v, height);
        p.field = field_at(rep.layout, p.position);
        p.pseudo_ev = constants::joules_to_ev(pseudopotential(rep.layout, ctx, p.position));
      },
      config.threads);
  return rep;
}

// ---- serialization -------------------------------------------------------

Json fit_to_json(const FitResult& fit) {
  Json cov = Json::array();
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < fit.covariance.cols(); ++j) row.push_back(fit.covariance(i, j));
    cov.push_back(std::move(row));
  }
  return {{"model", std::string(to_string(fit.model))},
          {"params", vec_json(fit.params)},
          {"sigma", vec_json(fit.sigma)},
          {"covariance", std::move(cov)},
          {"residuals", vec_json(fit.residuals)},
          {"residual_norm", fit.residual_norm},
          {"r_squared", fit.r_squared},
          {"x_min", fit.x_min},
          {"x_max", fit.x_max},
          {"converged", fit.converged},
          {"starts", fit.starts}};
}

Json k_to_json(const KCoefficients& k) {
  return {{"k_r_m_per_Vs", k.k_r},
          {"k_A_m_per_Vs", k.k_A},
          {"k_R_m_per_Vs", k.k_R},
          {"eta_geo", k.eta_geo},
          {"ksim_scaled_mean", k.ksim_scaled},
          {"cubic_slope", k.cubic_slope},
          {"samples", k.samples},
          {"linear", k.linear},
          {"r_fit", fit_to_json(k.r_fit)},
          {"A_fit", fit_to_json(k.A_fit)},
          {"R_fit", fit_to_json(k.R_fit)}};
}

namespace {

Json five_wire_json(const FiveWireResult& r) {
  return {{"rail_width_um", r.input.rail_width_um},
          {"central_width_um", r.input.central_width_um},
          {"voltage_V", r.input.voltage},
          {"drive_MHz", r.input.drive_mhz},
          {"expected_r_um", r.input.expected_r_um},
          {"expected_omega_MHz", r.input.expected_omega_mhz},
          {"r_um", r.r_um},
          {"omega_MHz", r.omega_mhz},
          {"modes_MHz", r.modes_mhz},
          {"r_deviation", r.r_deviation},
          {"omega_deviation", r.omega_deviation},
          {"pass", r.pass},
          {"sampled_modes_MHz", r.sampled_mhz},
          {"mode_deviation", r.mode_deviation},
          {"radial_mode", r.radial_mode},
          {"max_radial_deviation", r.max_radial_deviation}};
}

CsvTable five_wire_table(const ValidationReport& rep) {
  CsvTable t;
  t.columns = {"inputs", "row", "rail_width_um", "central_width_um", "voltage_V", "drive_MHz", "r_um",
               "expected_r_um", "r_dev_pct", "omega_MHz", "expected_omega_MHz", "omega_dev_pct", "w1_MHz",
               "w2_MHz", "w3_MHz", "hessian_vs_fit_max_dev", "pass"};
  auto add = [&](const std::vector<FiveWireResult>& rows, const std::string& label) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      t.add_row({label, static_cast<long long>(k + 1), r.input.rail_width_um, r.input.central_width_um,
                 r.input.voltage, r.input.drive_mhz, r.r_um, r.input.expected_r_um, 100.0 * r.r_deviation,
                 r.omega_mhz, r.input.expected_omega_mhz, 100.0 * r.omega_deviation, r.modes_mhz[0],
                 r.modes_mhz[1], r.modes_mhz[2], r.max_radial_deviation, static_cast<long long>(r.pass)});
    }
  };
  add(rep.rows, "reconciled");
  add(rep.literal_rows, "literal");
  return t;
}

Json homogeneity_json(const HomogeneityResult& h) {
  return {{"g_over_L", h.g_over_L},
          {"H", h.H},
          {"sigma_H", h.sigma_H},
          {"sigma_H_caption", h.sigma_H_caption},
          {"failed_sites", h.failed_sites},
          {"sites", h.sites.size()}};
}

CsvTable scan_table(const ScanGrid& grid) {
  CsvTable t;
  t.columns = {"A_um", "R_um", "alpha_Vus", "r_um", "ksim_scaled", "valid", "omega_MHz", "eta_geo",
               "zeta_per_m2", "depth_ref_eV", "channel", "status"};
  for (const auto& c : grid.cells) {
    const char* channel = c.channel == EscapeChannel::kVertical    ? "vertical"
                          : c.channel == EscapeChannel::kInterWell ? "inter-well"
                                                                   : "none";
    t.add_row({c.A / kUm, c.R / kUm, c.alpha / kUm, c.ion_height / kUm, c.ksim_scaled, static_cast<long long>(c.valid),
               c.omega * kToMhz, c.eta_geo, c.zeta, constants::joules_to_ev(c.depth_ref), std::string(channel),
               std::string(to_string(c.status))});
  }
  return t;
}

CsvTable ridge_table(const std::vector<RidgePoint>& ridge) {
  CsvTable t;
  t.columns = {"alpha_Vus", "A_um", "R_um", "r_um", "eta_geo", "ksim_scaled", "on_grid_edge", "box_limited"};
  for (const auto& p : ridge)
    t.add_row({p.alpha / kUm, p.cell.A / kUm, p.cell.R / kUm, p.cell.ion_height / kUm, p.cell.eta_geo,
               p.cell.ksim_scaled, static_cast<long long>(p.on_grid_edge),
               static_cast<long long>(p.box_limited)});
  return t;
}

Json scan_json(const ScanReport& rep) {
  std::size_t valid = 0;
  for (const auto& c : rep.grid.cells) valid += c.valid ? 1 : 0;
  Json j = {{"g_over_L", rep.g_over_L},
            {"resolution_um", rep.resolution / kUm},
            {"cells", rep.grid.cells.size()},
            {"valid_cells", valid},
            {"ridge_points", rep.ridge.size()}};
  if (rep.k) j["k"] = k_to_json(*rep.k);
  else j["k_error"] = rep.k_error;
  return j;
}

Json study_json(const ScalingStudy& s, bool by_mass) {
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    Json j = {{"sites_per_side", e.sites_per_side},
              {"site_count", e.site_count},
              {"mass_amu", e.mass / constants::kAtomicMassUnit},
              {"g_over_L", e.g_over_L},
              {"g_at_boundary", e.g_at_boundary},
              {"ridge_points", e.ridge.size()}};
    if (e.k) j["k"] = k_to_json(*e.k);
    entries.push_back(std::move(j));
  }
  Json j = {{"abscissa", by_mass ? "mass_amu" : "site_count"}, {"entries", std::move(entries)}};
  auto put = [&](const char* key, const std::optional<FitResult>& f) { j[key] = f ? fit_to_json(*f) : Json(nullptr); };
  put("g_over_L_fit", s.g_fit);
  put("R_over_alpha_fit", s.R_fit);
  put("A_over_alpha_fit", s.A_fit);
  put("ksim_scaled_fit", s.ksim_fit);
  return j;
}

CsvTable study_table(const ScalingStudy& s) {
  CsvTable t;
  t.columns = {"sites_per_side", "site_count", "mass_amu", "g_over_L", "g_at_boundary", "k_r_um_per_Vus",
               "A_over_alpha_um_per_Vus", "R_over_alpha_um_per_Vus", "eta_geo", "ksim_scaled", "cubic_slope",
               "samples", "linear"};
  for (const auto& e : s.entries) {
    const double nan = std::nan("");
    const auto& k = e.k;
    t.add_row({static_cast<long long>(e.sites_per_side), static_cast<long long>(e.site_count),
               e.mass / constants::kAtomicMassUnit, e.g_over_L, static_cast<long long>(e.g_at_boundary),
               k ? k->k_r : nan, k ? k->k_A : nan, k ? k->k_R : nan, k ? k->eta_geo : nan,
               k ? k->ksim_scaled : nan, k ? k->cubic_slope : nan, static_cast<long long>(k ? k->samples : 0),
               static_cast<long long>(k && k->linear)});
  }
  return t;
}

}  // namespace

Json case_study_to_json(const CaseStudyReport& r) {
  const LaserCase& l = r.laser;
  const MagneticCase& g = r.magnetic;
  return {{"g_over_L", r.scan.g_over_L},
          {"k_r_m_per_Vs", r.k_r},
          {"k_A_m_per_Vs", r.k_A},
          {"k_R_m_per_Vs", r.k_R},
          {"eta_geo", r.eta_geo},
          {"ridge_linear", r.scan.k ? r.scan.k->linear : false},
          {"cubic_slope", r.scan.k ? r.scan.k->cubic_slope : 0.0},
          {"alpha_Vus", r.alpha / kUm},
          {"ion_height_um", r.ion_height / kUm},
          {"R_um", r.radius / kUm},
          {"A_um", r.separation / kUm},
          {"omega_MHz", r.omega * kToMhz},
          {"q", r.q},
          {"V0_V", r.operating.voltage},
          {"Omega0_MHz", r.operating.drive * kToMhz},
          {"power_dissipation_W", r.operating.power},
          {"laser",
           {{"power_W", l.power},
            {"force_N", l.force},
            {"ksim", l.ksim},
            {"ksim_closed_form", l.ksim_closed_form},
            {"lsim", l.lsim},
            {"E0", l.sim_error},
            {"J_per_s", l.coupling_rate},
            {"beta", l.beta},
            {"T_J_s", l.interaction_time},
            {"T_heat_s", l.heating_time},
            {"scattering_rate_per_s", l.scattering_rate},
            {"rabi_per_s", l.rabi}}},
          {"magnetic",
           {{"gradient_xz_T_per_m", g.gradient_xz},
            {"current_A", g.current},
            {"force_N", g.force},
            {"ksim", g.ksim},
            {"E0", g.sim_error},
            {"J_per_s", g.coupling_rate},
            {"beta", g.beta}}}};
}

Json validation_to_json(const ValidationReport& rep) {
  Json rows = Json::array(), literal = Json::array();
  for (const auto& r : rep.rows) rows.push_back(five_wire_json(r));
  for (const auto& r : rep.literal_rows) literal.push_back(five_wire_json(r));
  return {{"rows", std::move(rows)},
          {"literal_rows", std::move(literal)},
          {"table_pass", rep.table_pass},
          {"hessian_pass", rep.hessian_pass},
          {"max_hessian_deviation", rep.max_hessian_deviation},
          {"r_tolerance", kHeightTolerance},
          {"omega_tolerance", kFrequencyTolerance},
          {"hessian_tolerance", kCurvatureTolerance}};
}

namespace {

int cmd_validate(const RunConfig& config, const std::filesystem::path& out) {
  const ValidationReport rep = run_validation(config);
  OutputSet os(out, {"validate", config});
  os.write_csv("validation.csv", five_wire_table(rep));
  os.write_json("validation.json", validation_to_json(rep));
  os.finish({{"pass", rep.pass()}});
  return rep.pass() ? kExitSuccess : kExitToleranceFailure;
}

int cmd_homogenize(const RunConfig& config, const std::filesystem::path& out) {
  const HomogenizeReport rep = run_homogenize(config);
  OutputSet os(out, {"homogenize", config});
  CsvTable curve;
  curve.columns = {"g_over_L", "H"};
  for (std::size_t k = 0; k < rep.optimum.grid_g.size(); ++k)
    curve.add_row({rep.optimum.grid_g[k], rep.optimum.grid_H[k]});
  os.write_csv("homogeneity_curve.csv", curve);
  CsvTable slices;
  slices.columns = {"g_over_L", "site_i", "site_j", "x_um", "y_um", "ksim_ratio"};
  for (const auto& h : rep.slices)
    for (std::size_t k = 0; k < h.sites.size(); ++k)
      slices.add_row({h.g_over_L, static_cast<long long>(h.sites[k].i), static_cast<long long>(h.sites[k].j),
                      h.sites[k].position.x() / kUm, h.sites[k].position.y() / kUm, h.scaled_ksim[k]});
  os.write_csv("homogeneity_slices.csv", slices);
  os.write_csv("sites.csv", site_table(rep.sites));
  os.write_json("layout.json", layout_to_json(build_lattice_layout(rep.spec, config.reference_context().rf_amplitude)));
  Json sl = Json::array();
  for (const auto& h : rep.slices) sl.push_back(homogeneity_json(h));
  os.write_json("homogenize.json", {{"optimum", homogeneity_json(rep.optimum.best)},
                                    {"at_boundary", rep.optimum.at_boundary},
                                    {"slices", std::move(sl)}});
  os.finish({{"g_over_L", rep.optimum.best.g_over_L}, {"H", rep.optimum.best.H}});
  return kExitSuccess;
}

int cmd_sides(const RunConfig& config, const std::filesystem::path& out) {
  const SidesReport rep = run_sides(config);
  OutputSet os(out, {"sides", config});
  CsvTable t;
  t.columns = {"sides", "g_over_L", "ksim_per_F2", "scaled", "r_um", "omega_MHz", "alpha_Vus", "valid",
               "at_or_above_0.95"};
  for (const auto& p : rep.points)
    t.add_row({static_cast<long long>(p.sides), p.g_over_L, p.ksim_per_force2, p.scaled, p.ion_height / kUm,
               p.omega * kToMhz, p.alpha / kUm, static_cast<long long>(p.valid),
               static_cast<long long>(p.valid && p.scaled >= rep.threshold)});
  os.write_csv("sides.csv", t);
  const Json crossing = rep.crossing ? Json(*rep.crossing) : Json(nullptr);
  os.write_json("sides.json", {{"threshold", rep.threshold},
                               {"asymptote", 1.0},
                               {"crossing_sides", crossing},
                               {"reference_sides", config.sides_reference},
                               {"metric", config.sides_metric}});
  os.finish({{"crossing_sides", crossing}});
  return kExitSuccess;
}

int cmd_scan(const RunConfig& config, const std::filesystem::path& out) {
  const ScanReport rep = run_scan(config, config.resolution_um * kUm);
  OutputSet os(out, {"scan", config});
  if (rep.grid.cells.empty()) {
    os.finish({{"empty", true}, {"reason", "no (A, R) cells with R < A/3 in the scan range"}});
    return kExitSuccess;
  }
  os.write_csv("scan.csv", scan_table(rep.grid));
  os.write_csv("ridge.csv", ridge_table(rep.ridge));
  os.write_json("scan.json", scan_json(rep));
  os.finish({{"empty", false}, {"k_available", rep.k.has_value()}});
  return kExitSuccess;
}

int cmd_scaling(const RunConfig& config, const std::filesystem::path& out) {
  const ScalingReport rep = run_scaling(config);
  OutputSet os(out, {"scaling", config});
  os.write_csv("scaling_sizes.csv", study_table(rep.sizes));
  os.write_csv("scaling_masses.csv", study_table(rep.masses));
  os.write_json("scaling.json", {{"sizes", study_json(rep.sizes, false)}, {"masses", study_json(rep.masses, true)}});
  os.finish();
  return kExitSuccess;
}

int cmd_case_study(const RunConfig& config, const std::filesystem::path& out) {
  const CaseStudyReport rep = run_case_study(config);
  OutputSet os(out, {"case-study", config});
  os.write_csv("case_study_ridge.csv", ridge_table(rep.scan.ridge));
  CsvTable ls;
  ls.columns = {"alpha_Vus", "power_W", "E0", "ksim", "lsim", "J_per_s"};
  for (const auto& p : rep.laser_sweep)
    ls.add_row({p.alpha / kUm, p.power, p.sim_error, p.ksim, p.lsim, p.coupling_rate});
  os.write_csv("laser_sweep.csv", ls);
  CsvTable ms;
  ms.columns = {"alpha_Vus", "gradient_xz_T_per_m", "current_A", "E0", "ksim", "J_per_s"};
  for (const auto& p : rep.magnetic_sweep)
    ms.add_row({p.alpha / kUm, p.gradient_xz, p.current, p.sim_error, p.ksim, p.coupling_rate});
  os.write_csv("magnetic_sweep.csv", ms);
  Json j = case_study_to_json(rep);
  j["scan"] = scan_json(rep.scan);
  os.write_json("case_study.json", std::move(j));
  os.finish({{"alpha_Vus", rep.alpha / kUm}, {"V0_V", rep.operating.voltage}});
  return kExitSuccess;
}

int cmd_field_map(const RunConfig& config, const std::filesystem::path& out) {
  const FieldMapReport rep = run_field_map(config);
  OutputSet os(out, {"field-map", config});
  CsvTable t;
  t.columns = {"x_um", "y_um", "z_um", "Ex", "Ey", "Ez", "pseudo_eV"};
  for (const auto& p : rep.points)
    t.add_row({p.position.x() / kUm, p.position.y() / kUm, p.position.z() / kUm, p.field.x(), p.field.y(),
               p.field.z(), p.pseudo_ev});
  os.write_csv("field_map.csv", t);
  os.write_json("layout.json", layout_to_json(rep.layout));
  os.finish({{"points", rep.points.size()}});
  return kExitSuccess;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate", "homogenize", "sides",   "scan",
                                              "scaling",  "case-study", "field-map"};
  return names;
}

int run_command(const std::string& name, const RunConfig& config, const std::filesystem::path& out) {
  if (name == "validate") return cmd_validate(config, out);
  if (name == "homogenize") return cmd_homogenize(config, out);
  if (name == "sides") return cmd_sides(config, out);
  if (name == "scan") return cmd_scan(config, out);
  if (name == "scaling") return cmd_scaling(config, out);
  if (name == "case-study") return cmd_case_study(config, out);
  if (name == "field-map") return cmd_field_map(config, out);
  throw std::invalid_argument("unknown command " + name);
}

}  // namespace ionlattice
