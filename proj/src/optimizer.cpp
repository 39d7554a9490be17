#include "ionlattice/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ionlattice/parallel.hpp"

namespace ionlattice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool has_trap(const TrapSite& s) {
  return s.null.status == NullStatus::kConverged && s.modes.is_minimum && s.omega() > 0.0;
}

PseudoContext reference_context(const ScanOptions& o) {
  PseudoContext ctx;
  ctx.charge = o.charge;
  ctx.mass = o.mass;
  ctx.drive = o.drive_ref;
  ctx.rf_amplitude = o.alpha_ref * o.drive_ref;
  return ctx;
}

LatticeSpec with_gap(LatticeSpec spec, double g_over_L) {
  spec.edge_gap = g_over_L * lattice_side_length(spec.sites_per_side, spec.separation, spec.radius);
  return spec;
}

template <typename F>
std::pair<double, double> golden_min(F&& f, double a, double b, double tol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - phi * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + phi * (b - a), fd = f(d);
    }
  }
  return fc <= fd ? std::pair(c, fc) : std::pair(d, fd);
}

}  // namespace

HomogeneityResult homogeneity_from_sites(const std::vector<TrapSite>& sites, double exponent) {
  HomogeneityResult h;
  const auto n = sites.size();
  if (n == 0) throw std::invalid_argument("no sites");
  for (const auto& s : sites) h.sites.push_back(s.index);
  h.central = central_site(h.sites);
  const TrapSite& c = sites[h.central];
  h.scaled_ksim.assign(n, 0.0);
  if (!has_trap(c)) {
    h.H = kInf;
    h.sigma_H = kInf;
    h.sigma_H_caption = kInf;
    h.failed_sites = static_cast<int>(n);
    return h;
  }
  double sum = 0.0, var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const TrapSite& s = sites[k];
    double ratio = 0.0;
    if (has_trap(s)) {
      const double w = c.omega() / s.omega();
      ratio = std::pow(s.ion_height / c.ion_height, exponent) * w * w;
    } else {
      ++h.failed_sites;
    }
    h.scaled_ksim[k] = ratio;
    sum += std::abs(1.0 - ratio);
    const double sk = kSiteKsimRelativeError * ratio;
    var += sk * sk + kSiteKsimRelativeError * kSiteKsimRelativeError;
  }
  const auto nd = static_cast<double>(n);
  h.H = sum / nd;
  h.sigma_H = std::sqrt(var) / nd;
  h.sigma_H_caption = 0.13 / std::sqrt(nd) * h.H;
  return h;
}

HomogeneityResult evaluate_homogeneity(LatticeSpec spec, double g_over_L, const PseudoContext& ctx,
                                       double exponent, unsigned threads) {
  spec = with_gap(spec, g_over_L);
  const ElectrodeLayout layout = build_lattice_layout(spec, ctx.rf_amplitude);
  const auto sites = generate_sites(spec.cell_type, spec.sites_per_side, spec.separation);
  CharacterizeOptions opts;
  opts.compute_depth = false;
  opts.threads = threads;
  opts.stability_gate = false;
  HomogeneityResult h;
  try {
    h = homogeneity_from_sites(characterize_lattice(layout, ctx, sites, opts), exponent);
  } catch (const std::runtime_error&) {
    h.sites = sites;
    h.central = central_site(sites);
    h.scaled_ksim.assign(sites.size(), 0.0);
    h.H = h.sigma_H = h.sigma_H_caption = kInf;
    h.failed_sites = static_cast<int>(sites.size());
  }
  h.g_over_L = g_over_L;
  return h;
}

GOptimum optimize_g(const LatticeSpec& spec, const PseudoContext& ctx, const GSearchOptions& o) {
  if (!(o.lower > 0.0) || !(o.upper > o.lower) || !(o.step > 0.0))
    throw std::invalid_argument("g/L search range must satisfy 0 < lower < upper");
  GOptimum out;
  for (double g = o.lower; g <= o.upper + 1e-9 * o.step; g += o.step) out.grid_g.push_back(g);
  out.grid_H.resize(out.grid_g.size());
  // Sites are already parallel inside each evaluation.
  for (std::size_t k = 0; k < out.grid_g.size(); ++k)
    out.grid_H[k] = evaluate_homogeneity(spec, out.grid_g[k], ctx, o.exponent, o.threads).H;
  const auto best = static_cast<std::size_t>(
      std::min_element(out.grid_H.begin(), out.grid_H.end()) - out.grid_H.begin());
  if (!std::isfinite(out.grid_H[best])) throw std::runtime_error("no g/L in range yields a trapped central site");
  out.at_boundary = best == 0 || best + 1 == out.grid_g.size();
  double g_best = out.grid_g[best];
  if (!out.at_boundary) {
    auto f = [&](double g) { return evaluate_homogeneity(spec, g, ctx, o.exponent, o.threads).H; };
    const auto [g, H] = golden_min(f, out.grid_g[best - 1], out.grid_g[best + 1], o.tolerance);
    if (H <= out.grid_H[best]) g_best = g;
  }
  out.best = evaluate_homogeneity(spec, g_best, ctx, o.exponent, o.threads);
  return out;
}

std::vector<SidesPoint> sweep_polygon_sides(const LatticeSpec& spec, const PseudoContext& ctx,
                                            const NoiseModel& noise, const SidesOptions& o) {
  std::vector<int> list = o.sides;
  if (std::find(list.begin(), list.end(), o.reference_sides) == list.end()) list.push_back(o.reference_sides);

  auto evaluate = [&](int n) {
    SidesPoint p;
    p.sides = n;
    LatticeSpec s = spec;
    s.polygon_sides = n;
    GSearchOptions gs = o.g_search;
    gs.exponent = noise.exponent;
    p.g_over_L = o.reoptimize_g ? optimize_g(s, ctx, gs).best.g_over_L : o.fixed_g_over_L;
    s = with_gap(s, p.g_over_L);
    const ElectrodeLayout layout = build_lattice_layout(s, ctx.rf_amplitude);
    const auto sites = generate_sites(s.cell_type, s.sites_per_side, s.separation);
    CharacterizeOptions co;
    co.only = {central_site(sites)};
    co.compute_depth = o.metric == SidesMetric::kMinimumDepth;
    co.threads = gs.threads;
    co.stability_gate = false;
    TrapSite site;
    try {
      site = characterize_lattice(layout, ctx, sites, co).front();
    } catch (const std::runtime_error&) {
      return p;
    }
    if (!has_trap(site)) return p;
    if (co.compute_depth && !(site.depth.trapped && site.depth.depth > 0.0)) return p;
    p.ion_height = site.ion_height;
    p.alpha = ctx.alpha();
    p.omega = site.omega();
    if (o.metric == SidesMetric::kMinimumDepth) {
      const double scale = std::sqrt(o.min_depth / site.depth.depth);
      p.alpha *= scale;
      p.omega *= scale;
    }
    p.ksim_per_force2 = heating_and_ksim(ctx.mass, p.omega, s.separation, p.ion_height, 1.0, noise, ctx.charge).ksim;
    p.valid = true;
    return p;
  };

  std::vector<SidesPoint> pts;
  for (int n : list) pts.push_back(evaluate(n));
  const auto ref = std::find_if(pts.begin(), pts.end(), [&](const SidesPoint& p) { return p.sides == o.reference_sides; });
  if (!ref->valid) throw std::runtime_error("reference polygon count does not trap");
  const double k_ref = ref->ksim_per_force2;
  for (auto& p : pts) p.scaled = p.valid ? p.ksim_per_force2 / k_ref : 0.0;
  if (std::find(o.sides.begin(), o.sides.end(), o.reference_sides) == o.sides.end()) pts.pop_back();
  return pts;
}

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> v;
  if (!(step > 0.0) || hi < lo) return v;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= count; ++k) v.push_back(lo + static_cast<double>(k) * step);
  return v;
}

ScanGrid scan_A_R(const LatticeSpec& tmpl, const ScanOptions& o) {
  if (!(o.min_depth > 0.0)) throw std::invalid_argument("minimum trap depth must be positive");
  if (!(o.resolution > 0.0)) throw std::invalid_argument("scan resolution must be positive");
  o.noise.validate();
  ScanGrid grid;
  grid.A_values = grid_axis(o.a_min, o.a_max, o.resolution);
  grid.R_values = grid_axis(o.r_min, o.r_max, o.resolution);
  for (std::size_t ia = 0; ia < grid.A_values.size(); ++ia)
    for (std::size_t ir = 0; ir < grid.R_values.size(); ++ir) {
      const double A = grid.A_values[ia], R = grid.R_values[ir];
      if (R > 0.0 && 3.0 * R < A * (1.0 - 1e-12)) {
        ScanCell c;
        c.a_index = ia, c.r_index = ir, c.A = A, c.R = R;
        grid.cells.push_back(c);
      }
    }

  const PseudoContext ctx = reference_context(o);
  parallel_for(
      grid.cells.size(),
      [&](std::size_t k) {
        ScanCell& c = grid.cells[k];
        LatticeSpec spec = tmpl;
        spec.separation = c.A;
        spec.radius = c.R;
        spec = with_gap(spec, o.g_over_L);
        const ElectrodeLayout layout = build_lattice_layout(spec, ctx.rf_amplitude);
        const auto sites = generate_sites(spec.cell_type, spec.sites_per_side, spec.separation);
        CharacterizeOptions co;
        co.only = {central_site(sites)};
        co.threads = 1;
        co.stability_gate = false;
        TrapSite s;
        try {
          s = characterize_lattice(layout, ctx, sites, co).front();
        } catch (const std::runtime_error&) {
          return;
        }
        c.status = s.status;
        c.channel = s.depth.channel;
        if (s.status != SiteStatus::kTrap || !(s.depth.depth > 0.0)) return;
        c.depth_ref = s.depth.depth;
        c.ion_height = s.ion_height;
        c.eta_geo = s.eta_geo;
        c.zeta = s.zeta;
        c.alpha = o.alpha_ref * std::sqrt(o.min_depth / s.depth.depth);
        c.omega = s.omega() * c.alpha / o.alpha_ref;
        const double k_per_f2 = heating_and_ksim(o.mass, c.omega, c.A, c.ion_height, 1.0, o.noise, o.charge).ksim;
        c.ksim_scaled = k_per_f2 / (c.alpha * c.alpha * c.alpha);
        c.valid = true;
      },
      o.threads);
  return grid;
}

namespace {

ScanCell lerp_cell(const ScanCell& a, const ScanCell& b, double t) {
  auto mix = [t](double x, double y) { return x + t * (y - x); };
  ScanCell c = t < 0.5 ? a : b;
  c.A = mix(a.A, b.A);
  c.R = mix(a.R, b.R);
  c.alpha = mix(a.alpha, b.alpha);
  c.ion_height = mix(a.ion_height, b.ion_height);
  c.omega = mix(a.omega, b.omega);
  c.eta_geo = mix(a.eta_geo, b.eta_geo);
  c.zeta = mix(a.zeta, b.zeta);
  c.depth_ref = mix(a.depth_ref, b.depth_ref);
  c.ksim_scaled = mix(a.ksim_scaled, b.ksim_scaled);
  return c;
}

}  // namespace

std::vector<RidgePoint> extract_ridge(const ScanGrid& grid, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("alpha bin width must be positive");
  const std::size_t na = grid.A_values.size(), nr = grid.R_values.size();
  std::vector<const ScanCell*> at(na * nr, nullptr);
  const ScanCell* top = nullptr;
  double a_min = kInf, a_max = -kInf;
  for (const auto& c : grid.cells) {
    if (!c.valid) continue;
    at[c.a_index * nr + c.r_index] = &c;
    if (!top || c.ksim_scaled > top->ksim_scaled) top = &c;
    a_min = std::min(a_min, c.alpha);
    a_max = std::max(a_max, c.alpha);
  }
  std::vector<RidgePoint> ridge;
  if (!top) return ridge;

  const double a_step = na > 1 ? grid.A_values[1] - grid.A_values[0] : 0.0;
  const double r_step = nr > 1 ? grid.R_values[1] - grid.R_values[0] : 0.0;
  const double a_lo = grid.A_values.front() + a_step, a_hi = grid.A_values.back() - a_step;
  const double r_lo = grid.R_values.front() + r_step, r_hi = grid.R_values.back() - r_step;
  const double a_per_alpha = top->A / top->alpha, r_per_alpha = top->R / top->alpha;

  const auto first = static_cast<long>(std::floor(a_min / bin_width));
  const auto last = static_cast<long>(std::floor(a_max / bin_width));
  for (long bin = first; bin <= last; ++bin) {
    const double target = (static_cast<double>(bin) + 0.5) * bin_width;
    // Points where the alpha = target contour crosses a grid edge between valid cells.
    std::vector<ScanCell> contour;
    auto cross = [&](const ScanCell* p, const ScanCell* q) {
      if (!p || !q || p->alpha == q->alpha) return;
      if ((p->alpha - target) * (q->alpha - target) > 0.0) return;
      contour.push_back(lerp_cell(*p, *q, (target - p->alpha) / (q->alpha - p->alpha)));
    };
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t ir = 0; ir < nr; ++ir) {
        const ScanCell* c = at[ia * nr + ir];
        if (!c) continue;
        if (ia + 1 < na) cross(c, at[(ia + 1) * nr + ir]);
        if (ir + 1 < nr) cross(c, at[ia * nr + ir + 1]);
      }
    if (contour.empty()) continue;
    std::sort(contour.begin(), contour.end(),
              [](const ScanCell& x, const ScanCell& y) { return x.R / x.A < y.R / y.A; });
    contour.erase(std::unique(contour.begin(), contour.end(),
                              [](const ScanCell& x, const ScanCell& y) {
                                return std::abs(x.R / x.A - y.R / y.A) < 1e-12;
                              }),
                  contour.end());
    std::size_t j = 0;
    for (std::size_t k = 1; k < contour.size(); ++k)
      if (contour[k].ksim_scaled > contour[j].ksim_scaled) j = k;

    RidgePoint p;
    p.cell = contour[j];
    p.on_grid_edge = j == 0 || j + 1 == contour.size();
    if (!p.on_grid_edge) {
      // Parabola through the best contour point and its neighbours, in R/A.
      const double x0 = contour[j - 1].R / contour[j - 1].A, x1 = contour[j].R / contour[j].A,
                   x2 = contour[j + 1].R / contour[j + 1].A;
      const double y0 = contour[j - 1].ksim_scaled, y1 = contour[j].ksim_scaled, y2 = contour[j + 1].ksim_scaled;
      const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
      const double curv = (d2 - d1) / (x2 - x0);
      if (curv < 0.0) {
        const double xs = std::clamp(0.5 * (x0 + x1) - d1 / (2.0 * curv), x0, x2);
        p.cell = xs <= x1 ? lerp_cell(contour[j - 1], contour[j], (xs - x0) / (x1 - x0))
                          : lerp_cell(contour[j], contour[j + 1], (xs - x1) / (x2 - x1));
      }
    }
    p.alpha = p.cell.alpha;
    const double lo = static_cast<double>(bin) * bin_width, hi = lo + bin_width;
    p.box_limited = a_per_alpha * lo < a_lo || a_per_alpha * hi > a_hi || r_per_alpha * lo < r_lo ||
                    r_per_alpha * hi > r_hi;
    ridge.push_back(p);
  }
  return ridge;
}

KCoefficients extract_k_coefficients(const std::vector<RidgePoint>& ridge) {
  std::vector<double> a, r, A, R, kf2;
  KCoefficients k;
  double eta = 0.0, ks = 0.0;
  for (const auto& p : ridge) {
    if (!p.usable()) continue;
    a.push_back(p.alpha);
    r.push_back(p.cell.ion_height);
    A.push_back(p.cell.A);
    R.push_back(p.cell.R);
    kf2.push_back(p.cell.ksim_scaled * p.alpha * p.alpha * p.alpha);
    eta += p.cell.eta_geo;
    ks += p.cell.ksim_scaled;
  }
  if (a.size() < 5) throw std::invalid_argument("need at least five interior ridge points");
  k.samples = a.size();
  k.r_fit = fit_scaling_law(FitModel::kThroughOrigin, a, r);
  k.A_fit = fit_scaling_law(FitModel::kThroughOrigin, a, A);
  k.R_fit = fit_scaling_law(FitModel::kThroughOrigin, a, R);
  k.k_r = k.r_fit.params[0];
  k.k_A = k.A_fit.params[0];
  k.k_R = k.R_fit.params[0];
  k.eta_geo = eta / static_cast<double>(a.size());
  k.ksim_scaled = ks / static_cast<double>(a.size());
  k.cubic_slope = log_log_slope(a, kf2);
  k.linear = k.r_fit.r_squared >= kMinLinearR2 && k.A_fit.r_squared >= kMinLinearR2 &&
             k.R_fit.r_squared >= kMinLinearR2;
  return k;
}

namespace {

void fit_entries(ScalingStudy& study, bool by_mass, std::uint64_t seed) {
  std::vector<double> x, g, Ra, Aa, K;
  for (const auto& e : study.entries) {
    if (!e.k) continue;
    x.push_back(by_mass ? e.mass / constants::kAtomicMassUnit : static_cast<double>(e.site_count));
    g.push_back(e.g_over_L);
    Ra.push_back(e.k->k_R);  // m/(V s) is numerically um/(V us)
    Aa.push_back(e.k->k_A);
    K.push_back(e.k->ksim_scaled);
  }
  const FitModel model = by_mass ? FitModel::kInverseSqrt : FitModel::kOffsetPowerLaw;
  const std::size_t need = by_mass ? 3 : 4;
  if (x.size() < need) return;
  FitOptions fo;
  fo.seed = seed;
  auto attempt = [&](const std::vector<double>& y) -> std::optional<FitResult> {
    try {
      return fit_scaling_law(model, x, y, fo);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  if (!by_mass) study.g_fit = attempt(g);
  study.R_fit = attempt(Ra);
  study.A_fit = attempt(Aa);
  study.ksim_fit = attempt(K);
}

ScalingEntry run_entry(const LatticeSpec& spec, double g_over_L, bool g_boundary, const ScanOptions& scan,
                       double bin_width) {
  ScalingEntry e;
  e.sites_per_side = spec.sites_per_side;
  e.site_count = static_cast<int>(generate_sites(spec.cell_type, spec.sites_per_side, spec.separation).size());
  e.mass = scan.mass;
  e.g_over_L = g_over_L;
  e.g_at_boundary = g_boundary;
  ScanOptions so = scan;
  so.g_over_L = g_over_L;
  e.ridge = extract_ridge(scan_A_R(spec, so), bin_width);
  try {
    e.k = extract_k_coefficients(e.ridge);
  } catch (const std::invalid_argument&) {
    e.k.reset();
  }
  return e;
}

}  // namespace

ScalingStudy scaling_study_sizes(const LatticeSpec& tmpl, const std::vector<int>& sites_per_side,
                                 const ScalingOptions& o) {
  ScalingStudy study;
  const PseudoContext ctx = reference_context(o.scan);
  for (int m : sites_per_side) {
    LatticeSpec spec = tmpl;
    spec.sites_per_side = m;
    GSearchOptions gs = o.g_search;
    gs.threads = o.scan.threads;
    gs.exponent = o.scan.noise.exponent;
    const GOptimum g = optimize_g(spec, ctx, gs);
    study.entries.push_back(run_entry(spec, g.best.g_over_L, g.at_boundary, o.scan, o.bin_width));
  }
  fit_entries(study, false, o.seed);
  return study;
}

ScalingStudy scaling_study_masses(const LatticeSpec& tmpl, const std::vector<double>& masses,
                                  const ScalingOptions& o) {
  ScalingStudy study;
  GSearchOptions gs = o.g_search;
  gs.threads = o.scan.threads;
  gs.exponent = o.scan.noise.exponent;
  // Homogeneity depends only on shape, not on the ion.
  const GOptimum g = optimize_g(tmpl, reference_context(o.scan), gs);
  for (double m : masses) {
    ScanOptions so = o.scan;
    so.mass = m;
    // alpha at fixed depth grows as sqrt(m); keep the bin count per ridge fixed.
    const double bin = o.bin_width * std::sqrt(m / o.scan.mass);
    study.entries.push_back(run_entry(tmpl, g.best.g_over_L, g.at_boundary, so, bin));
  }
  fit_entries(study, true, o.seed);
  return study;
}

}  // namespace ionlattice
