#include "ionlattice/trap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ionlattice/parallel.hpp"

namespace ionlattice {

using Eigen::Matrix3d;
using Eigen::Vector3d;

DriveAndSpecies DriveAndSpecies::from_alpha(double alpha, double drive, double mass) {
  DriveAndSpecies d;
  d.drive = drive;
  d.rf_amplitude = alpha * drive;
  d.mass = mass;
  return d;
}

std::string_view to_string(NullStatus s) {
  switch (s) {
    case NullStatus::kConverged:
      return "converged";
    case NullStatus::kNotConverged:
      return "not_converged";
    case NullStatus::kNoTrap:
      return "no_trap";
  }
  return "unknown";
}

std::string_view to_string(SiteStatus s) {
  switch (s) {
    case SiteStatus::kTrap:
      return "trap";
    case SiteStatus::kSaddle:
      return "saddle";
    case SiteStatus::kNoNull:
      return "no_null";
    case SiteStatus::kUntrapped:
      return "untrapped";
    case SiteStatus::kEtaInvalid:
      return "eta_invalid";
    case SiteStatus::kUnstable:
      return "unstable";
  }
  return "unknown";
}

NullResult find_null(const ElectrodeLayout& layout, const Vector3d& initial_guess,
                     const NullOptions& options) {
  NullResult result;
  result.position = initial_guess;
  if (!(initial_guess.z() > 0.0)) {
    result.status = NullStatus::kNoTrap;
    return result;
  }

  Vector3d x = initial_guess;
  Vector3d e = unit_field(layout, x);
  double cost = e.squaredNorm();
  int polish = 0;
  try {
    for (int it = 0; it < options.max_iterations; ++it) {
      result.iterations = it + 1;
      const Matrix3d jac = unit_field_jacobian(layout, x);
      Eigen::JacobiSVD<Matrix3d> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
      svd.setThreshold(1e-12);
      const Vector3d step = -svd.solve(e);

      double t = 1.0;
      bool improved = false;
      Vector3d trial, e_trial;
      for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
        trial = x + t * step;
        if (!(trial.z() > 0.0)) continue;
        e_trial = unit_field(layout, trial);
        if (e_trial.squaredNorm() < cost) {
          improved = true;
          break;
        }
      }
      if (!improved) break;
      x = trial;
      e = e_trial;
      cost = e.squaredNorm();
      if (std::sqrt(cost) <= options.relative_tolerance / x.z()) {
        // a few extra steps push the residual to the rounding floor
        if (++polish > 3) break;
      }
    }
  } catch (const std::domain_error&) {
    result.status = NullStatus::kNoTrap;
    result.position = x;
    result.residual = layout.rf_amplitude * std::sqrt(cost);
    return result;
  }

  result.position = x;
  result.residual = layout.rf_amplitude * std::sqrt(cost);
  if (!(x.z() > 0.0)) {
    result.status = NullStatus::kNoTrap;
  } else if (std::sqrt(cost) <= options.relative_tolerance / x.z()) {
    result.status = NullStatus::kConverged;
  } else {
    result.status = NullStatus::kNotConverged;
  }
  return result;
}

SecularModes secular_frequencies(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                 const Vector3d& null) {
  const Matrix3d hess = pseudo_hessian(layout, ctx, null);
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(hess);
  SecularModes modes;
  modes.axes = eig.eigenvectors();
  modes.is_minimum = true;
  for (int k = 0; k < 3; ++k) {
    const double lambda = eig.eigenvalues()[k];
    modes.curvature[static_cast<std::size_t>(k)] = lambda;
    if (!(lambda > 0.0)) modes.is_minimum = false;
    modes.omega[static_cast<std::size_t>(k)] = std::sqrt(std::max(lambda, 0.0) / ctx.mass);
  }
  modes.radial_index = 0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(modes.axes(2, k)) < std::sqrt(0.5)) {
      modes.radial_index = k;
      break;
    }
  }
  return modes;
}

std::array<double, 3> sampled_curvatures(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                         const Vector3d& null, const Matrix3d& axes, double span, int samples) {
  if (!(span > 0.0) || samples < 3) throw std::invalid_argument("need span > 0 and at least 3 samples");
  const int n = 2 * samples + 1;
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd v(n, 5);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i - samples) / samples;  // s / span
      for (int p = 0; p < 5; ++p) v(i, p) = std::pow(t, p);
      y[i] = pseudopotential(layout, ctx, null + t * span * axes.col(k));
    }
    const Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);
    out[static_cast<std::size_t>(k)] = 2.0 * c[2] / (span * span);
  }
  return out;
}

namespace {

// Maximizes f on [a, b] by golden-section search.
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iterations = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct Barrier {
  bool found = false;
  double value = 0.0;  // absolute Psi at the barrier
  Vector3d point = Vector3d::Zero();
};

// Highest Psi along a parametrized path, located on `samples` points then
// refined between the neighbours of the best sample. Interior maxima only.
template <typename Path, typename Psi>
Barrier path_maximum(Path&& path, Psi&& psi, const std::vector<double>& params) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double v = psi(path(params[k]));
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  Barrier b;
  if (best == 0 || best + 1 == params.size()) return b;
  auto [t, v] = golden_max([&](double s) { return psi(path(s)); }, params[best - 1], params[best + 1]);
  b.found = true;
  b.value = std::max(v, best_value);
  b.point = v >= best_value ? path(t) : path(params[best]);
  return b;
}

}  // namespace

DepthResult trap_depth(const ElectrodeLayout& layout, const PseudoContext& ctx, const Vector3d& null,
                       const std::vector<Vector3d>& neighbor_nulls, const DepthOptions& options) {
  auto psi = [&](const Vector3d& p) { return pseudopotential(layout, ctx, p); };
  const double psi0 = psi(null);
  DepthResult out;

  // Vertical ray, sampled in log z.
  std::vector<double> logz(static_cast<std::size_t>(options.vertical_samples));
  const double lz0 = std::log(null.z());
  const double lz1 = lz0 + std::log(options.vertical_span);
  for (std::size_t k = 0; k < logz.size(); ++k)
    logz[k] = lz0 + (lz1 - lz0) * static_cast<double>(k) / static_cast<double>(logz.size() - 1);
  const Barrier vertical = path_maximum(
      [&](double s) { return Vector3d(null.x(), null.y(), std::exp(s)); }, psi, logz);

  Barrier interwell;
  std::vector<double> ts(static_cast<std::size_t>(options.path_samples));
  for (std::size_t k = 0; k < ts.size(); ++k)
    ts[k] = static_cast<double>(k) / static_cast<double>(ts.size() - 1);
  for (const auto& nb : neighbor_nulls) {
    const Barrier b = path_maximum([&](double t) { return Vector3d(null + t * (nb - null)); }, psi, ts);
    if (b.found && (!interwell.found || b.value < interwell.value)) interwell = b;
  }

  if (vertical.found) out.vertical_barrier = vertical.value - psi0;
  if (interwell.found) out.interwell_barrier = interwell.value - psi0;

  if (vertical.found && (!interwell.found || vertical.value <= interwell.value)) {
    out.trapped = true;
    out.depth = vertical.value - psi0;
    out.channel = EscapeChannel::kVertical;
    out.escape_point = vertical.point;
  } else if (interwell.found) {
    // Without a vertical barrier inside the ray, the inter-well barrier binds
    // only if it is below the rise already seen along the ray.
    const double ray_floor = psi(Vector3d(null.x(), null.y(), std::exp(lz1))) - psi0;
    if (vertical.found || interwell.value - psi0 <= ray_floor) {
      out.trapped = true;
      out.depth = interwell.value - psi0;
      out.channel = EscapeChannel::kInterWell;
      out.escape_point = interwell.point;
    }
  }
  return out;
}

EtaZeta extract_eta_zeta(double ion_height, double omega, double depth_joules,
                         const PseudoContext& ctx) {
  EtaZeta r;
  r.eta_geo = std::sqrt(2.0) * ctx.mass * ctx.drive * ion_height * ion_height * omega /
              (ctx.charge * ctx.rf_amplitude);
  const double a = ctx.alpha();
  r.zeta = depth_joules * constants::kPi * constants::kPi * ctx.mass / (ctx.charge * ctx.charge * a * a);
  r.eta_valid = r.eta_geo > 0.0 && r.eta_geo <= 1.0;
  return r;
}

double stability_q(double eta_geo, double ion_height, const PseudoContext& ctx) {
  return 2.0 * ctx.charge * eta_geo * ctx.rf_amplitude /
         (ctx.mass * ion_height * ion_height * ctx.drive * ctx.drive);
}

void require_stable(double q) {
  if (!q_accepted(q))
    throw std::domain_error("stability parameter q = " + std::to_string(q) + " outside (0, 0.9)");
}

std::size_t central_site(const std::vector<SiteIndex>& sites) {
  if (sites.empty()) throw std::invalid_argument("no sites");
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& s : sites) centroid += s.position;
  centroid /= static_cast<double>(sites.size());
  double scale = 0.0;
  for (const auto& s : sites) scale = std::max(scale, (s.position - centroid).norm());
  const double tol = 1e-9 * std::max(scale, 1e-12);

  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const double d = (sites[k].position - centroid).norm();
    if (d < best_d - tol) {
      best = k;
      best_d = d;
    } else if (std::abs(d - best_d) <= tol &&
               std::pair(sites[k].i, sites[k].j) < std::pair(sites[best].i, sites[best].j)) {
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> adjacent_sites(const std::vector<SiteIndex>& sites, std::size_t k) {
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a + 1; b < sites.size(); ++b)
      spacing = std::min(spacing, (sites[a].position - sites[b].position).norm());
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < sites.size(); ++b) {
    if (b == k) continue;
    if ((sites[b].position - sites[k].position).norm() <= spacing * (1.0 + 1e-6)) out.push_back(b);
  }
  return out;
}

std::vector<TrapSite> characterize_lattice(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                           const std::vector<SiteIndex>& sites,
                                           const CharacterizeOptions& options) {
  ctx.validate();
  std::vector<std::size_t> requested = options.only;
  if (requested.empty())
    for (std::size_t k = 0; k < sites.size(); ++k) requested.push_back(k);

  // Sites needing a null: the requested ones plus their neighbours for depth.
  std::vector<char> need(sites.size(), 0);
  std::vector<std::vector<std::size_t>> neighbours(sites.size());
  for (auto k : requested) {
    if (k >= sites.size()) throw std::out_of_range("site index out of range");
    need[k] = 1;
    if (options.compute_depth) {
      neighbours[k] = adjacent_sites(sites, k);
      for (auto nb : neighbours[k]) need[nb] = 1;
    }
  }

  std::vector<TrapSite> all(sites.size());
  std::vector<std::size_t> work;
  for (std::size_t k = 0; k < sites.size(); ++k)
    if (need[k]) work.push_back(k);

  parallel_for(
      work.size(),
      [&](std::size_t w) {
        const std::size_t k = work[w];
        TrapSite& site = all[k];
        site.index = sites[k];
        double seed = std::numeric_limits<double>::infinity();
        for (const auto& c : layout.contours)
          for (const auto& v : c.vertices) seed = std::min(seed, (v - sites[k].position).norm());
        if (!std::isfinite(seed) || seed <= 0.0) seed = 1e-6;
        site.null = find_null(layout, Vector3d(sites[k].position.x(), sites[k].position.y(), seed),
                              options.null_options);
        if (site.null.status != NullStatus::kConverged) {
          site.status = SiteStatus::kNoNull;
          return;
        }
        site.ion_height = site.null.position.z();
        site.modes = secular_frequencies(layout, ctx, site.null.position);
        site.status = site.modes.is_minimum ? SiteStatus::kTrap : SiteStatus::kSaddle;
      },
      options.threads);

  parallel_for(
      requested.size(),
      [&](std::size_t w) {
        const std::size_t k = requested[w];
        TrapSite& site = all[k];
        if (site.status != SiteStatus::kTrap) return;
        const double omega = site.modes.radial();
        if (options.compute_depth) {
          std::vector<Vector3d> nb_nulls;
          for (auto nb : neighbours[k])
            if (all[nb].null.status == NullStatus::kConverged) nb_nulls.push_back(all[nb].null.position);
          site.depth = trap_depth(layout, ctx, site.null.position, nb_nulls, options.depth_options);
          site.depth_ev = constants::joules_to_ev(site.depth.depth);
          if (!site.depth.trapped) site.status = SiteStatus::kUntrapped;
        }
        const EtaZeta ez = extract_eta_zeta(site.ion_height, omega, site.depth.depth, ctx);
        site.eta_geo = ez.eta_geo;
        site.zeta = ez.zeta;
        site.q = stability_q(ez.eta_geo, site.ion_height, ctx);
        if (site.status == SiteStatus::kTrap && !ez.eta_valid) site.status = SiteStatus::kEtaInvalid;
        if (site.status == SiteStatus::kTrap && options.stability_gate && !q_accepted(site.q))
          site.status = SiteStatus::kUnstable;
      },
      options.threads);

  std::vector<TrapSite> out;
  out.reserve(requested.size());
  bool any = false;
  for (auto k : requested) {
    out.push_back(all[k]);
    if (all[k].status == SiteStatus::kTrap || all[k].status == SiteStatus::kUnstable) any = true;
  }
  if (!any) throw std::runtime_error("no lattice site could be characterized as a trap");
  return out;
}

}  // namespace ionlattice
