#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ionlattice/field.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/pipelines.hpp"
#include "ionlattice/trap.hpp"

using namespace ionlattice;
using Eigen::Vector3d;

namespace {

constexpr double kPi = constants::kPi;

LatticeSpec square(int m) {
  LatticeSpec spec;
  spec.sites_per_side = m;
  spec.separation = 52e-6;
  spec.radius = 14e-6;
  spec.edge_gap = 0.8 * lattice_side_length(m, spec.separation, spec.radius);
  return spec;
}

PseudoContext drive(double volts, double mhz) {
  PseudoContext ctx;
  ctx.rf_amplitude = volts;
  ctx.drive = 2.0 * kPi * mhz * 1e6;
  return ctx;
}

TrapSite central(const LatticeSpec& spec, const PseudoContext& ctx, bool depth = true, bool gate = true) {
  const auto sites = generate_sites(spec.cell_type, spec.sites_per_side, spec.separation);
  CharacterizeOptions opt;
  opt.compute_depth = depth;
  opt.only = {central_site(sites)};
  opt.threads = 1;
  opt.stability_gate = gate;
  const auto out = characterize_lattice(build_lattice_layout(spec, ctx.rf_amplitude), ctx, sites, opt);
  REQUIRE(out.size() == 1);
  return out.front();
}

}  // namespace

TEST_CASE("five-wire null is a field zero with a positive-definite Hessian") {
  const auto layout = build_five_wire(150e-6, 100e-6, 3000e-6, 100.0);
  const auto null = find_null(layout, {3e-6, 0, 80e-6});
  REQUIRE(null.status == NullStatus::kConverged);
  CHECK(field_at(layout, null.position).norm() < 1e-6);
  CHECK(std::abs(null.position.x()) < 1e-12);
  const auto modes = secular_frequencies(layout, drive(100.0, 30.0), null.position);
  CHECK(modes.is_minimum);
  for (double c : modes.curvature) CHECK(c > 0.0);
  CHECK(std::is_sorted(modes.omega.begin(), modes.omega.end()));
}

TEST_CASE("five-wire height depends on geometry only") {
  const auto a = find_null(build_five_wire(150e-6, 100e-6, 3000e-6, 50.0), {0, 0, 70e-6});
  const auto b = find_null(build_five_wire(150e-6, 100e-6, 3000e-6, 400.0), {0, 0, 90e-6});
  REQUIRE(a.status == NullStatus::kConverged);
  REQUIRE(b.status == NullStatus::kConverged);
  CHECK(a.position.z() == doctest::Approx(b.position.z()).epsilon(1e-9));
}

TEST_CASE("Hessian frequencies match sampled-curvature frequencies") {
  for (const auto& c : five_wire_cases()) {
    const auto r = solve_five_wire(c, constants::kYb171IonMassAmu * constants::kAtomicMassUnit);
    CHECK(r.max_radial_deviation < kCurvatureTolerance);
    for (double d : r.mode_deviation) CHECK(d < kCurvatureTolerance);
  }
}

TEST_CASE("single-site lattice") {
  const auto spec = square(1);
  const auto site = central(spec, drive(20.0, 50.0));
  CHECK(site.ok());
  CHECK(site.index.i == 0);
  CHECK(site.index.j == 0);
  CHECK(site.ion_height > 0.0);
}

TEST_CASE("trap depth scales as alpha squared") {
  const auto spec = square(3);
  const double mhz = 40.0;
  double reference = 0.0;
  for (double alpha_vus : {0.05, 0.1, 0.3, 0.7, 1.0, 1.5}) {
    const double volts = alpha_vus * 1e-6 * 2.0 * kPi * mhz * 1e6;
    const auto site = central(spec, drive(volts, mhz), true, false);
    REQUIRE(site.ok());
    const double ratio = site.depth.depth / (alpha_vus * alpha_vus);
    if (reference == 0.0) reference = ratio;
    CHECK(ratio == doctest::Approx(reference).epsilon(1e-6));
  }
  // Same alpha, different drive: depth unchanged.
  const auto a = central(spec, drive(2.0 * kPi * 20.0, 20.0), true, false);
  const auto b = central(spec, drive(2.0 * kPi * 60.0, 60.0), true, false);
  CHECK(a.depth.depth == doctest::Approx(b.depth.depth).epsilon(1e-6));
}

TEST_CASE("eta and zeta reproduce omega and depth") {
  const auto spec = square(3);
  const auto ctx = drive(30.0, 60.0);
  const auto site = central(spec, ctx);
  REQUIRE(site.ok());
  const double e = ctx.charge, m = ctx.mass, a = ctx.alpha();
  const double omega = site.eta_geo * e * ctx.rf_amplitude /
                       (std::sqrt(2.0) * m * ctx.drive * site.ion_height * site.ion_height);
  CHECK(omega == doctest::Approx(site.omega()).epsilon(1e-12));
  const double depth = site.zeta * e * e * a * a / (kPi * kPi * m);
  CHECK(depth == doctest::Approx(site.depth.depth).epsilon(1e-12));
  CHECK(site.q == doctest::Approx(stability_q(site.eta_geo, site.ion_height, ctx)).epsilon(1e-12));
}

TEST_CASE("stability gate") {
  CHECK(q_accepted(0.5));
  CHECK_FALSE(q_accepted(0.9));
  CHECK_FALSE(q_accepted(0.95));
  CHECK_FALSE(q_accepted(0.0));
  CHECK_THROWS_AS(require_stable(0.9), std::domain_error);
  CHECK_THROWS_AS(require_stable(1.2), std::domain_error);
  CHECK_NOTHROW(require_stable(0.899));
}

TEST_CASE("overdriven sites are rejected by the gate") {
  const auto spec = square(3);
  const auto site = central(spec, drive(2000.0, 5.0), false);
  CHECK(site.q >= kMaxStableQ);
  CHECK(site.status == SiteStatus::kUnstable);
  CHECK(central(spec, drive(2000.0, 5.0), false, false).ok());
}

TEST_CASE("square lattice sites respect the point group") {
  const auto spec = square(3);
  const auto ctx = drive(30.0, 60.0);
  const auto sites = generate_sites(spec.cell_type, 3, spec.separation);
  CharacterizeOptions opt;
  opt.compute_depth = false;
  opt.threads = 1;
  const auto out = characterize_lattice(build_lattice_layout(spec, ctx.rf_amplitude), ctx, sites, opt);
  auto find = [&](double x, double y) -> const TrapSite& {
    for (const auto& s : out)
      if ((s.index.position - Eigen::Vector2d(x, y)).norm() < 1e-9) return s;
    throw std::runtime_error("site not found");
  };
  const double A = spec.separation;
  const auto& corner = find(A, A);
  const auto& edge = find(A, 0);
  for (auto [x, y] : {std::pair{-A, A}, {A, -A}, {-A, -A}}) {
    CHECK(find(x, y).ion_height == doctest::Approx(corner.ion_height).epsilon(1e-3));
    CHECK(find(x, y).omega() == doctest::Approx(corner.omega()).epsilon(1e-3));
  }
  for (auto [x, y] : {std::pair{-A, 0.0}, {0.0, A}, {0.0, -A}}) {
    CHECK(find(x, y).ion_height == doctest::Approx(edge.ion_height).epsilon(1e-3));
    CHECK(find(x, y).omega() == doctest::Approx(edge.omega()).epsilon(1e-3));
  }
  for (const auto& s : out) {
    if (!s.ok()) continue;
    CHECK(std::abs(s.null.position.x() - s.index.position.x()) < 0.2 * A);
    CHECK(std::abs(s.null.position.y() - s.index.position.y()) < 0.2 * A);
  }
}

TEST_CASE("heights vary monotonically from the centre of a 5x5 lattice") {
  auto spec = square(5);
  spec.edge_gap = 0.2 * lattice_side_length(5, spec.separation, spec.radius);
  const auto ctx = drive(30.0, 60.0);
  const auto sites = generate_sites(spec.cell_type, 5, spec.separation);
  CharacterizeOptions opt;
  opt.compute_depth = false;
  opt.threads = 1;
  const auto out = characterize_lattice(build_lattice_layout(spec, ctx.rf_amplitude), ctx, sites, opt);
  std::vector<double> along;  // centre to edge on the x axis
  for (int k = 0; k <= 2; ++k)
    for (const auto& s : out)
      if (std::abs(s.index.position.y()) < 1e-12 && std::abs(s.index.position.x() - k * spec.separation) < 1e-12)
        along.push_back(s.ion_height);
  REQUIRE(along.size() == 3);
  const bool increasing = along[0] < along[1] && along[1] < along[2];
  const bool decreasing = along[0] > along[1] && along[1] > along[2];
  CHECK((increasing || decreasing));
}

TEST_CASE("central site tie-break") {
  const auto even = generate_sites(CellType::kSquare, 4, 52e-6);
  const auto k = central_site(even);
  for (const auto& s : even) {
    if ((s.position.norm() - even[k].position.norm()) < -1e-12) FAIL("not nearest");
    if (std::abs(s.position.norm() - even[k].position.norm()) < 1e-12)
      CHECK(std::pair(even[k].i, even[k].j) <= std::pair(s.i, s.j));
  }
  const auto odd = generate_sites(CellType::kSquare, 3, 52e-6);
  CHECK(odd[central_site(odd)].position.norm() < 1e-18);
  CHECK(adjacent_sites(odd, central_site(odd)).size() == 4);
}

TEST_CASE("depth below a field-free point is positive") {
  const auto spec = square(3);
  const auto site = central(spec, drive(30.0, 60.0));
  REQUIRE(site.ok());
  CHECK(site.depth.trapped);
  CHECK(site.depth_ev > 0.0);
  CHECK(site.depth.channel != EscapeChannel::kNone);
  CHECK(site.depth_ev == doctest::Approx(constants::joules_to_ev(site.depth.depth)).epsilon(1e-14));
}
