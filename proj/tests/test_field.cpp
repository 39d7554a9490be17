#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ionlattice/field.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/pipelines.hpp"

using namespace ionlattice;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

constexpr double kPi = constants::kPi;

// Direct adaptive quadrature of (p - x') x ds / |p - x'|^3 along a -> b.
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

std::vector<Vector2d> random_star_polygon(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nv(3, 12);
  std::uniform_real_distribution<double> rad(10e-6, 60e-6), shift(-50e-6, 50e-6);
  const int n = nv(rng);
  const Vector2d c(shift(rng), shift(rng));
  std::vector<Vector2d> v;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    const double r = rad(rng);
    v.push_back(c + r * Vector2d(std::cos(th), std::sin(th)));
  }
  v.push_back(v.front());
  return v;
}

double disk_ez(double R, double z) { return R * R / std::pow(R * R + z * z, 1.5); }

ElectrodeLayout polygon_disk(int n, double R, double volts = 1.0) {
  ElectrodeLayout l;
  l.rf_amplitude = volts;
  l.contours.push_back({ContourKind::kOuter, regular_polygon({0, 0}, R, n, 0.0, false)});
  return l;
}

ElectrodeLayout test_lattice(double volts = 1.0) {
  LatticeSpec spec;
  spec.sites_per_side = 3;
  spec.separation = 52e-6;
  spec.radius = 14e-6;
  spec.edge_gap = 0.8 * lattice_side_length(3, spec.separation, spec.radius);
  return build_lattice_layout(spec, volts);
}

}  // namespace

TEST_CASE("segment kernel matches dense quadrature on random polygons") {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> px(-120e-6, 120e-6), pz(5e-6, 150e-6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto poly = random_star_polygon(rng);
    const Vector3d p(px(rng), px(rng), pz(rng));
    Vector3d closed = Vector3d::Zero(), quad = Vector3d::Zero();
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
      closed += segment_kernel(poly[k], poly[k + 1], p);
      quad += quadrature_kernel(poly[k], poly[k + 1], p);
    }
    worst = std::max(worst, (closed - quad).norm() / quad.norm());
  }
  MESSAGE("worst relative deviation " << worst);
  CHECK(worst < 1e-9);
}

TEST_CASE("unit field is minus the kernel sum over 2 pi") {
  const auto layout = polygon_disk(7, 30e-6);
  const Vector3d p(3e-6, -4e-6, 20e-6);
  Vector3d sum = Vector3d::Zero();
  const auto& v = layout.contours[0].vertices;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) sum += quadrature_kernel(v[k], v[k + 1], p);
  const Vector3d e = unit_field(layout, p);
  CHECK((e + sum / (2.0 * kPi)).norm() / e.norm() < 1e-9);
  CHECK(e.z() > 0.0);
}

TEST_CASE("many-sided polygon reproduces the disk on axis") {
  const double R = 50e-6;
  for (double z : {5e-6, 30e-6, 80e-6, 300e-6}) {
    const Vector3d e = field_at(polygon_disk(10000, R, 2.0), {0, 0, z});
    CHECK(std::abs(e.z() - 2.0 * disk_ez(R, z)) / (2.0 * disk_ez(R, z)) < 1e-4);
    CHECK(std::hypot(e.x(), e.y()) < 1e-9 * std::abs(e.z()));
  }
}

TEST_CASE("polygon to disk convergence is second order") {
  const double R = 50e-6, z = 40e-6;
  auto err = [&](int n) { return std::abs(field_at(polygon_disk(n, R), {0, 0, z}).z() - disk_ez(R, z)); };
  for (int n : {32, 64, 128, 256}) {
    const double ratio = err(n) / err(2 * n);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.02));
  }
}

TEST_CASE("field is linear in voltage") {
  const Vector3d p(7e-6, 3e-6, 25e-6);
  const Vector3d e1 = field_at(test_lattice(1.0), p);
  const Vector3d e2 = field_at(test_lattice(2.0), p);
  CHECK(e2 == 2.0 * e1);
}

TEST_CASE("superposition of disjoint islands") {
  ElectrodeLayout a = polygon_disk(9, 20e-6);
  ElectrodeLayout b;
  b.contours.push_back({ContourKind::kOuter, regular_polygon({90e-6, 10e-6}, 25e-6, 11, 0.2, false)});
  ElectrodeLayout both = a;
  both.contours.push_back(b.contours[0]);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100e-6, 150e-6), h(2e-6, 100e-6);
  for (int k = 0; k < 50; ++k) {
    const Vector3d p(u(rng), u(rng), h(rng));
    const Vector3d sum = field_at(a, p) + field_at(b, p);
    CHECK((field_at(both, p) - sum).norm() <= 1e-12 * sum.norm());
  }
}

TEST_CASE("mirror symmetry of the five-wire trap") {
  const auto layout = build_five_wire(150e-6, 100e-6, 3000e-6, 100.0);
  for (double x : {5e-6, 40e-6, 120e-6}) {
    const Vector3d p(x, 17e-6, 60e-6), q(-x, 17e-6, 60e-6);
    const Vector3d ep = field_at(layout, p), eq = field_at(layout, q);
    CHECK(std::abs(ep.x() + eq.x()) <= 1e-12 * ep.norm());
    CHECK(std::abs(ep.z() - eq.z()) <= 1e-12 * ep.norm());
    CHECK(std::abs(field_jacobian(layout, {0, 17e-6, 60e-6})(0, 1)) <= 1e-6 * ep.norm() / 60e-6);
  }
}

TEST_CASE("large uniform island has no field above its centre") {
  ElectrodeLayout l;
  const double s = 0.5;
  l.contours.push_back({ContourKind::kOuter, {{-s, -s}, {s, -s}, {s, s}, {-s, s}, {-s, -s}}});
  const double z = 50e-6;
  const Vector3d e = field_at(l, {0, 0, z});
  // Bounded by the disk of radius s, V / s, against the V / z scale of the problem.
  CHECK(e.norm() * z < 1e-4);
  CHECK(e.z() > 0.0);
  CHECK(e.z() < 1.0 / (s * 0.999));
}

TEST_CASE("field below or on the plane is rejected") {
  const auto layout = polygon_disk(8, 10e-6);
  CHECK_THROWS_AS(field_at(layout, {0, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(field_at(layout, {0, 0, -1e-6}), std::domain_error);
}

TEST_CASE("pseudopotential scales with V squared and is non-negative") {
  PseudoContext ctx;
  ctx.rf_amplitude = 40.0;
  PseudoContext ctx2 = ctx;
  ctx2.rf_amplitude = 80.0;
  const auto layout = test_lattice(1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-150e-6, 150e-6), h(1e-6, 200e-6);
  for (int k = 0; k < 200; ++k) {
    const Vector3d p(u(rng), u(rng), h(rng));
    const double psi = pseudopotential(layout, ctx, p);
    CHECK(psi >= 0.0);
    CHECK(pseudopotential(layout, ctx2, p) == doctest::Approx(4.0 * psi).epsilon(1e-13));
  }
  const Vector3d p(0, 0, 20e-6);
  const double e2 = field_at(test_lattice(40.0), p).squaredNorm();
  const double q = constants::kElementaryCharge;
  CHECK(pseudopotential(layout, ctx, p) ==
        doctest::Approx(q * q * e2 / (4.0 * ctx.mass * ctx.drive * ctx.drive)).epsilon(1e-13));
}

TEST_CASE("two Hessian routes agree away from nulls") {
  PseudoContext ctx;
  ctx.rf_amplitude = 50.0;
  const auto layout = test_lattice(1.0);
  for (const Vector3d& p : {Vector3d(10e-6, 5e-6, 30e-6), Vector3d(-20e-6, 30e-6, 45e-6), Vector3d(60e-6, 0, 15e-6)}) {
    const Eigen::Matrix3d a = pseudo_hessian(layout, ctx, p);
    const Eigen::Matrix3d b = pseudo_hessian_assembled(layout, ctx, p);
    CHECK((a - a.transpose()).norm() == 0.0);
    CHECK((a - b).norm() / b.norm() < 1e-6);
  }
}

TEST_CASE("five-wire pseudopotential minimum sits near the reference height") {
  const auto c = five_wire_cases()[0];
  const auto layout = build_five_wire(c.rail_width_um * 1e-6, c.central_width_um * 1e-6, 3000e-6, c.voltage);
  PseudoContext ctx;
  ctx.rf_amplitude = c.voltage;
  ctx.drive = 2.0 * kPi * c.drive_mhz * 1e6;
  const double r = c.expected_r_um * 1e-6;
  double best_z = 0.0, best = 1e300;
  for (int k = 0; k <= 400; ++k) {
    const double z = r * (0.5 + k / 400.0);
    const double psi = pseudopotential(layout, ctx, {0, 0, z});
    if (psi < best) best = psi, best_z = z;
  }
  CHECK(std::abs(best_z - r) / r < 0.02);
  const Eigen::Matrix3d h = pseudo_hessian(layout, ctx, {0, 0, best_z});
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h);
  CHECK(eig.eigenvalues().minCoeff() > -1e-6 * eig.eigenvalues().maxCoeff());
}
