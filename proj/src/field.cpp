#include "ionlattice/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace ionlattice {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

void PseudoContext::validate() const {
  if (!(charge > 0) || !(mass > 0) || !(drive > 0) || !(rf_amplitude > 0))
    throw std::invalid_argument("pseudopotential context requires positive charge, mass, drive and amplitude");
}

Vector3d segment_kernel(const Vector2d& a, const Vector2d& b, const Vector3d& p) {
  const Vector3d r1(p.x() - a.x(), p.y() - a.y(), p.z());
  const Vector3d r2(p.x() - b.x(), p.y() - b.y(), p.z());
  const double n1 = r1.norm();
  const double n2 = r2.norm();
  const double f = (n1 + n2) / (n1 * n2 * (n1 * n2 + r1.dot(r2)));
  return -f * r1.cross(r2);
}

Vector3d unit_field(const ElectrodeLayout& layout, const Vector3d& p) {
  if (!(p.z() > 0.0)) throw std::domain_error("field point must lie above the electrode plane");
  const double z = p.z();
  const double z2 = z * z;
  double ex = 0.0, ey = 0.0, ez = 0.0;
  for (const auto& contour : layout.contours) {
    const auto& v = contour.vertices;
    if (v.size() < 2) continue;
    // Walk the vertices once so every |r| is computed a single time.
    double x1 = p.x() - v[0].x();
    double y1 = p.y() - v[0].y();
    double n1 = std::sqrt(x1 * x1 + y1 * y1 + z2);
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double x2 = p.x() - v[k].x();
      const double y2 = p.y() - v[k].y();
      const double n2 = std::sqrt(x2 * x2 + y2 * y2 + z2);
      const double f = (n1 + n2) / (n1 * n2 * (n1 * n2 + x1 * x2 + y1 * y2 + z2));
      // r1 x r2 with r = (x, y, z)
      ex += f * (y1 * z - z * y2);
      ey += f * (z * x2 - x1 * z);
      ez += f * (x1 * y2 - y1 * x2);
      x1 = x2;
      y1 = y2;
      n1 = n2;
    }
  }
  // The contour integral of (p - x') x ds gives -sum(f r1 x r2); the physical
  // field of a counterclockwise island at +V is its negative times V/(2 pi).
  return Vector3d(ex, ey, ez) / (2.0 * constants::kPi);
}

Vector3d field_at(const ElectrodeLayout& layout, const Vector3d& p) {
  return layout.rf_amplitude * unit_field(layout, p);
}

double pseudopotential(const ElectrodeLayout& layout, const PseudoContext& ctx, const Vector3d& p) {
  const double e2 = unit_field(layout, p).squaredNorm() * ctx.rf_amplitude * ctx.rf_amplitude;
  return ctx.charge * ctx.charge * e2 / (4.0 * ctx.mass * ctx.drive * ctx.drive);
}

double fd_step(const Vector3d& p) {
  const double h = std::max(1e-9, 1e-4 * p.z());
  if (!(p.z() - 2.0 * h > 0.0))
    throw std::domain_error("finite-difference stencil reaches the electrode plane");
  return h;
}

Matrix3d unit_field_jacobian(const ElectrodeLayout& layout, const Vector3d& p) {
  const double h = fd_step(p);
  Matrix3d j;
  for (int c = 0; c < 3; ++c) {
    Vector3d d = Vector3d::Zero();
    d[c] = h;
    j.col(c) = (unit_field(layout, p + d) - unit_field(layout, p - d)) / (2.0 * h);
  }
  return j;
}

Matrix3d field_jacobian(const ElectrodeLayout& layout, const Vector3d& p) {
  return layout.rf_amplitude * unit_field_jacobian(layout, p);
}

Matrix3d pseudo_hessian(const ElectrodeLayout& layout, const PseudoContext& ctx, const Vector3d& p) {
  const double h = fd_step(p);
  auto psi = [&](const Vector3d& q) { return pseudopotential(layout, ctx, q); };
  const double c = psi(p);
  Matrix3d hess;
  for (int a = 0; a < 3; ++a) {
    Vector3d da = Vector3d::Zero();
    da[a] = h;
    hess(a, a) = (psi(p + da) - 2.0 * c + psi(p - da)) / (h * h);
    for (int b = a + 1; b < 3; ++b) {
      Vector3d db = Vector3d::Zero();
      db[b] = h;
      const double v = (psi(p + da + db) - psi(p + da - db) - psi(p - da + db) + psi(p - da - db)) /
                       (4.0 * h * h);
      hess(a, b) = v;
      hess(b, a) = v;
    }
  }
  return 0.5 * (hess + hess.transpose());
}

Matrix3d pseudo_hessian_assembled(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                  const Vector3d& p) {
  const double h = fd_step(p);
  const double v = ctx.rf_amplitude;
  auto field = [&](const Vector3d& q) { return Vector3d(v * unit_field(layout, q)); };
  const Vector3d e0 = field(p);
  Matrix3d jac;
  // second derivatives d2E_k / dx_a dx_b, one 3x3 block per component k
  Matrix3d d2[3];
  for (int a = 0; a < 3; ++a) {
    Vector3d da = Vector3d::Zero();
    da[a] = h;
    const Vector3d ep = field(p + da);
    const Vector3d em = field(p - da);
    jac.col(a) = (ep - em) / (2.0 * h);
    const Vector3d diag = (ep - 2.0 * e0 + em) / (h * h);
    for (int k = 0; k < 3; ++k) d2[k](a, a) = diag[k];
    for (int b = a + 1; b < 3; ++b) {
      Vector3d db = Vector3d::Zero();
      db[b] = h;
      const Vector3d off =
          (field(p + da + db) - field(p + da - db) - field(p - da + db) + field(p - da - db)) /
          (4.0 * h * h);
      for (int k = 0; k < 3; ++k) {
        d2[k](a, b) = off[k];
        d2[k](b, a) = off[k];
      }
    }
  }
  Matrix3d hess = jac.transpose() * jac;
  for (int k = 0; k < 3; ++k) hess += e0[k] * d2[k];
  hess *= ctx.charge * ctx.charge / (2.0 * ctx.mass * ctx.drive * ctx.drive);
  return 0.5 * (hess + hess.transpose());
}

}  // namespace ionlattice
