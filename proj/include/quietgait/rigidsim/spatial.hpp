#pragma once

// 6-D spatial vector algebra for articulated rigid-body dynamics.
//
// Conventions: motion vectors are [angular; linear], force vectors are
// [moment; force]. A frame transform is given by (E, r) where r is the child
// origin expressed in the parent frame and E rotates parent coordinates into
// child coordinates. Spatial inertias are stored about the frame origin as
// (mass m, first moment h = m*com, rotational inertia I about the origin).

#include "quietgait/rigidsim/types.hpp"

namespace quietgait::rigidsim {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

struct SpatialInertia {
  double m = 0.0;
  Vec3 h = Vec3::Zero();  // m * com offset
  Mat3 I = Mat3::Zero();  // about frame origin

  static SpatialInertia from_com(double mass, const Vec3& com, const Mat3& inertia_com) {
    SpatialInertia out;
    out.m = mass;
    out.h = mass * com;
    const Mat3 c = skew(com);
    out.I = inertia_com + mass * c * c.transpose();
    return out;
  }
};

/// Motion vector from parent coordinates to child coordinates.
inline Vec6 xform_motion(const Mat3& E, const Vec3& r, const Vec6& v) {
  Vec6 out;
  const Vec3 w = v.head<3>();
  out.head<3>() = E * w;
  out.tail<3>() = E * (v.tail<3>() - r.cross(w));
  return out;
}

/// Force vector from child coordinates back to parent coordinates.
inline Vec6 xform_force_to_parent(const Mat3& E, const Vec3& r, const Vec6& f) {
  Vec6 out;
  const Vec3 fp = E.transpose() * f.tail<3>();
  out.head<3>() = E.transpose() * f.head<3>() + r.cross(fp);
  out.tail<3>() = fp;
  return out;
}

/// Motion-cross-motion: v x m.
inline Vec6 cross_motion(const Vec6& v, const Vec6& m) {
  Vec6 out;
  const Vec3 w = v.head<3>(), vo = v.tail<3>();
  out.head<3>() = w.cross(Vec3(m.head<3>()));
  out.tail<3>() = vo.cross(Vec3(m.head<3>())) + w.cross(Vec3(m.tail<3>()));
  return out;
}

/// Motion-cross-force: v x* f.
inline Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  const Vec3 w = v.head<3>(), vo = v.tail<3>();
  out.head<3>() = w.cross(Vec3(f.head<3>())) + vo.cross(Vec3(f.tail<3>()));
  out.tail<3>() = w.cross(Vec3(f.tail<3>()));
  return out;
}

inline Vec6 apply_inertia(const SpatialInertia& si, const Vec6& v) {
  Vec6 out;
  const Vec3 w = v.head<3>(), vo = v.tail<3>();
  out.head<3>() = si.I * w + si.h.cross(vo);
  out.tail<3>() = si.m * vo - si.h.cross(w);
  return out;
}

inline Mat6 inertia_matrix(const SpatialInertia& si) {
  Mat6 out;
  const Mat3 hx = skew(si.h);
  out.topLeftCorner<3, 3>() = si.I;
  out.topRightCorner<3, 3>() = hx;
  out.bottomLeftCorner<3, 3>() = hx.transpose();
  out.bottomRightCorner<3, 3>() = si.m * Mat3::Identity();
  return out;
}

/// Expresses a child-frame spatial inertia in the parent frame, where the
/// child origin sits at r (parent coords) and E maps parent->child coords.
inline SpatialInertia xform_inertia_to_parent(const SpatialInertia& si, const Mat3& E,
                                              const Vec3& r) {
  SpatialInertia out;
  out.m = si.m;
  const Vec3 h_rot = E.transpose() * si.h;
  out.h = h_rot + si.m * r;
  const Mat3 hx = skew(h_rot);
  const Mat3 rx = skew(r);
  out.I = E.transpose() * si.I * E - hx * rx - rx * hx - si.m * rx * rx;
  return out;
}

}  // namespace quietgait::rigidsim
