// Self-collision counting: trunk box vs leg-link capsules plus
// capsule-capsule pairs, with kinematically adjacent pairs excluded.

#include <algorithm>
#include <cmath>

#include "quietgait/rigidsim/engine.hpp"

namespace quietgait::rigidsim {

namespace {

double clamp01(double t) { return std::clamp(t, 0.0, 1.0); }

// Closest-distance between segments p1+s*d1 and p2+t*d2 (Ericson, RTCD 5.1.9).
double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-12;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = clamp01(f / e);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = clamp01(-c / a);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > kEps) s = clamp01((b * f - c * e) / denom);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = clamp01(-c / a);
      } else if (t > 1.0) {
        t = 1.0;
        s = clamp01((b - c) / a);
      }
    }
  }
  return (p1 + s * d1 - (p2 + t * d2)).norm();
}

double point_box_distance(const Vec3& p_local, const Vec3& half) {
  const Vec3 clamped(std::clamp(p_local.x(), -half.x(), half.x()),
                     std::clamp(p_local.y(), -half.y(), half.y()),
                     std::clamp(p_local.z(), -half.z(), half.z()));
  return (p_local - clamped).norm();
}

// Distance from a segment to an oriented box via ternary search; the
// distance along the segment to a convex set is convex in the parameter.
double segment_box_distance(const Vec3& p, const Vec3& q, const Mat3& rot_box,
                            const Vec3& center, const Vec3& half) {
  const Vec3 a = rot_box.transpose() * (p - center);
  const Vec3 b = rot_box.transpose() * (q - center);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double d1 = point_box_distance(a + m1 * (b - a), half);
    const double d2 = point_box_distance(a + m2 * (b - a), half);
    if (d1 < d2)
      hi = m2;
    else
      lo = m1;
  }
  const double mid = 0.5 * (lo + hi);
  const double dm = point_box_distance(a + mid * (b - a), half);
  const double d0 = point_box_distance(a, half);
  const double d1 = point_box_distance(b, half);
  return std::min({dm, d0, d1});
}

}  // namespace

int Engine::self_collision_from_kinematics(const Kinematics& k) const {
  // Leg-link capsules: per leg the upper link (shoulder-roll body) and the
  // lower link (ankle body), each a segment from the body origin down -z.
  struct Capsule {
    Vec3 a, b;
    int leg;
    bool lower;
    double reach;  // half length, for the broad phase
    Vec3 mid;
  };
  Capsule caps[2 * kNumLegs];
  int nc = 0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int which = 1; which <= 2; ++which) {
      const int ji = leg * kJointsPerLeg + which;
      const int b = 1 + ji;
      const double len = model_.joints[ji].link_length;
      Capsule& c = caps[nc++];
      c.a = k.origin_world[b];
      c.b = k.origin_world[b] + k.rot_world[b] * Vec3(0.0, 0.0, -len);
      c.leg = leg;
      c.lower = (which == 2);
      c.reach = 0.5 * len;
      c.mid = 0.5 * (c.a + c.b);
    }
  }
  const double r_cap = model_.collision_capsule_radius;
  const double trunk_reach = model_.base_half_extents.norm();
  const Vec3& half = model_.base_half_extents;
  int count = 0;

  // Capsule-capsule between different legs (same-leg pairs are adjacent).
  for (int i = 0; i < nc; ++i) {
    for (int j = i + 1; j < nc; ++j) {
      if (caps[i].leg == caps[j].leg) continue;
      const double broad = caps[i].reach + caps[j].reach + 2.0 * r_cap;
      if ((caps[i].mid - caps[j].mid).squaredNorm() > broad * broad) continue;
      if (segment_segment_distance(caps[i].a, caps[i].b, caps[j].a, caps[j].b) < 2.0 * r_cap)
        ++count;
    }
  }
  // Trunk box vs lower-leg capsules (upper links attach to the trunk and
  // count as adjacent).
  for (int i = 0; i < nc; ++i) {
    if (!caps[i].lower) continue;
    const double broad = trunk_reach + caps[i].reach + r_cap;
    if ((caps[i].mid - k.origin_world[0]).squaredNorm() > broad * broad) continue;
    if (segment_box_distance(caps[i].a, caps[i].b, k.rot_world[0], k.origin_world[0], half) <
        r_cap)
      ++count;
  }
  return count;
}

int Engine::self_collision_count(const SimState& s) const {
  Kinematics k;
  forward_pass(s, k);
  return self_collision_from_kinematics(k);
}

}  // namespace quietgait::rigidsim
