#pragma once

#include <vector>

#include "quietgait/rigidsim/types.hpp"

namespace quietgait::rigidsim {

/// Ground geometry plus contact-material parameters. Exactly one geometry
/// mode is active: a node-sampled height field with bilinear interpolation
/// (clamped to its edge values outside the grid) or an infinite planar ramp
/// z = tan(slope_angle) * x. Flat ground is a zero-angle ramp.
class Terrain {
 public:
  double friction = 0.7;

  // Penalty contact material. Stiffness is chosen so the 2.2 kg default
  // robot standing on four feet penetrates ~1.4 mm; damping keeps the
  // light distal links well inside the explicit-integration stability
  // region (damping impulse per substep stays below the foot-effective
  // momentum).
  double contact_stiffness = 4000.0;   // N/m
  double contact_damping = 15.0;       // N s/m
  double tangent_stiffness = 2000.0;   // N/m
  double tangent_damping = 8.0;        // N s/m

  static Terrain flat(double friction = 0.7) { return ramp(0.0, friction); }

  static Terrain ramp(double slope_angle, double friction = 0.7) {
    Terrain t;
    t.mode_ = Mode::kRamp;
    t.slope_angle_ = slope_angle;
    t.friction = friction;
    return t;
  }

  /// Heights are node samples on an n x n grid with the given spacing,
  /// centred on the origin, row-major in y.
  static Terrain height_field(int n, double cell_size, std::vector<double> heights,
                              double friction = 0.7);

  double height(double x, double y) const;
  Vec3 normal(double x, double y) const;  // unit, points away from the ground

  bool is_ramp() const { return mode_ == Mode::kRamp; }
  double slope_angle() const { return slope_angle_; }
  double max_height() const;

 private:
  enum class Mode { kRamp, kHeightField };
  Mode mode_ = Mode::kRamp;
  double slope_angle_ = 0.0;

  int n_ = 0;
  double cell_ = 0.05;
  double origin_ = 0.0;  // coordinate of node 0 in both x and y
  std::vector<double> heights_;
};

}  // namespace quietgait::rigidsim
