#include "quietgait/rigidsim/terrain.hpp"

#include <algorithm>
#include <cmath>

#include "quietgait/common/error.hpp"

namespace quietgait::rigidsim {

Terrain Terrain::height_field(int n, double cell_size, std::vector<double> heights,
                              double friction) {
  if (n < 2) throw InvalidInputError("terrain: height field needs at least 2x2 nodes");
  if (!(cell_size > 0.0)) throw InvalidInputError("terrain: cell size must be > 0");
  if (static_cast<int>(heights.size()) != n * n)
    throw InvalidInputError("terrain: height count does not match grid size");
  for (double h : heights)
    if (!std::isfinite(h)) throw InvalidInputError("terrain: non-finite height");
  Terrain t;
  t.mode_ = Mode::kHeightField;
  t.n_ = n;
  t.cell_ = cell_size;
  t.origin_ = -0.5 * (n - 1) * cell_size;
  t.heights_ = std::move(heights);
  t.friction = friction;
  return t;
}

double Terrain::height(double x, double y) const {
  if (mode_ == Mode::kRamp) return std::tan(slope_angle_) * x;
  const double fx = std::clamp((x - origin_) / cell_, 0.0, static_cast<double>(n_ - 1));
  const double fy = std::clamp((y - origin_) / cell_, 0.0, static_cast<double>(n_ - 1));
  const int i = std::min(static_cast<int>(fx), n_ - 2);
  const int j = std::min(static_cast<int>(fy), n_ - 2);
  const double tx = fx - i, ty = fy - j;
  const double h00 = heights_[j * n_ + i], h10 = heights_[j * n_ + i + 1];
  const double h01 = heights_[(j + 1) * n_ + i], h11 = heights_[(j + 1) * n_ + i + 1];
  return (1 - tx) * (1 - ty) * h00 + tx * (1 - ty) * h10 + (1 - tx) * ty * h01 + tx * ty * h11;
}

Vec3 Terrain::normal(double x, double y) const {
  if (mode_ == Mode::kRamp)
    return Vec3(-std::sin(slope_angle_), 0.0, std::cos(slope_angle_));
  const double fx = (x - origin_) / cell_;
  const double fy = (y - origin_) / cell_;
  if (fx <= 0.0 || fy <= 0.0 || fx >= n_ - 1 || fy >= n_ - 1) return Vec3::UnitZ();
  const int i = std::min(static_cast<int>(fx), n_ - 2);
  const int j = std::min(static_cast<int>(fy), n_ - 2);
  const double tx = fx - i, ty = fy - j;
  const double h00 = heights_[j * n_ + i], h10 = heights_[j * n_ + i + 1];
  const double h01 = heights_[(j + 1) * n_ + i], h11 = heights_[(j + 1) * n_ + i + 1];
  const double hx = ((h10 - h00) * (1 - ty) + (h11 - h01) * ty) / cell_;
  const double hy = ((h01 - h00) * (1 - tx) + (h11 - h10) * tx) / cell_;
  return Vec3(-hx, -hy, 1.0).normalized();
}

double Terrain::max_height() const {
  if (mode_ == Mode::kRamp) return 0.0;
  return *std::max_element(heights_.begin(), heights_.end());
}

}  // namespace quietgait::rigidsim
