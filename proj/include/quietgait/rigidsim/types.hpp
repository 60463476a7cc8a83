#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace quietgait::rigidsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat18 = Eigen::Matrix<double, 18, 18>;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;  // 12
inline constexpr int kNumBodies = 1 + kNumJoints;            // base + one body per joint
inline constexpr int kDofs = 6 + kNumJoints;                 // floating base + joints

inline constexpr double kGravity = 9.81;  // m/s^2, acts along -z

}  // namespace quietgait::rigidsim
