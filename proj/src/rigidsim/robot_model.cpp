#include "quietgait/rigidsim/robot_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "quietgait/common/error.hpp"
#include "quietgait/common/text.hpp"

namespace quietgait::rigidsim {

using nlohmann::json;

RobotModel RobotModel::default_model() {
  RobotModel m;
  m.base_mass = 1.6;
  m.base_inertia = Vec3(1.81e-3, 4.8e-3, 5.65e-3).asDiagonal();
  m.base_half_extents = Vec3(0.09, 0.05, 0.03);
  m.hip_offsets = {Vec3(0.09, -0.05, 0.0), Vec3(0.09, 0.05, 0.0), Vec3(-0.09, -0.05, 0.0),
                   Vec3(-0.09, 0.05, 0.0)};
  m.foot_radius = 0.012;
  m.collision_capsule_radius = 0.008;

  static const char* kLegNames[kNumLegs] = {"FR", "FL", "HR", "HL"};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    JointSpec& pitch = m.joints[leg * 3 + 0];
    pitch.name = std::string(kLegNames[leg]) + "_shoulder_pitch";
    pitch.axis = Vec3::UnitY();
    pitch.link_length = 0.0;  // shoulder assembly, co-located with the roll joint
    pitch.link_mass = 0.01;
    pitch.link_inertia = 1e-5;
    pitch.link_com_ratio = 0.0;
    pitch.joint_limit_lo = -2.2;
    pitch.joint_limit_hi = 2.2;

    JointSpec& roll = m.joints[leg * 3 + 1];
    roll.name = std::string(kLegNames[leg]) + "_shoulder_roll";
    roll.axis = Vec3::UnitX();
    roll.link_length = 0.075;  // upper leg
    roll.link_mass = 0.05;
    roll.link_inertia = 3e-5;
    roll.link_com_ratio = 0.5;
    roll.joint_limit_lo = -1.0;
    roll.joint_limit_hi = 1.0;

    JointSpec& ankle = m.joints[leg * 3 + 2];
    ankle.name = std::string(kLegNames[leg]) + "_ankle_pitch";
    ankle.axis = Vec3::UnitY();
    ankle.link_length = 0.075;  // lower leg; the foot sphere hangs at its tip
    ankle.link_mass = 0.09;
    ankle.link_inertia = 4e-5;
    ankle.link_com_ratio = 0.85;  // paw-heavy
    ankle.joint_limit_lo = -2.6;
    ankle.joint_limit_hi = 2.6;

    const double sign = (leg < 2) ? 1.0 : -1.0;  // elbows back, knees forward
    m.default_pose[leg * 3 + 0] = sign * 0.76;
    m.default_pose[leg * 3 + 1] = 0.0;
    m.default_pose[leg * 3 + 2] = -sign * 1.52;
  }

  // Base height with both links folded symmetrically under the hip.
  m.stand_height = 2.0 * 0.075 * std::cos(0.76) + m.foot_radius;
  return m;
}

void RobotModel::validate() const {
  if (!(base_mass > 0.0)) throw InvalidInputError("robot model: base_mass must be > 0");
  if ((base_inertia - base_inertia.transpose()).norm() > 1e-12)
    throw InvalidInputError("robot model: base_inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(base_inertia);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw InvalidInputError("robot model: base_inertia must be positive definite");
  if (!(foot_radius > 0.0)) throw InvalidInputError("robot model: foot_radius must be > 0");
  if (!(stand_height > 0.0)) throw InvalidInputError("robot model: stand_height must be > 0");
  for (int j = 0; j < kNumJoints; ++j) {
    const JointSpec& js = joints[j];
    if (!(js.link_mass > 0.0))
      throw InvalidInputError("robot model: link_mass must be > 0 at joint " + js.name);
    if (!(js.link_inertia > 0.0))
      throw InvalidInputError("robot model: link_inertia must be > 0 at joint " + js.name);
    if (std::abs(js.axis.norm() - 1.0) > 1e-9)
      throw InvalidInputError("robot model: joint_axis must be unit length at joint " + js.name);
    if (!(js.joint_limit_lo < js.joint_limit_hi))
      throw InvalidInputError("robot model: joint_limits lo < hi violated at joint " + js.name);
    if (default_pose[j] < js.joint_limit_lo || default_pose[j] > js.joint_limit_hi)
      throw InvalidInputError("robot model: default_pose outside joint limits at joint " +
                              js.name);
    if (!(js.torque_limit > 0.0))
      throw InvalidInputError("robot model: torque_limit must be > 0 at joint " + js.name);
    if (!(js.velocity_limit > 0.0))
      throw InvalidInputError("robot model: velocity_limit must be > 0 at joint " + js.name);
    if (js.link_length < 0.0)
      throw InvalidInputError("robot model: link_length must be >= 0 at joint " + js.name);
  }
}

namespace {

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("robot model: " + where + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

json robot_model_to_json(const RobotModel& m) {
  json j;
  j["base_mass"] = m.base_mass;
  j["base_inertia_diag"] = vec3_to(m.base_inertia.diagonal());
  j["base_half_extents"] = vec3_to(m.base_half_extents);
  j["foot_radius"] = m.foot_radius;
  j["collision_capsule_radius"] = m.collision_capsule_radius;
  j["stand_height"] = m.stand_height;
  json hips = json::array();
  for (const auto& h : m.hip_offsets) hips.push_back(vec3_to(h));
  j["hip_offsets"] = hips;
  json joints = json::array();
  for (int i = 0; i < kNumJoints; ++i) {
    const JointSpec& js = m.joints[i];
    json je;
    je["name"] = js.name;
    je["axis"] = vec3_to(js.axis);
    je["link_length"] = js.link_length;
    je["link_mass"] = js.link_mass;
    je["link_inertia"] = js.link_inertia;
    je["link_com_ratio"] = js.link_com_ratio;
    je["joint_limits"] = json::array({js.joint_limit_lo, js.joint_limit_hi});
    je["torque_limit"] = js.torque_limit;
    je["velocity_limit"] = js.velocity_limit;
    je["default_position"] = m.default_pose[i];
    joints.push_back(je);
  }
  j["joints"] = joints;
  return j;
}

RobotModel robot_model_from_json(const json& j) {
  RobotModel m = RobotModel::default_model();
  if (!j.is_object()) throw ParseError("robot model: document must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "base_mass") {
      m.base_mass = v.get<double>();
    } else if (key == "base_inertia_diag") {
      m.base_inertia = vec3_from(v, key).asDiagonal();
    } else if (key == "base_half_extents") {
      m.base_half_extents = vec3_from(v, key);
    } else if (key == "foot_radius") {
      m.foot_radius = v.get<double>();
    } else if (key == "collision_capsule_radius") {
      m.collision_capsule_radius = v.get<double>();
    } else if (key == "stand_height") {
      m.stand_height = v.get<double>();
    } else if (key == "hip_offsets") {
      if (!v.is_array() || v.size() != kNumLegs)
        throw ParseError("robot model: hip_offsets must have 4 entries");
      for (int leg = 0; leg < kNumLegs; ++leg) m.hip_offsets[leg] = vec3_from(v[leg], key);
    } else if (key == "joints") {
      if (!v.is_array() || v.size() != kNumJoints)
        throw ParseError("robot model: joints must have 12 entries");
      for (int i = 0; i < kNumJoints; ++i) {
        const json& je = v[i];
        JointSpec& js = m.joints[i];
        for (auto jt = je.begin(); jt != je.end(); ++jt) {
          const std::string& jk = jt.key();
          const json& jv = jt.value();
          if (jk == "name") js.name = jv.get<std::string>();
          else if (jk == "axis") js.axis = vec3_from(jv, "joints[" + std::to_string(i) + "].axis");
          else if (jk == "link_length") js.link_length = jv.get<double>();
          else if (jk == "link_mass") js.link_mass = jv.get<double>();
          else if (jk == "link_inertia") js.link_inertia = jv.get<double>();
          else if (jk == "link_com_ratio") js.link_com_ratio = jv.get<double>();
          else if (jk == "joint_limits") {
            if (!jv.is_array() || jv.size() != 2)
              throw ParseError("robot model: joint_limits must be [lo, hi]");
            js.joint_limit_lo = jv[0].get<double>();
            js.joint_limit_hi = jv[1].get<double>();
          } else if (jk == "torque_limit") js.torque_limit = jv.get<double>();
          else if (jk == "velocity_limit") js.velocity_limit = jv.get<double>();
          else if (jk == "default_position") m.default_pose[i] = jv.get<double>();
          else throw ParseError("robot model: unknown key joints[" + std::to_string(i) + "]." + jk);
        }
      }
    } else {
      throw ParseError("robot model: unknown key " + key);
    }
  }
  m.validate();
  return m;
}

RobotModel load_robot_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("robot model " + path + ": " + e.what());
  }
  return robot_model_from_json(j);
}

}  // namespace quietgait::rigidsim
