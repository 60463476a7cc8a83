#include "quietgait/rigidsim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "quietgait/common/error.hpp"

namespace quietgait::rigidsim {

namespace {

inline void accumulate(SpatialInertia& a, const SpatialInertia& b) {
  a.m += b.m;
  a.h += b.h;
  a.I += b.I;
}

inline Quat exp_quat(const Vec3& theta) {
  const double angle = theta.norm();
  if (angle < 1e-12)
    return Quat(1.0, 0.5 * theta.x(), 0.5 * theta.y(), 0.5 * theta.z()).normalized();
  const double half = 0.5 * angle;
  const double s = std::sin(half) / angle;
  return Quat(std::cos(half), s * theta.x(), s * theta.y(), s * theta.z());
}

}  // namespace

Engine::Engine(RobotModel model) : model_(std::move(model)) {
  model_.validate();
  parent_[0] = -1;
  tree_offset_[0] = Vec3::Zero();
  axis_[0] = Vec3::Zero();
  body_inertia_[0] = SpatialInertia{model_.base_mass, Vec3::Zero(), model_.base_inertia};
  total_mass_ = model_.base_mass;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int k = 0; k < kJointsPerLeg; ++k) {
      const int ji = leg * kJointsPerLeg + k;
      const int b = 1 + ji;
      parent_[b] = (k == 0) ? 0 : b - 1;
      tree_offset_[b] =
          (k == 0) ? model_.hip_offsets[leg] : Vec3(0.0, 0.0, -model_.joints[ji - 1].link_length);
      const JointSpec& js = model_.joints[ji];
      axis_[b] = js.axis;
      const Vec3 com(0.0, 0.0, -js.link_com_ratio * js.link_length);
      body_inertia_[b] =
          SpatialInertia::from_com(js.link_mass, com, js.link_inertia * Mat3::Identity());
      total_mass_ += js.link_mass;
    }
    foot_offset_[leg] = Vec3(0.0, 0.0, -model_.joints[leg * kJointsPerLeg + 2].link_length);
  }
  if (!model_.fixed_base)
    for (int i = 0; i < 6; ++i) active_dofs_.push_back(i);
  for (int j = 0; j < kNumJoints; ++j)
    if (!model_.locked_joints[j]) active_dofs_.push_back(6 + j);
}

void Engine::forward_pass(const SimState& s, Kinematics& k) const {
  k.rot_world[0] = s.base_orientation.toRotationMatrix();
  k.origin_world[0] = s.base_position;
  k.rot_to_child[0] = Mat3::Identity();
  k.velocity[0].head<3>() = s.base_angular_velocity;
  k.velocity[0].tail<3>() = k.rot_world[0].transpose() * s.base_linear_velocity;
  for (int b = 1; b < kNumBodies; ++b) {
    const int p = parent_[b];
    const int ji = b - 1;
    const Mat3 joint_rot =
        Eigen::AngleAxisd(s.joint_positions[ji], axis_[b]).toRotationMatrix();
    k.rot_to_child[b] = joint_rot.transpose();
    k.rot_world[b] = k.rot_world[p] * joint_rot;
    k.origin_world[b] = k.origin_world[p] + k.rot_world[p] * tree_offset_[b];
    Vec6 v = xform_motion(k.rot_to_child[b], tree_offset_[b], k.velocity[p]);
    v.head<3>() += axis_[b] * s.joint_velocities[ji];
    k.velocity[b] = v;
  }
}

void Engine::pd_gains(const Vec12& x, Vec12& p_out, Vec12& d_out) {
  for (int i = 0; i < kNumJoints; ++i) {
    const double s = sigmoid(x[i]);
    p_out[i] = kPGainBase + kPGainSpan * s;
    d_out[i] = kDGainBase + kDGainSpan * s;
  }
}

Vec12 Engine::pd_torques(const SimState& s, const ActuatorCommand& cmd) const {
  if (!cmd.target_joint_positions.allFinite() || !cmd.gain_scale_inputs.allFinite())
    throw InvalidInputError("pd_torques: non-finite actuator command");
  Vec12 p, d, tau;
  pd_gains(cmd.gain_scale_inputs, p, d);
  for (int i = 0; i < kNumJoints; ++i) {
    const double raw = p[i] * (cmd.target_joint_positions[i] - s.joint_positions[i]) -
                       d[i] * s.joint_velocities[i];
    const double lim = model_.joints[i].torque_limit;
    tau[i] = std::clamp(raw, -lim, lim);
  }
  return tau;
}

std::array<FootState, kNumLegs> Engine::foot_kinematics(const SimState& s) const {
  Kinematics k;
  forward_pass(s, k);
  std::array<FootState, kNumLegs> out;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int tb = 1 + leg * kJointsPerLeg + 2;
    out[leg].position = k.origin_world[tb] + k.rot_world[tb] * foot_offset_[leg];
    const Vec3 v_local = k.velocity[tb].tail<3>() +
                         Vec3(k.velocity[tb].head<3>()).cross(foot_offset_[leg]);
    out[leg].velocity = k.rot_world[tb] * v_local;
  }
  return out;
}

Vec3 Engine::gravity_orientation(const SimState& s) {
  return s.base_orientation.toRotationMatrix().transpose() * Vec3(0.0, 0.0, -1.0);
}

SimState Engine::apply_velocity_impulse(const SimState& s, const Vec3& dv) {
  if (!dv.allFinite()) throw InvalidInputError("apply_velocity_impulse: non-finite impulse");
  SimState out = s;
  out.base_linear_velocity += dv;
  return out;
}

double Engine::mechanical_energy(const SimState& s) const {
  Kinematics k;
  forward_pass(s, k);
  double kinetic = 0.0, potential = 0.0;
  for (int b = 0; b < kNumBodies; ++b) {
    kinetic += 0.5 * k.velocity[b].dot(apply_inertia(body_inertia_[b], k.velocity[b]));
    const Vec3 com_world =
        k.origin_world[b] + k.rot_world[b] * (body_inertia_[b].h / body_inertia_[b].m);
    potential += body_inertia_[b].m * kGravity * com_world.z();
  }
  return kinetic + potential;
}

Vec3 Engine::com_position(const SimState& s) const {
  Kinematics k;
  forward_pass(s, k);
  Vec3 weighted = Vec3::Zero();
  for (int b = 0; b < kNumBodies; ++b)
    weighted += body_inertia_[b].m *
                (k.origin_world[b] + k.rot_world[b] * (body_inertia_[b].h / body_inertia_[b].m));
  return weighted / total_mass_;
}

std::array<Vec3, 8> Engine::trunk_corners(const SimState& s) const {
  const Mat3 r = s.base_orientation.toRotationMatrix();
  const Vec3& he = model_.base_half_extents;
  std::array<Vec3, 8> out;
  int idx = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        out[idx++] = s.base_position + r * Vec3(sx * he.x(), sy * he.y(), sz * he.z());
  return out;
}

void Engine::check_finite(const SimState& s) const {
  if (!s.base_position.allFinite())
    throw DivergedError("simulation diverged: base position is not finite");
  if (!s.base_orientation.coeffs().allFinite())
    throw DivergedError("simulation diverged: base orientation is not finite");
  if (!s.base_linear_velocity.allFinite())
    throw DivergedError("simulation diverged: base linear velocity is not finite");
  if (!s.base_angular_velocity.allFinite())
    throw DivergedError("simulation diverged: base angular velocity is not finite");
  for (int j = 0; j < kNumJoints; ++j) {
    if (!std::isfinite(s.joint_positions[j]) || !std::isfinite(s.joint_velocities[j]))
      throw DivergedError("simulation diverged at joint " + model_.joints[j].name);
  }
}

std::pair<SimState, ContactReport> Engine::step(const SimState& s, const Vec12& tau,
                                                const Terrain& terrain, double dt,
                                                const Vec6* base_wrench) const {
  if (!(dt > 0.0)) throw InvalidInputError("step: dt must be > 0");
  check_finite(s);
  Kinematics k;
  forward_pass(s, k);

  SimState out = s;
  ContactReport report;

  std::array<Vec6, kNumBodies> f_ext;
  for (auto& f : f_ext) f.setZero();
  if (base_wrench != nullptr) {
    f_ext[0].head<3>() = k.rot_world[0].transpose() * Vec3(base_wrench->head<3>());
    f_ext[0].tail<3>() = k.rot_world[0].transpose() * Vec3(base_wrench->tail<3>());
  }

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int tb = 1 + leg * kJointsPerLeg + 2;
    const Vec3 p_f = k.origin_world[tb] + k.rot_world[tb] * foot_offset_[leg];
    const Vec3 v_local = k.velocity[tb].tail<3>() +
                         Vec3(k.velocity[tb].head<3>()).cross(foot_offset_[leg]);
    const Vec3 v_f = k.rot_world[tb] * v_local;
    FootContact& fc = report.feet[leg];
    fc.foot_velocity = v_f;

    const double ground = terrain.height(p_f.x(), p_f.y());
    const Vec3 n = terrain.normal(p_f.x(), p_f.y());
    const double depth = model_.foot_radius - n.z() * (p_f.z() - ground);
    double fn = 0.0;
    Vec3 force = Vec3::Zero();
    if (depth > 0.0) {
      const double vn = n.dot(v_f);
      fn = std::max(0.0, terrain.contact_stiffness * depth - terrain.contact_damping * vn);
      const Vec3 contact_point = p_f - model_.foot_radius * n;
      Vec3 anchor = out.anchor_active[leg] ? out.contact_anchor[leg] : contact_point;
      Vec3 d_t = contact_point - anchor;
      d_t -= n * n.dot(d_t);
      const Vec3 v_t = v_f - n * vn;
      Vec3 ft = -terrain.tangent_stiffness * d_t - terrain.tangent_damping * v_t;
      const double ft_max = terrain.friction * fn;
      const double ft_norm = ft.norm();
      if (ft_norm > ft_max) {
        // Coulomb limit: scale the force onto the cone and let the anchor
        // slide so the spring state matches the applied force.
        ft *= (ft_norm > 0.0) ? ft_max / ft_norm : 0.0;
        if (terrain.tangent_stiffness > 0.0)
          d_t = -(ft + terrain.tangent_damping * v_t) / terrain.tangent_stiffness;
        else
          d_t.setZero();
        anchor = contact_point - d_t;
      }
      out.anchor_active[leg] = true;
      out.contact_anchor[leg] = anchor;
      force = fn * n + ft;
      const Vec3 arm = contact_point - k.origin_world[tb];
      f_ext[tb].head<3>() += k.rot_world[tb].transpose() * arm.cross(force);
      f_ext[tb].tail<3>() += k.rot_world[tb].transpose() * force;
    } else {
      out.anchor_active[leg] = false;
    }

    fc.normal_force = fn;
    fc.contact_force = force;
    const bool contact_now = fn > 0.5;  // binary switch threshold
    fc.in_contact = contact_now;
    if (contact_now) {
      if (!s.foot_contact[leg]) {
        fc.touchdown = true;
        fc.touchdown_speed = v_f.norm();
        fc.air_time = s.foot_air_time[leg];
      }
      out.foot_air_time[leg] = 0.0;
      fc.slip_velocity = Vec3(v_f - n * n.dot(v_f)).head<2>();
    } else {
      out.foot_air_time[leg] = s.foot_air_time[leg] + dt;
      fc.air_time = out.foot_air_time[leg];
    }
    out.foot_contact[leg] = contact_now;
  }

  report.self_collision_count = self_collision_from_kinematics(k);

  // Bias forces (gravity via an upward base pseudo-acceleration, Coriolis,
  // centrifugal) minus external forces, accumulated root-ward.
  std::array<Vec6, kNumBodies> bias_force;
  {
    std::array<Vec6, kNumBodies> accel;
    accel[0].setZero();
    accel[0].tail<3>() = k.rot_world[0].transpose() * Vec3(0.0, 0.0, kGravity);
    for (int b = 1; b < kNumBodies; ++b) {
      Vec6 vj = Vec6::Zero();
      vj.head<3>() = axis_[b] * s.joint_velocities[b - 1];
      accel[b] = xform_motion(k.rot_to_child[b], tree_offset_[b], accel[parent_[b]]) +
                 cross_motion(k.velocity[b], vj);
    }
    for (int b = 0; b < kNumBodies; ++b) {
      bias_force[b] = apply_inertia(body_inertia_[b], accel[b]) +
                      cross_force(k.velocity[b], apply_inertia(body_inertia_[b], k.velocity[b])) -
                      f_ext[b];
    }
    for (int b = kNumBodies - 1; b >= 1; --b)
      bias_force[parent_[b]] +=
          xform_force_to_parent(k.rot_to_child[b], tree_offset_[b], bias_force[b]);
  }

  Vec18 rhs;
  rhs.head<6>() = -bias_force[0];
  for (int j = 0; j < kNumJoints; ++j)
    rhs[6 + j] = tau[j] - axis_[1 + j].dot(Vec3(bias_force[1 + j].head<3>()));

  // Composite-rigid-body mass matrix.
  Mat18 M = Mat18::Zero();
  {
    std::array<SpatialInertia, kNumBodies> comp = body_inertia_;
    for (int b = kNumBodies - 1; b >= 1; --b)
      accumulate(comp[parent_[b]],
                 xform_inertia_to_parent(comp[b], k.rot_to_child[b], tree_offset_[b]));
    M.topLeftCorner<6, 6>() = inertia_matrix(comp[0]);
    for (int b = 1; b < kNumBodies; ++b) {
      const int ji = b - 1;
      Vec6 sv = Vec6::Zero();
      sv.head<3>() = axis_[b];
      Vec6 f = apply_inertia(comp[b], sv);
      M(6 + ji, 6 + ji) = sv.dot(f);
      int a = b;
      while (parent_[a] >= 0) {
        f = xform_force_to_parent(k.rot_to_child[a], tree_offset_[a], f);
        a = parent_[a];
        if (a == 0) {
          M.block<6, 1>(0, 6 + ji) = f;
          M.block<1, 6>(6 + ji, 0) = f.transpose();
        } else {
          const double mij = axis_[a].dot(Vec3(f.head<3>()));
          M(a - 1 + 6, 6 + ji) = mij;
          M(6 + ji, a - 1 + 6) = mij;
        }
      }
    }
  }

  Vec18 udot = Vec18::Zero();
  const int na = static_cast<int>(active_dofs_.size());
  if (na == kDofs) {
    udot = M.ldlt().solve(rhs);
  } else if (na > 0) {
    MatX mr(na, na);
    VecX rr(na);
    for (int i = 0; i < na; ++i) {
      rr[i] = rhs[active_dofs_[i]];
      for (int j = 0; j < na; ++j) mr(i, j) = M(active_dofs_[i], active_dofs_[j]);
    }
    const VecX ur = mr.ldlt().solve(rr);
    for (int i = 0; i < na; ++i) udot[active_dofs_[i]] = ur[i];
  }

  // Semi-implicit Euler: velocities first, then positions with the new
  // velocities. The base linear velocity integrates in body coordinates;
  // the stored world-frame vector is reconstructed with the updated
  // orientation so the body-frame sequence stays the clean discretization.
  Vec3 w_b = s.base_angular_velocity;
  Vec3 v_b = k.rot_world[0].transpose() * s.base_linear_velocity;
  if (!model_.fixed_base) {
    w_b += dt * Vec3(udot.head<3>());
    v_b += dt * Vec3(udot.segment<3>(3));
  } else {
    w_b.setZero();
    v_b.setZero();
  }
  Vec12 qd = s.joint_velocities;
  for (int j = 0; j < kNumJoints; ++j) {
    if (model_.locked_joints[j]) {
      qd[j] = 0.0;
      continue;
    }
    const double lim = model_.joints[j].velocity_limit;
    qd[j] = std::clamp(qd[j] + dt * udot[6 + j], -lim, lim);
  }
  out.base_angular_velocity = w_b;
  out.joint_velocities = qd;
  if (!model_.fixed_base) {
    out.base_orientation = (s.base_orientation * exp_quat(dt * w_b)).normalized();
    out.base_linear_velocity = out.base_orientation.toRotationMatrix() * v_b;
    out.base_position = s.base_position + dt * out.base_linear_velocity;
  } else {
    out.base_linear_velocity = k.rot_world[0] * v_b;
  }
  out.joint_positions = s.joint_positions + dt * qd;
  out.sim_time = s.sim_time + dt;

  check_finite(out);
  return {out, report};
}

}  // namespace quietgait::rigidsim
