#pragma once

#include "quietgait/quietenv/env_config.hpp"
#include "quietgait/rigidsim/types.hpp"

namespace quietgait::quietenv {

using rigidsim::Vec2;
using rigidsim::Vec3;
using rigidsim::Vec12;

/// Physical parameters drawn once per episode. The velocity disturbance is
/// not part of the sample: a fresh impulse is drawn at every disturbance
/// tick instead.
struct DrSample {
  double base_mass_delta = 0.0;            // kg on top of the nominal trunk mass
  Vec3 external_force = Vec3::Zero();      // N, world frame, at the base com
  Vec3 external_torque = Vec3::Zero();     // N m, world frame, about the base
  double friction = 0.7;
  double terrain_amplitude = 0.0;          // m, height-field bump size
};

/// Mutable per-episode bookkeeping that is not part of the dynamic state:
/// the velocity command, the previous actions the difference penalties and
/// the observation feed back, the reward phase, and the running tracking
/// integral the curriculum gate consumes.
struct EpisodeState {
  Vec3 command = Vec3::Zero();  // (v*_x, v*_y, w*_z)

  Vec12 last_joint_target = Vec12::Zero();  // a*_t
  Vec12 prev_joint_target = Vec12::Zero();  // a*_{t-1}
  Vec12 last_gain_scale = Vec12::Zero();    // sigma(x)_t, each in (0, 1)
  Vec12 prev_gain_scale = Vec12::Zero();

  Phase phase = Phase::kNoisy;

  double tracking_score_accum = 0.0;  // integral of both scaled tracking rewards
  double time_since_disturbance = 0.0;
  DrSample dr;

  int steps = 0;          // control steps taken this episode
  double elapsed = 0.0;   // steps * control_dt, kept drift-free
};

}  // namespace quietgait::quietenv
