#include "omniteleop/haptic.hpp"

#include <algorithm>
#include <stdexcept>

#include "omniteleop/reference.hpp"

namespace omniteleop {

namespace {

Vec4 clamp_abs(const Vec4& v, double cap) { return v.cwiseMax(-cap).cwiseMin(cap); }

Vec3 axis_vector(const Rotation& r) { return so3::vee(r - r.transpose()); }

}  // namespace

void AdmittanceParams::validate() const {
  if ((inertia.array() <= 0.0).any() || (damping.array() <= 0.0).any()) {
    throw std::invalid_argument("admittance: inertia and damping must be positive");
  }
}

void FeedbackGains::validate() const {
  if ((recentering.array() < 0.0).any() || (external.array() < 0.0).any()) {
    throw std::invalid_argument("feedback: gains must be non-negative");
  }
  if (!(torque_cap > 0.0)) throw std::invalid_argument("feedback: torque cap must be positive");
}

void FingerModel::validate() const {
  if ((inertia.array() <= 0.0).any() || (damping.array() <= 0.0).any()) {
    throw std::invalid_argument("finger: inertia and damping must be positive");
  }
}

Vec4 recentering_torque(const StickState& sticks, const Vec4& k_rec) {
  const Vec3 left = axis_vector(sticks.left());
  const Vec3 right = axis_vector(sticks.right());
  const Vec4 stacked(left.x(), left.y(), right.x(), right.y());
  return -0.5 * k_rec.cwiseProduct(stacked);
}

double recentering_energy(const StickState& sticks, const Vec4& k_rec) {
  return 0.5 * k_rec[0] * (3.0 - sticks.left().trace()) +
         0.5 * k_rec[2] * (3.0 - sticks.right().trace());
}

Vec4 external_feedback_torque(const Vec6& estimated_wrench, const FeedbackGains& gains) {
  const Vec4 routed = gains.routing * estimated_wrench;
  return clamp_abs(gains.external.cwiseProduct(routed), gains.torque_cap);
}

Vec4 total_feedback(const Vec4& recentering, const Vec4& external, double cap) {
  return clamp_abs(recentering + external, cap);
}

namespace {

StickState integrate_clamped(const StickState& sticks, const Vec4& rate, double dt) {
  StickState next = sticks;
  for (int i = 0; i < 4; ++i) {
    double angle = sticks.angle[i] + dt * rate[i];
    double w = rate[i];
    if (angle > sticks.limit) {
      angle = sticks.limit;
      w = std::min(w, 0.0);
    } else if (angle < -sticks.limit) {
      angle = -sticks.limit;
      w = std::max(w, 0.0);
    }
    next.angle[i] = angle;
    next.rate[i] = w;
  }
  return next;
}

}  // namespace

StickState step_admittance(const StickState& sticks, const Vec4& interaction, const Vec4& feedback,
                           const AdmittanceParams& adm, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_admittance: dt must be positive");
  const Vec4 rhs = -interaction + feedback;
  Vec4 rate;
  for (int i = 0; i < 4; ++i) {
    rate[i] = (adm.inertia[i] * sticks.rate[i] + dt * rhs[i]) / (adm.inertia[i] + dt * adm.damping[i]);
  }
  return integrate_clamped(sticks, rate, dt);
}

Vec4 step_finger(const FingerModel& finger, const StickState& sticks, const Vec4& feedback,
                 const AdmittanceParams& adm, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_finger: dt must be positive");
  const Vec4 muscle = finger.muscle_torque(t);
  Vec4 interaction;
  for (int i = 0; i < 4; ++i) {
    const double m = adm.inertia[i] + finger.inertia[i];
    const double d = adm.damping[i] + finger.damping[i];
    const double rate = (m * sticks.rate[i] + dt * (muscle[i] + feedback[i])) / (m + dt * d);
    interaction[i] =
        feedback[i] - ((adm.inertia[i] + dt * adm.damping[i]) * rate - adm.inertia[i] * sticks.rate[i]) / dt;
  }
  return interaction;
}

StickState drive_sticks(const StickState& sticks, const Vec4& target_angle, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("drive_sticks: dt must be positive");
  StickState next = sticks;
  next.angle = target_angle.cwiseMax(-sticks.limit).cwiseMin(sticks.limit);
  next.rate = (next.angle - sticks.angle) / dt;
  return next;
}

StickRouting routing_from_preset(const ModePreset& preset) {
  StickRouting s = StickRouting::Zero();
  const Mat3* translational[2] = {&preset.matrix(PresetSlot::k1L), &preset.matrix(PresetSlot::k1R)};
  const Mat3* rotational[2] = {&preset.matrix(PresetSlot::k2L), &preset.matrix(PresetSlot::k2R)};
  for (int stick = 0; stick < 2; ++stick) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int i = 0; i < 3; ++i) {
        s(2 * stick + axis, i) = (*translational[stick])(i, axis);
        s(2 * stick + axis, 3 + i) = (*rotational[stick])(i, axis);
      }
    }
  }
  return s;
}

}  // namespace omniteleop
