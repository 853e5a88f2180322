#pragma once

#include <functional>

#include "omniteleop/so3.hpp"

namespace omniteleop {

inline constexpr double kServoTorqueCap = 0.441;  // N m

using StickRouting = Eigen::Matrix<double, 4, 6>;

/// Two 2-axis gimbal sticks. Axis order everywhere: left x, left y, right x, right y.
struct StickState {
  Vec4 angle = Vec4::Zero();  // rad, gimbal angles about the stick x then y axes
  Vec4 rate = Vec4::Zero();   // rad/s
  double limit = 0.4;         // mechanical throw per axis, rad

  Rotation left() const { return so3::rot_x(angle[0]) * so3::rot_y(angle[1]); }
  Rotation right() const { return so3::rot_x(angle[2]) * so3::rot_y(angle[3]); }
};

struct AdmittanceParams {
  Vec4 inertia = Vec4::Constant(1e-4);  // diagonal of M_adm, kg m^2
  Vec4 damping = Vec4::Constant(0.02);  // diagonal of D_adm, N m s/rad

  void validate() const;
};

struct FeedbackGains {
  Vec4 recentering = Vec4::Constant(0.2);  // diagonal of K_rec, N m/rad
  Vec4 external = Vec4::Constant(0.02);    // per-axis scaling of the routed wrench estimate
  StickRouting routing = StickRouting::Zero();  // wrench component -> stick axis
  double torque_cap = kServoTorqueCap;

  void validate() const;
};

struct FingerModel {
  Vec4 inertia = Vec4::Constant(5e-4);
  Vec4 damping = Vec4::Constant(0.01);
  /// Scripted muscle torque tau_act(t), N m.
  std::function<Vec4(double)> muscle_torque = [](double) { return Vec4::Zero(); };

  void validate() const;
};

/// tau_rec = -(K_rec / 2) [ (R_L - R_L^T)^v_xy ; (R_R - R_R^T)^v_xy ]
Vec4 recentering_torque(const StickState& sticks, const Vec4& k_rec);

/// diag(K_ext) * S * tau_ext_hat, clamped per axis to the servo torque cap.
Vec4 external_feedback_torque(const Vec6& estimated_wrench, const FeedbackGains& gains);

/// Element-wise sum clamped to +-cap.
Vec4 total_feedback(const Vec4& recentering, const Vec4& external, double cap = kServoTorqueCap);

/// M_adm w_dot + D_adm w = -tau_interaction + tau_fb. Damping is taken implicitly; tilts
/// are clamped at the mechanical stop with the outward rate zeroed.
StickState step_admittance(const StickState& sticks, const Vec4& interaction, const Vec4& feedback,
                           const AdmittanceParams& adm, double dt);

/// Interaction torque (device on finger) when the finger rigidly holds the sticks:
/// finger M_f w_dot + D_f w = tau_act + tau_int, device sees -tau_int. The coupled step is
/// solved implicitly so that step_admittance with the returned torque lands on the same rate.
Vec4 step_finger(const FingerModel& finger, const StickState& sticks, const Vec4& feedback,
                 const AdmittanceParams& adm, double t, double dt);

/// Position-driven sticks (scripted angles or a live cockpit): clamps to the throw and
/// differentiates for the rate.
StickState drive_sticks(const StickState& sticks, const Vec4& target_angle, double dt);

/// Wrench-to-stick routing consistent with a mode preset: a stick axis that commands a
/// velocity (rate) reference receives the matching force (torque) estimate.
struct ModePreset;
StickRouting routing_from_preset(const ModePreset& preset);

/// Spring energy whose negative gradient is the recentering torque when both axes of a
/// stick share the same gain: (k/2) (3 - tr R) per stick.
double recentering_energy(const StickState& sticks, const Vec4& k_rec);

}  // namespace omniteleop
