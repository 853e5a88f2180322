#pragma once

#include "omniteleop/allocation.hpp"
#include "omniteleop/vehicle.hpp"

namespace omniteleop {

struct PoseReference {
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  Vec3 velocity = Vec3::Zero();          // world frame
  Vec3 angular_velocity = Vec3::Zero();  // reference body frame
};

struct PoseErrors {
  Vec3 position = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();

  Vec6 pose() const {
    Vec6 e;
    e << position, rotation;
    return e;
  }
  Vec6 rate() const {
    Vec6 e;
    e << velocity, angular_velocity;
    return e;
  }
};

/// e_p = R^T (p - p_ref), e_R = 1/2 (R_ref^T R - R^T R_ref)^v,
/// e_v = R^T (v - v_ref), e_w = w - R^T R_ref w_ref.
PoseErrors pose_errors(const RobotState& s, const PoseReference& ref);

/// Virtual inertia, damping and stiffness of the closed loop.
struct ImpedanceGains {
  Mat6 inertia = Mat6::Identity();
  Mat6 damping = Mat6::Identity();
  Mat6 stiffness = Mat6::Identity();

  /// Throws ConfigurationError unless all three matrices are symmetric positive definite.
  void validate() const;

  /// M_v = M, critically damped translation and rotation at the given natural frequencies.
  static ImpedanceGains matched(const VehicleParams& vehicle, double translation_frequency = 2.5,
                                double rotation_frequency = 8.0, double damping_ratio = 1.0);
};

/// Impedance law. With M_v equal to the physical inertia the estimated external wrench
/// cancels out of the command; otherwise it is reshaped by M M_v^-1.
class ImpedanceController {
 public:
  ImpedanceController(const ImpedanceGains& gains, const VehicleParams& vehicle);

  const ImpedanceGains& gains() const { return gains_; }
  bool inertia_matched() const { return matched_; }

  /// Commanded actuation wrench in the body frame.
  Wrench command(const PoseErrors& e, const RobotState& s, const PoseReference& ref,
                 const Wrench& estimated_external) const;

  /// Wrench that holds the current motion with zero error acceleration (gravity and
  /// gyroscopic terms).
  Wrench bias(const RobotState& s, const PoseReference& ref) const;

 private:
  ImpedanceGains gains_;
  VehicleParams vehicle_;
  Mat6 inertia_ratio_;  // M * M_v^-1
  bool matched_;
};

Wrench impedance_wrench(const PoseErrors& e, const ImpedanceGains& gains,
                        const Wrench& estimated_external, const RobotState& s,
                        const PoseReference& ref, const VehicleParams& vehicle);

/// Momentum-based observer: r = K_I (p(t) - p(0) - integral(tau_a + beta + r)),
/// with p = M nu the body-frame generalized momentum. The estimate follows the true
/// external wrench through first-order dynamics with bandwidth K_I.
class WrenchEstimator {
 public:
  WrenchEstimator(const Vec6& gain_diagonal, const VehicleParams& vehicle);

  void reset(const RobotState& s);
  /// actuation: body wrench actually delivered by the rotors over the last interval.
  const Wrench& update(const RobotState& s, const Wrench& actuation, double dt);

  const Wrench& estimate() const { return estimate_; }
  const Vec6& integral() const { return integral_; }

 private:
  Vec6 generalized_momentum(const RobotState& s) const;
  Vec6 beta(const RobotState& s) const;

  Vec6 gain_;
  VehicleParams vehicle_;
  Vec6 integral_ = Vec6::Zero();
  Vec6 initial_momentum_ = Vec6::Zero();
  Wrench estimate_;
  bool initialized_ = false;
};

}  // namespace omniteleop
