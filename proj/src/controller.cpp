#include "omniteleop/controller.hpp"

namespace omniteleop {

namespace {

bool symmetric_positive_definite(const Mat6& m) {
  if ((m - m.transpose()).norm() > 1e-9 * std::max(1.0, m.norm())) return false;
  return Eigen::LLT<Mat6>(m).info() == Eigen::Success;
}

}  // namespace

PoseErrors pose_errors(const RobotState& s, const PoseReference& ref) {
  const Rotation& r = s.rotation;
  PoseErrors e;
  e.position = r.transpose() * (s.position - ref.position);
  const Mat3 rel = ref.rotation.transpose() * r;
  e.rotation = 0.5 * so3::vee(rel - rel.transpose());
  e.velocity = r.transpose() * (s.world_velocity() - ref.velocity);
  e.angular_velocity = s.angular_velocity - r.transpose() * ref.rotation * ref.angular_velocity;
  return e;
}

void ImpedanceGains::validate() const {
  if (!symmetric_positive_definite(inertia)) throw ConfigurationError("impedance: M_v must be SPD");
  if (!symmetric_positive_definite(damping)) throw ConfigurationError("impedance: D_v must be SPD");
  if (!symmetric_positive_definite(stiffness)) throw ConfigurationError("impedance: K_v must be SPD");
}

ImpedanceGains ImpedanceGains::matched(const VehicleParams& vehicle, double translation_frequency,
                                       double rotation_frequency, double damping_ratio) {
  ImpedanceGains g;
  g.inertia = vehicle.mass_matrix();
  Vec6 k, d;
  for (int i = 0; i < 3; ++i) {
    const double m = vehicle.mass;
    const double j = vehicle.inertia(i, i);
    k[i] = m * translation_frequency * translation_frequency;
    d[i] = 2.0 * damping_ratio * m * translation_frequency;
    k[3 + i] = j * rotation_frequency * rotation_frequency;
    d[3 + i] = 2.0 * damping_ratio * j * rotation_frequency;
  }
  g.stiffness = k.asDiagonal();
  g.damping = d.asDiagonal();
  return g;
}

ImpedanceController::ImpedanceController(const ImpedanceGains& gains, const VehicleParams& vehicle)
    : gains_(gains), vehicle_(vehicle) {
  gains_.validate();
  const Mat6 m = vehicle_.mass_matrix();
  matched_ = (gains_.inertia - m).norm() <= 1e-12 * m.norm();
  inertia_ratio_ = m * gains_.inertia.inverse();
}

Wrench ImpedanceController::bias(const RobotState& s, const PoseReference& ref) const {
  const Rotation& r = s.rotation;
  const Vec3& w = s.angular_velocity;
  Wrench b;
  b.force = vehicle_.mass * r.transpose() * Vec3(0.0, 0.0, vehicle_.gravity);
  const Vec3 w_ref_body = r.transpose() * ref.rotation * ref.angular_velocity;
  b.torque = w.cross(vehicle_.inertia * w) - vehicle_.inertia * w.cross(w_ref_body);
  return b;
}

Wrench ImpedanceController::command(const PoseErrors& e, const RobotState& s,
                                    const PoseReference& ref,
                                    const Wrench& estimated_external) const {
  const Vec6 spring_damper = -gains_.damping * e.rate() - gains_.stiffness * e.pose();
  const Vec6 b = bias(s, ref).stacked();
  if (matched_) return Wrench::from_stacked(b + spring_damper);
  const Vec6 ext = estimated_external.stacked();
  return Wrench::from_stacked(b + inertia_ratio_ * (spring_damper + ext) - ext);
}

Wrench impedance_wrench(const PoseErrors& e, const ImpedanceGains& gains,
                        const Wrench& estimated_external, const RobotState& s,
                        const PoseReference& ref, const VehicleParams& vehicle) {
  return ImpedanceController(gains, vehicle).command(e, s, ref, estimated_external);
}

WrenchEstimator::WrenchEstimator(const Vec6& gain_diagonal, const VehicleParams& vehicle)
    : gain_(gain_diagonal), vehicle_(vehicle) {
  if ((gain_.array() <= 0.0).any()) throw ConfigurationError("estimator: gains must be positive");
}

Vec6 WrenchEstimator::generalized_momentum(const RobotState& s) const {
  Vec6 p;
  p << vehicle_.mass * s.velocity, vehicle_.inertia * s.angular_velocity;
  return p;
}

Vec6 WrenchEstimator::beta(const RobotState& s) const {
  const Vec3& v = s.velocity;
  const Vec3& w = s.angular_velocity;
  Vec6 b;
  b << -w.cross(vehicle_.mass * v) +
           vehicle_.mass * s.rotation.transpose() * Vec3(0.0, 0.0, -vehicle_.gravity),
      -w.cross(vehicle_.inertia * w);
  return b;
}

void WrenchEstimator::reset(const RobotState& s) {
  initial_momentum_ = generalized_momentum(s);
  integral_.setZero();
  estimate_ = Wrench{};
  initialized_ = true;
}

const Wrench& WrenchEstimator::update(const RobotState& s, const Wrench& actuation, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("estimator: dt must be positive");
  if (!initialized_) reset(s);
  integral_ += dt * (actuation.stacked() + beta(s) + estimate_.stacked());
  const Vec6 r = gain_.asDiagonal() * (generalized_momentum(s) - initial_momentum_ - integral_);
  estimate_ = Wrench::from_stacked(r);
  return estimate_;
}

}  // namespace omniteleop
