#include "omniteleop/allocation.hpp"

#include <cmath>

namespace omniteleop {

namespace {

template <int Rows, int Cols>
Eigen::Matrix<double, Cols, Rows> checked_pseudo_inverse(const Eigen::Matrix<double, Rows, Cols>& a,
                                                         const char* what) {
  Eigen::JacobiSVD<Eigen::Matrix<double, Rows, Cols>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-9 * sv.maxCoeff()) {
    throw ConfigurationError(std::string(what) + " is rank deficient");
  }
  Eigen::Matrix<double, Cols, Rows> sigma_inv = Eigen::Matrix<double, Cols, Rows>::Zero();
  for (int i = 0; i < sv.size(); ++i) sigma_inv(i, i) = 1.0 / sv[i];
  return svd.matrixV() * sigma_inv * svd.matrixU().transpose();
}

}  // namespace

void AllocationParams::validate() const {
  for (double k : {k_roll, k_pitch, k_yaw}) {
    if (!(k >= 0.0 && k <= 1.0)) {
      throw ConfigurationError("allocation: damping coefficients must lie in [0, 1]");
    }
  }
  vehicle.validate();
}

AllocationMatrix physical_allocation_matrix(const VehicleParams& vehicle) {
  AllocationMatrix a = AllocationMatrix::Zero();
  const double drag_ratio = vehicle.drag_coeff / vehicle.thrust_coeff;
  for (int i = 0; i < kNumRotors; ++i) {
    const Vec3 r = vehicle.rotor_position(i);
    const Vec3 lateral = vehicle.lateral_axis(i);
    const Vec3 vertical = Vec3::UnitZ();
    a.block<3, 1>(0, 2 * i) = lateral;
    a.block<3, 1>(3, 2 * i) = r.cross(lateral) + vehicle.spin[i] * drag_ratio * lateral;
    a.block<3, 1>(0, 2 * i + 1) = vertical;
    a.block<3, 1>(3, 2 * i + 1) = r.cross(vertical) + vehicle.spin[i] * drag_ratio * vertical;
  }
  return a;
}

AllocationMatrix build_allocation_matrix(const AllocationParams& ap) {
  ap.validate();
  AllocationMatrix a = physical_allocation_matrix(ap.vehicle);
  const double k[3] = {ap.k_roll, ap.k_pitch, ap.k_yaw};
  for (int axis = 0; axis < 3; ++axis) {
    for (int i = 0; i < kNumRotors; ++i) {
      a(3 + axis, 2 * i) *= k[axis];
      a(3 + axis, 2 * i + 1) *= 1.0 - k[axis];
    }
  }
  return a;
}

Allocator::Allocator(const AllocationParams& ap) : params_(ap) {
  damped_ = build_allocation_matrix(ap);
  physical_ = physical_allocation_matrix(ap.vehicle);
  const MixerMatrix damped_pinv = checked_pseudo_inverse(damped_, "damped allocation matrix");
  const MixerMatrix physical_pinv = checked_pseudo_inverse(physical_, "physical allocation matrix");
  const Eigen::Matrix<double, 8, 8> null_projector =
      Eigen::Matrix<double, 8, 8>::Identity() - physical_pinv * physical_;
  mixer_ = physical_pinv + null_projector * damped_pinv;
}

ActuatorCommand components_to_command(const RotorComponents& x, const VehicleParams& vehicle) {
  ActuatorCommand cmd;
  for (int i = 0; i < kNumRotors; ++i) {
    const double lateral = x[2 * i];
    const double vertical = x[2 * i + 1];
    cmd.tilt[i] = std::atan2(lateral, vertical);
    cmd.rotor_speed[i] = std::sqrt(std::hypot(lateral, vertical) / vehicle.thrust_coeff);
  }
  return cmd;
}

AllocationResult Allocator::allocate(const Wrench& w) const {
  if (!w.finite()) throw std::invalid_argument("allocate: non-finite wrench");
  AllocationResult out;
  out.components = components(w);
  double peak = 0.0;
  for (int i = 0; i < kNumRotors; ++i) {
    out.rotor_thrust[i] = std::hypot(out.components[2 * i], out.components[2 * i + 1]);
    peak = std::max(peak, out.rotor_thrust[i]);
  }
  const double limit = params_.vehicle.max_rotor_thrust();
  if (peak > limit) {
    out.saturated = true;
    out.scale = limit / peak;
    out.components *= out.scale;
    out.rotor_thrust *= out.scale;
  }
  out.command = components_to_command(out.components, params_.vehicle);
  for (int i = 0; i < kNumRotors; ++i) {
    out.command.rotor_speed[i] = std::min(out.command.rotor_speed[i], params_.vehicle.rotor_speed_max);
  }
  return out;
}

ActuatorCommand allocate(const Wrench& w, const AllocationParams& ap) {
  return Allocator(ap).allocate(w).command;
}

}  // namespace omniteleop
