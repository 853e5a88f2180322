#pragma once

#include <stdexcept>

#include "omniteleop/vehicle.hpp"

namespace omniteleop {

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AllocationMatrix = Eigen::Matrix<double, 6, 8>;
using MixerMatrix = Eigen::Matrix<double, 8, 6>;
using RotorComponents = Eigen::Matrix<double, 8, 1>;  // [lateral_1, vertical_1, ..., lateral_4, vertical_4]

/// Damping coefficients blend, per moment axis, how much of the moment the mixer asks
/// from the lateral (tilt) force components versus the vertical ones.
struct AllocationParams {
  double k_roll = 0.2;
  double k_pitch = 0.2;
  double k_yaw = 0.5;
  VehicleParams vehicle;

  void validate() const;
};

/// Exact linear map from per-rotor lateral/vertical force components to the body wrench.
AllocationMatrix physical_allocation_matrix(const VehicleParams& vehicle);

/// Static allocation matrix with damped moment rows:
///   row_j = k_j * (lateral part of row_j) + (1 - k_j) * (vertical part of row_j)
/// Force rows are left untouched.
AllocationMatrix build_allocation_matrix(const AllocationParams& ap);

struct AllocationResult {
  ActuatorCommand command;
  RotorComponents components = RotorComponents::Zero();
  Vec4 rotor_thrust = Vec4::Zero();
  double scale = 1.0;  // < 1 when the wrench was scaled down to respect the rotor limit
  bool saturated = false;
};

/// Precomputed mixer. The damped matrix shapes how effort is spread over the rotors;
/// the solution is then projected onto the exact constraint set, so the allocated
/// commands reproduce the requested wrench through actuator_wrench whenever they are
/// feasible. The damping therefore only moves the solution along the null space
/// (internal forces) of the physical map.
class Allocator {
 public:
  explicit Allocator(const AllocationParams& ap);

  const AllocationParams& params() const { return params_; }
  const AllocationMatrix& damped_matrix() const { return damped_; }
  const AllocationMatrix& physical_matrix() const { return physical_; }
  const MixerMatrix& mixer() const { return mixer_; }

  /// Unsaturated per-rotor components for a wrench (linear in the wrench).
  RotorComponents components(const Wrench& w) const { return mixer_ * w.stacked(); }

  /// Throws std::invalid_argument for non-finite wrenches.
  AllocationResult allocate(const Wrench& w) const;

 private:
  AllocationParams params_;
  AllocationMatrix damped_;
  AllocationMatrix physical_;
  MixerMatrix mixer_;
};

/// Convenience wrapper building an Allocator for one call.
ActuatorCommand allocate(const Wrench& w, const AllocationParams& ap);

/// Rotor thrusts and tilt angles corresponding to force components.
ActuatorCommand components_to_command(const RotorComponents& x, const VehicleParams& vehicle);

}  // namespace omniteleop
