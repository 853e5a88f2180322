#pragma once

#include "omniteleop/vehicle.hpp"

namespace omniteleop {

/// q maps body (sensor) vectors to the world frame, i.e. R(q) = R_WC.
struct MadgwickState {
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  double beta = 0.1;
};

/// Gyro integration plus one normalized gradient-descent step toward the measured
/// gravity direction. A zero accelerometer vector falls back to gyro-only integration.
MadgwickState madgwick_update(const MadgwickState& ms, const ImuSample& imu, double dt);

}  // namespace omniteleop
