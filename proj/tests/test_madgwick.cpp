#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "omniteleop/madgwick.hpp"

using namespace omniteleop;
using std::numbers::pi;

namespace {

// Angle between the estimated and true gravity directions in the sensor frame.
double tilt_error(const MadgwickState& ms, const Rotation& truth) {
  const Vec3 est = ms.q.toRotationMatrix().transpose() * Vec3::UnitZ();
  const Vec3 real = truth.transpose() * Vec3::UnitZ();
  return std::acos(std::clamp(est.dot(real), -1.0, 1.0));
}

}  // namespace

TEST_CASE("level and still is a fixed point") {
  MadgwickState ms;
  ImuSample imu;
  imu.accel = Vec3(0, 0, 9.81);
  for (int i = 0; i < 1000; ++i) ms = madgwick_update(ms, imu, 0.01);
  CHECK(std::abs(ms.q.w() - 1.0) < 1e-15);
  CHECK(ms.q.vec().norm() < 1e-15);
}

TEST_CASE("converges from a ten degree error with noisy sensors") {
  MadgwickState ms;
  ms.q = Eigen::Quaterniond(Eigen::AngleAxisd(10.0 * pi / 180.0, Vec3::UnitX()));
  const Rotation truth = Rotation::Identity();
  RobotState still;
  std::mt19937_64 rng(99);
  const ImuNoise noise{0.1, 0.01};
  double t = 0.0;
  double converged_at = -1.0;
  for (int i = 0; i < 500; ++i) {
    ms = madgwick_update(ms, simulate_imu(still, Vec3::Zero(), noise, rng, t), 0.01);
    t += 0.01;
    if (converged_at < 0 && tilt_error(ms, truth) <= pi / 180.0) converged_at = t;
  }
  CHECK(converged_at > 0.0);
  CHECK(converged_at <= 5.0);
  CHECK(tilt_error(ms, truth) <= pi / 180.0);
}

TEST_CASE("yaw is unobservable from gravity and follows the gyro") {
  MadgwickState ms;
  ImuSample imu;
  imu.accel = Vec3(0, 0, 9.81);
  imu.gyro = Vec3(0, 0, 1.0);
  for (int i = 0; i < 100; ++i) ms = madgwick_update(ms, imu, 0.01);
  const double yaw = so3::euler_zyx(ms.q.toRotationMatrix()).yaw;
  CHECK(yaw == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("zero accelerometer falls back to gyro integration") {
  MadgwickState ms;
  ms.beta = 5.0;
  ImuSample imu;
  imu.gyro = Vec3(0.5, 0, 0);
  for (int i = 0; i < 100; ++i) ms = madgwick_update(ms, imu, 0.01);
  CHECK(so3::euler_zyx(ms.q.toRotationMatrix()).roll == doctest::Approx(0.5).epsilon(1e-3));
  CHECK_THROWS_AS(madgwick_update(ms, imu, 0.0), std::invalid_argument);
}

TEST_CASE("quaternion stays unit length over a million updates") {
  MadgwickState ms;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    ImuSample imu;
    imu.gyro = Vec3(n(rng), n(rng), n(rng));
    imu.accel = Vec3(n(rng), n(rng), 9.81 + n(rng));
    ms = madgwick_update(ms, imu, 0.004);
    worst = std::max(worst, std::abs(ms.q.norm() - 1.0));
  }
  CHECK(worst <= 1e-9);
}
