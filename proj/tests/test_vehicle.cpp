#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "omniteleop/vehicle.hpp"

using namespace omniteleop;
using std::numbers::pi;

namespace {

ActuatorState uniform(double tilt, double speed) {
  ActuatorState a;
  a.tilt.setConstant(tilt);
  a.rotor_speed.setConstant(speed);
  return a;
}

ActuatorState random_actuators(std::mt19937_64& rng, const VehicleParams& p) {
  std::uniform_real_distribution<double> tilt(-pi, pi), speed(0.0, p.rotor_speed_max);
  ActuatorState a;
  for (int i = 0; i < 4; ++i) {
    a.tilt[i] = tilt(rng);
    a.rotor_speed[i] = speed(rng);
  }
  return a;
}

// Rotor i + k receives what rotor i had.
ActuatorState shift(const ActuatorState& a, int k) {
  ActuatorState b;
  for (int i = 0; i < 4; ++i) {
    b.tilt[(i + k) % 4] = a.tilt[i];
    b.rotor_speed[(i + k) % 4] = a.rotor_speed[i];
  }
  return b;
}

}  // namespace

TEST_CASE("actuator wrench: idle, hover and pure yaw") {
  const VehicleParams p;
  CHECK(actuator_wrench(uniform(0.3, 0.0), p).stacked().isZero(0.0));

  const double hover_speed = std::sqrt(p.mass * p.gravity / (4.0 * p.thrust_coeff));
  const Wrench h = actuator_wrench(uniform(0.0, hover_speed), p);
  CHECK((h.force - Vec3(0, 0, p.mass * p.gravity)).norm() < 1e-9);
  CHECK(h.torque.norm() < 1e-9);

  const double w = 1500.0;
  const Wrench y = actuator_wrench(uniform(pi / 2, w), p);
  CHECK(y.force.norm() < 1e-9);
  CHECK(y.torque.head<2>().norm() < 1e-9);
  CHECK(y.torque[2] == doctest::Approx(4.0 * p.arm_length * p.thrust_coeff * w * w).epsilon(1e-12));
}

TEST_CASE("actuator wrench rejects states outside the actuator ranges") {
  const VehicleParams p;
  CHECK_THROWS_AS(actuator_wrench(uniform(3.2, 100.0), p), std::out_of_range);
  CHECK_THROWS_AS(actuator_wrench(uniform(0.0, -1.0), p), std::out_of_range);
  CHECK_THROWS_AS(actuator_wrench(uniform(0.0, p.rotor_speed_max + 1.0), p), std::out_of_range);
}

TEST_CASE("actuator wrench respects the airframe symmetry") {
  std::mt19937_64 rng(21);
  VehicleParams no_drag;
  no_drag.drag_coeff = 0.0;
  const VehicleParams p;
  for (int n = 0; n < 200; ++n) {
    // One arm over: spin directions alternate, so only the drag-free airframe is symmetric.
    const ActuatorState a = random_actuators(rng, p);
    const Mat3 quarter = so3::rot_z(pi / 2);
    const Wrench wa = actuator_wrench(a, no_drag), wb = actuator_wrench(shift(a, 1), no_drag);
    CHECK((wb.force - quarter * wa.force).norm() < 1e-9);
    CHECK((wb.torque - quarter * wa.torque).norm() < 1e-9);

    // Two arms over keeps the spin pattern, so the full model must agree.
    const Mat3 half = so3::rot_z(pi);
    const Wrench fa = actuator_wrench(a, p), fb = actuator_wrench(shift(a, 2), p);
    CHECK((fb.force - half * fa.force).norm() < 1e-9);
    CHECK((fb.torque - half * fa.torque).norm() < 1e-9);
  }
}

TEST_CASE("free fall") {
  const VehicleParams p;
  RobotState s;
  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) s = step_dynamics(s, {}, {}, p, dt);
  // Semi-implicit Euler lands within g dt t of the exact parabola.
  CHECK(std::abs(s.position[2] + 0.5 * p.gravity) <= p.gravity * dt * 1.0);
  CHECK(s.position.head<2>().norm() == 0.0);
}

TEST_CASE("hover wrench holds the state still") {
  const VehicleParams p;
  RobotState s;
  s.position = Vec3(0.3, -0.2, 1.0);
  const Wrench hover{Vec3(0, 0, p.mass * p.gravity), Vec3::Zero()};
  for (int i = 0; i < 1000; ++i) {
    const RobotState next = step_dynamics(s, hover, {}, p, 1e-3);
    CHECK((next.position - s.position).norm() <= 1e-9);
    s = next;
  }
}

TEST_CASE("constant yaw torque spins up linearly") {
  const VehicleParams p;
  RobotState s;
  const Wrench torque{Vec3(0, 0, p.mass * p.gravity), Vec3(0, 0, 0.1)};
  for (int i = 0; i < 1000; ++i) s = step_dynamics(s, torque, {}, p, 1e-3);
  CHECK(s.angular_velocity[2] == doctest::Approx(0.1 / p.inertia(2, 2)).epsilon(1e-3));
}

TEST_CASE("step size and divergence checks") {
  const VehicleParams p;
  RobotState s;
  CHECK_THROWS_AS(step_dynamics(s, {}, {}, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_dynamics(s, {}, {}, p, 0.02), std::invalid_argument);
  const Wrench bad{Vec3(std::nan(""), 0, 0), Vec3::Zero()};
  try {
    step_dynamics(s, bad, {}, p, 1e-3);
    FAIL("expected divergence");
  } catch (const SimulationDiverged& e) {
    CHECK(e.last_valid().finite());
  }
}

TEST_CASE("free flight conserves energy and angular momentum") {
  const VehicleParams p;
  RobotState s;
  s.position = Vec3(0, 0, 10);
  s.velocity = Vec3(1.0, -0.5, 3.0);
  s.angular_velocity = Vec3(1.0, 0.5, 2.0);
  auto translational = [&](const RobotState& x) {
    return 0.5 * p.mass * x.velocity.squaredNorm() + p.mass * p.gravity * x.position[2];
  };
  auto rotational = [&](const RobotState& x) { return 0.5 * x.angular_velocity.dot(p.inertia * x.angular_velocity); };
  auto momentum = [&](const RobotState& x) { return Vec3(x.rotation * (p.inertia * x.angular_velocity)); };

  const double e0 = translational(s), r0 = rotational(s);
  const Vec3 l0 = momentum(s);
  double kinetic_scale = 0.5 * p.mass * s.velocity.squaredNorm();
  for (int i = 0; i < 10000; ++i) {
    s = step_dynamics(s, {}, {}, p, 1e-3);
    kinetic_scale = std::max(kinetic_scale, 0.5 * p.mass * s.velocity.squaredNorm());
  }
  CHECK(std::abs(translational(s) - e0) <= 1e-3 * kinetic_scale);
  CHECK(std::abs(rotational(s) - r0) <= 1e-5 * r0);
  CHECK((momentum(s) - l0).norm() <= 1e-6 * 10.0);
}

TEST_CASE("actuator lag") {
  ActuatorDynamicsParams dyn;
  ActuatorState a = uniform(0.2, 900.0);
  ActuatorCommand same{a.tilt, a.rotor_speed};
  const ActuatorState held = step_actuators(a, same, dyn, 1e-3);
  CHECK(held.tilt == a.tilt);
  CHECK(held.rotor_speed == a.rotor_speed);

  dyn.servo_rate_limit = 1e3;
  ActuatorState b;
  ActuatorCommand step;
  step.tilt.setConstant(1.0);
  for (int i = 1; i <= 100; ++i) {
    b = step_actuators(b, step, dyn, 1e-3);
    const double expected = 1.0 - std::exp(-i * 1e-3 / dyn.servo_time_constant);
    CHECK(b.tilt[0] == doctest::Approx(expected).epsilon(0.01));
  }

  dyn.servo_rate_limit = 2.0;
  ActuatorState c;
  step.tilt.setConstant(pi);
  for (int i = 0; i < 200; ++i) {
    const ActuatorState next = step_actuators(c, step, dyn, 1e-3);
    CHECK((next.tilt - c.tilt).cwiseAbs().maxCoeff() <= 2.0 * 1e-3 + 1e-15);
    c = next;
  }
}

TEST_CASE("actuator noise is reproducible from the seed and commands are clamped") {
  ActuatorDynamicsParams dyn;
  dyn.servo_noise_std = 0.01;
  ActuatorCommand cmd;
  cmd.tilt.setConstant(0.1);
  cmd.rotor_speed.setConstant(1000.0);
  std::mt19937_64 r1(42), r2(42);
  ActuatorState a, b;
  for (int i = 0; i < 100; ++i) {
    a = step_actuators(a, cmd, dyn, 1e-3, &r1);
    b = step_actuators(b, cmd, dyn, 1e-3, &r2);
  }
  CHECK(a.tilt == b.tilt);

  ActuatorCommand wild;
  wild.tilt.setConstant(10.0);
  wild.rotor_speed.setConstant(1e5);
  const ActuatorCommand c = clamp_command(wild);
  CHECK(c.tilt.maxCoeff() <= pi);
  CHECK(c.rotor_speed.maxCoeff() <= kRotorSpeedMax);
}

TEST_CASE("wall contact") {
  WallEnvironment wall;
  wall.enabled = true;
  RobotState s;
  s.position = Vec3(0, 0, 1);
  CHECK(contact_force_world(s, wall).isZero(0.0));

  s.position = wall.point + wall.normal * (wall.radius - 0.01);
  CHECK((contact_force_world(s, wall) - 5.0 * wall.normal).norm() < 1e-9);

  s.velocity = -0.2 * wall.normal;
  CHECK((contact_force_world(s, wall) - 15.0 * wall.normal).norm() < 1e-9);
  s.velocity = 0.2 * wall.normal;
  CHECK((contact_force_world(s, wall) - 5.0 * wall.normal).norm() < 1e-9);

  // Body-frame wrench is the same force rotated in, with no torque.
  s.rotation = so3::rot_z(0.7);
  const Wrench w = contact_wrench(s, wall);
  CHECK((s.rotation * w.force - contact_force_world(s, wall)).norm() < 1e-12);
  CHECK(w.torque.isZero(0.0));
}

TEST_CASE("contact is never adhesive and friction stays in its cone") {
  WallEnvironment wall;
  wall.enabled = true;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    RobotState s;
    s.position = wall.point + Vec3(u(rng), u(rng), u(rng)) * 0.5;
    s.velocity = Vec3(u(rng), u(rng), u(rng)) * 2.0;
    const Vec3 f = contact_force_world(s, wall);
    const double normal = f.dot(wall.normal);
    CHECK(normal >= 0.0);
    CHECK((f - normal * wall.normal).norm() <= wall.friction * normal + 1e-12);
  }
}

TEST_CASE("IMU model") {
  std::mt19937_64 rng(1);
  RobotState level;
  const ImuSample a = simulate_imu(level, Vec3::Zero(), {}, rng, 0.0);
  CHECK((a.accel - Vec3(0, 0, 9.81)).norm() < 1e-12);
  CHECK(a.gyro.isZero(0.0));

  RobotState flipped;
  flipped.rotation = so3::rot_x(pi);
  CHECK((simulate_imu(flipped, Vec3::Zero(), {}, rng, 0.0).accel - Vec3(0, 0, -9.81)).norm() < 1e-12);

  const ImuNoise noise{0.1, 0.01};
  std::mt19937_64 r1(5), r2(5);
  for (int i = 0; i < 50; ++i) {
    const ImuSample x = simulate_imu(level, Vec3::Zero(), noise, r1, i * 1e-3);
    const ImuSample y = simulate_imu(level, Vec3::Zero(), noise, r2, i * 1e-3);
    CHECK(x.accel == y.accel);
    CHECK(x.gyro == y.gyro);
  }
}

TEST_CASE("dynamics are bitwise deterministic") {
  const VehicleParams p;
  auto run = [&] {
    RobotState s;
    ActuatorState a;
    ActuatorDynamicsParams dyn;
    dyn.servo_noise_std = 0.005;
    std::mt19937_64 rng(77);
    ActuatorCommand cmd;
    cmd.rotor_speed.setConstant(1400.0);
    cmd.tilt << 0.1, -0.2, 0.3, -0.05;
    for (int i = 0; i < 2000; ++i) {
      a = step_actuators(a, cmd, dyn, 1e-3, &rng);
      s = step_dynamics(s, actuator_wrench(a, p), {}, p, 1e-3);
    }
    return s;
  };
  const RobotState a = run(), b = run();
  CHECK(a.position == b.position);
  CHECK(a.rotation == b.rotation);
  CHECK(a.angular_velocity == b.angular_velocity);
}
