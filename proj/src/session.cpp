#include "omniteleop/session.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace omniteleop {

void ScenarioScript::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ConfigurationError("scenario duration must be positive");
  }
}

namespace {

PoseReference to_pose_reference(const ReferenceState& r) {
  return {r.position, r.rotation, r.velocity, r.angular_velocity};
}

Vec4 rotor_percent(const Vec4& speed, double speed_max) {
  return 100.0 * (speed / speed_max).array().square().matrix();
}

}  // namespace

Session::Session(SystemConfig cfg, ScenarioScript scenario)
    : cfg_(std::move(cfg)),
      scenario_(std::move(scenario)),
      preset_((cfg_.validate(), load_preset(cfg_.mode_preset))),
      allocator_(cfg_.allocation()),
      controller_(ImpedanceGains::matched(cfg_.vehicle, cfg_.translation_frequency,
                                          cfg_.rotation_frequency, cfg_.damping_ratio),
                  cfg_.vehicle),
      estimator_((Vec6() << Vec3::Constant(cfg_.estimator_gain_force),
                  Vec3::Constant(cfg_.estimator_gain_torque)).finished(),
                 cfg_.vehicle),
      wall_(cfg_.wall),
      controller_every_(cfg_.loop.physics_steps_per(cfg_.loop.controller_rate)),
      device_every_(cfg_.loop.physics_steps_per(cfg_.loop.device_rate)),
      telemetry_every_(cfg_.loop.physics_steps_per(cfg_.loop.telemetry_rate)),
      controller_dt_(controller_every_ * cfg_.loop.physics_dt),
      device_dt_(device_every_ * cfg_.loop.physics_dt),
      actuator_rng_(cfg_.loop.seed),
      imu_rng_(cfg_.loop.seed ^ 0x9e3779b97f4a7c15ULL) {
  scenario_.validate();
  wall_.enabled = wall_.enabled || scenario_.wall;

  feedback_gains_.recentering = cfg_.k_rec;
  feedback_gains_.external = cfg_.k_ext;
  feedback_gains_.routing = routing_from_preset(preset_);
  feedback_gains_.torque_cap = cfg_.torque_cap;
  feedback_gains_.validate();

  finger_.inertia = cfg_.finger_inertia;
  finger_.damping = cfg_.finger_damping;
  if (scenario_.muscle_torque) finger_.muscle_torque = scenario_.muscle_torque;

  sticks_.limit = cfg_.stick_limit;
  madgwick_.beta = cfg_.madgwick_beta;

  RobotState s;
  s.position = cfg_.initial_position;
  set_state(s);
}

void Session::set_state(const RobotState& s) {
  state_ = s;
  reference_ = ReferenceState{};
  reference_.position = s.position;
  reference_.rotation = s.rotation;
  estimator_.reset(state_);

  // Start at the hover actuation so the first instant carries no lag transient.
  const PoseReference ref = to_pose_reference(reference_);
  commanded_ = controller_.command(pose_errors(state_, ref), state_, ref, Wrench{});
  const AllocationResult alloc = allocator_.allocate(commanded_);
  command_ = alloc.command;
  actuators_.tilt = command_.tilt;
  actuators_.rotor_speed = command_.rotor_speed;
  actuation_sum_ = Wrench{};
  actuation_samples_ = 0;
}

bool Session::live_input_active() const {
  return live_mode_ && live_.has_value() && time() - last_heartbeat_ <= cfg_.heartbeat_timeout;
}

void Session::device_tick() {
  const double t = time();
  if (heartbeat_pending_) {
    last_heartbeat_ = t;
    heartbeat_pending_ = false;
  }
  if (pending_live_) {
    live_ = pending_live_;
    pending_live_.reset();
  }

  feedback_ = total_feedback(recentering_torque(sticks_, feedback_gains_.recentering),
                             external_feedback_torque(estimator_.estimate().stacked(), feedback_gains_),
                             feedback_gains_.torque_cap);

  // Joystick body: true attitude seen through the onboard IMU and attitude filter.
  Rotation body_now = Rotation::Identity();
  if (scenario_.body_attitude) body_now = so3::orthonormalize(scenario_.body_attitude(t));
  RobotState joystick;
  joystick.rotation = body_now;
  joystick.angular_velocity = so3::log(body_true_.transpose() * body_now) / device_dt_;
  body_true_ = body_now;
  const ImuSample imu = simulate_imu(joystick, Vec3::Zero(), cfg_.joystick_imu, imu_rng_, t);
  madgwick_ = madgwick_update(madgwick_, imu, device_dt_);
  const so3::EulerZYX body_euler = so3::euler_zyx(madgwick_.q.toRotationMatrix());
  Vec2 attitude(body_euler.roll, body_euler.pitch);

  if (live_mode_) {
    if (live_input_active()) {
      sticks_ = drive_sticks(sticks_, live_->axes, device_dt_);
      attitude = live_->attitude;
    } else {
      // Failsafe: operator silent, sticks spring back and the body input is ignored.
      sticks_ = step_admittance(sticks_, Vec4::Zero(), feedback_, cfg_.admittance, device_dt_);
      attitude.setZero();
    }
  } else if (scenario_.stick_angles) {
    sticks_ = drive_sticks(sticks_, scenario_.stick_angles(t), device_dt_);
  } else {
    const Vec4 interaction = scenario_.muscle_torque
                                 ? step_finger(finger_, sticks_, feedback_, cfg_.admittance, t, device_dt_)
                                 : Vec4::Zero();
    sticks_ = step_admittance(sticks_, interaction, feedback_, cfg_.admittance, device_dt_);
  }

  // Serial link to the onboard computer.
  const FrameBytes bytes = encode_frame(attitude, sticks_.angle, sequence_++);
  frame_ = decode_frame(bytes);
}

void Session::controller_tick() {
  const Rotation left = so3::rot_x(frame_.axes[0]) * so3::rot_y(frame_.axes[1]);
  const Rotation right = so3::rot_x(frame_.axes[2]) * so3::rot_y(frame_.axes[3]);
  const Rotation body = so3::from_euler_zyx(frame_.attitude[0], frame_.attitude[1], 0.0);
  const RateCommand rates = stick_to_rates(left, right, body, preset_, cfg_.q_variant);
  reference_ = integrate_reference(reference_, rates, cfg_.limits, controller_dt_);

  const Wrench actuation = actuation_samples_ > 0 ? actuation_sum_ * (1.0 / actuation_samples_)
                                                  : actuator_wrench(actuators_, cfg_.vehicle);
  actuation_sum_ = Wrench{};
  actuation_samples_ = 0;
  estimator_.update(state_, actuation, controller_dt_);

  const PoseReference ref = to_pose_reference(reference_);
  const PoseErrors e = pose_errors(state_, ref);
  commanded_ = controller_.command(e, state_, ref, estimator_.estimate());
  impedance_term_ = commanded_ - controller_.bias(state_, ref);
  command_ = allocator_.allocate(commanded_).command;
}

void Session::step() {
  if (steps_ % static_cast<std::uint64_t>(device_every_) == 0) device_tick();
  if (steps_ % static_cast<std::uint64_t>(controller_every_) == 0) controller_tick();

  const double dt = cfg_.loop.physics_dt;
  actuators_ = step_actuators(actuators_, command_, cfg_.actuators, dt, &actuator_rng_);
  const Wrench actuation = actuator_wrench(actuators_, cfg_.vehicle);

  contact_force_ = contact_force_world(state_, wall_);
  Vec3 external_world = contact_force_;
  if (scenario_.disturbance_force) external_world += scenario_.disturbance_force(time(), state_);
  const Wrench external{state_.rotation.transpose() * external_world, Vec3::Zero()};

  const RobotState next = step_dynamics(state_, actuation, external, cfg_.vehicle, dt);
  if (!next.finite() || next.position.norm() > 1e4 || next.velocity.norm() > 1e3 ||
      next.angular_velocity.norm() > 1e3) {
    throw SimulationDiverged("simulation diverged at t = " + std::to_string(time()), state_);
  }
  state_ = next;
  actuation_sum_ = actuation_sum_ + actuation;
  ++actuation_samples_;
  ++steps_;

  if (steps_ % static_cast<std::uint64_t>(telemetry_every_) == 0) {
    const TelemetryRecord rec = snapshot();
    if (record_) telemetry_.push_back(rec);
    if (sink_) sink_(rec);
  }
  if (observer_) observer_(*this);
}

void Session::run_until(double t_end) {
  const auto target = static_cast<std::uint64_t>(std::llround(t_end / cfg_.loop.physics_dt));
  while (steps_ < target) step();
}

TelemetryRecord Session::snapshot() const {
  TelemetryRecord r;
  r.t = time();
  r.position = state_.position;
  r.velocity = state_.world_velocity();
  const so3::EulerZYX e = so3::euler_zyx(state_.rotation);
  r.euler = Vec3(e.roll, e.pitch, e.yaw);
  r.angular_velocity = state_.angular_velocity;
  r.ref_position = reference_.position;
  r.ref_velocity = reference_.velocity;
  const so3::EulerZYX re = so3::euler_zyx(reference_.rotation);
  r.ref_euler = Vec3(re.roll, re.pitch, re.yaw);
  r.ref_angular_velocity = reference_.angular_velocity;
  r.tilt = actuators_.tilt;
  r.rotor_speed = actuators_.rotor_speed;
  r.rotor_percent = rotor_percent(actuators_.rotor_speed, cfg_.vehicle.rotor_speed_max);
  r.external_estimate = estimator_.estimate().stacked();
  r.stick_axes = sticks_.angle;
  r.feedback = feedback_;
  r.contact_force = contact_force_;
  return r;
}

SessionResult run_session(const SystemConfig& cfg, const ScenarioScript& scenario) {
  SessionResult result;
  Session session(cfg, scenario);
  const auto wall_start = std::chrono::steady_clock::now();
  const auto total = static_cast<std::uint64_t>(std::llround(scenario.duration / cfg.loop.physics_dt));
  try {
    while (session.physics_steps() < total) {
      session.step();
      if (cfg.loop.realtime) {
        const auto due = wall_start + std::chrono::duration<double>(session.time());
        std::this_thread::sleep_until(due);
      }
    }
    result.final_state = session.state();
  } catch (const SimulationDiverged& e) {
    result.status = SessionResult::Status::kDiverged;
    result.diagnostic = e.what();
    result.final_state = e.last_valid();
  }
  result.telemetry = session.telemetry();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

}  // namespace omniteleop
