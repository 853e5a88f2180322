#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "omniteleop/allocation.hpp"
#include "omniteleop/config.hpp"
#include "omniteleop/controller.hpp"
#include "omniteleop/frame_codec.hpp"
#include "omniteleop/haptic.hpp"
#include "omniteleop/madgwick.hpp"
#include "omniteleop/reference.hpp"
#include "omniteleop/telemetry.hpp"

namespace omniteleop {

/// Scripted operator and environment for a headless session.
struct ScenarioScript {
  double duration = 5.0;  // s
  /// Finger muscle torques driving the sticks through the operator model.
  std::function<Vec4(double)> muscle_torque;
  /// Stick angles imposed directly (takes precedence over muscle_torque).
  std::function<Vec4(double)> stick_angles;
  /// True attitude of the hand-held joystick body; level when empty.
  std::function<Rotation(double)> body_attitude;
  /// Extra world-frame force on the vehicle, e.g. a test disturbance.
  std::function<Vec3(double, const RobotState&)> disturbance_force;
  bool wall = false;

  void validate() const;
};

/// Stick content of a cockpit message, same semantics as a joystick frame.
struct LiveInput {
  Vec2 attitude = Vec2::Zero();
  Vec4 axes = Vec4::Zero();
};

/// Fixed-step multi-rate loop: device -> frame link -> reference mapper -> impedance
/// controller -> allocation -> actuators -> rigid body, with the wrench estimate fed
/// back to the sticks. One instance is stepped by a single thread.
class Session {
 public:
  explicit Session(SystemConfig cfg, ScenarioScript scenario = {});

  /// One physics step. Throws SimulationDiverged.
  void step();
  void run_until(double t_end);

  double time() const { return static_cast<double>(steps_) * cfg_.loop.physics_dt; }
  std::uint64_t physics_steps() const { return steps_; }
  const SystemConfig& config() const { return cfg_; }

  const RobotState& state() const { return state_; }
  const ActuatorState& actuators() const { return actuators_; }
  const ReferenceState& reference() const { return reference_; }
  const StickState& sticks() const { return sticks_; }
  const Vec4& feedback() const { return feedback_; }
  const Wrench& external_estimate() const { return estimator_.estimate(); }
  const Wrench& commanded_wrench() const { return commanded_; }
  const Wrench& impedance_term() const { return impedance_term_; }
  const Vec3& contact_force() const { return contact_force_; }
  const JoystickFrame& last_frame() const { return frame_; }
  const ModePreset& preset() const { return preset_; }
  const MadgwickState& joystick_filter() const { return madgwick_; }

  /// Overrides the pose reference (tests and step-response experiments).
  void set_reference(const ReferenceState& ref) { reference_ = ref; }
  void set_state(const RobotState& s);

  /// Live cockpit input; applied at the next device tick. Refreshes the heartbeat.
  void push_live_input(const LiveInput& input) { pending_live_ = input; heartbeat_pending_ = true; }
  void note_heartbeat() { heartbeat_pending_ = true; }
  void enable_live_mode(bool on) { live_mode_ = on; }
  bool live_input_active() const;

  const std::vector<TelemetryRecord>& telemetry() const { return telemetry_; }
  void set_telemetry_sink(std::function<void(const TelemetryRecord&)> sink) { sink_ = std::move(sink); }
  void set_step_observer(std::function<void(const Session&)> observer) { observer_ = std::move(observer); }
  void set_record_telemetry(bool on) { record_ = on; }

  TelemetryRecord snapshot() const;

 private:
  void device_tick();
  void controller_tick();

  SystemConfig cfg_;
  ScenarioScript scenario_;
  ModePreset preset_;
  Allocator allocator_;
  ImpedanceController controller_;
  WrenchEstimator estimator_;
  FeedbackGains feedback_gains_;
  FingerModel finger_;
  WallEnvironment wall_;

  int controller_every_;
  int device_every_;
  int telemetry_every_;
  double controller_dt_;
  double device_dt_;

  std::uint64_t steps_ = 0;
  RobotState state_;
  ActuatorState actuators_;
  ActuatorCommand command_;
  Wrench commanded_;
  Wrench impedance_term_;
  Wrench actuation_sum_;
  int actuation_samples_ = 0;
  Vec3 contact_force_ = Vec3::Zero();

  ReferenceState reference_;
  StickState sticks_;
  Vec4 feedback_ = Vec4::Zero();
  MadgwickState madgwick_;
  Rotation body_true_ = Rotation::Identity();
  JoystickFrame frame_;
  std::uint16_t sequence_ = 0;

  bool live_mode_ = false;
  std::optional<LiveInput> pending_live_;
  std::optional<LiveInput> live_;
  bool heartbeat_pending_ = false;
  double last_heartbeat_ = -1e9;

  std::mt19937_64 actuator_rng_;
  std::mt19937_64 imu_rng_;

  bool record_ = true;
  std::vector<TelemetryRecord> telemetry_;
  std::function<void(const TelemetryRecord&)> sink_;
  std::function<void(const Session&)> observer_;
};

struct SessionResult {
  enum class Status { kCompleted, kDiverged };
  Status status = Status::kCompleted;
  std::string diagnostic;
  RobotState final_state;
  std::vector<TelemetryRecord> telemetry;
  double wall_seconds = 0.0;
};

/// Runs the scenario to completion, paced by the wall clock when cfg.loop.realtime is set.
/// Divergence aborts the run and is reported in the result rather than thrown.
SessionResult run_session(const SystemConfig& cfg, const ScenarioScript& scenario);

}  // namespace omniteleop
