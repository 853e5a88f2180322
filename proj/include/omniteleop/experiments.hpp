#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "omniteleop/config.hpp"
#include "omniteleop/envelope.hpp"
#include "omniteleop/session.hpp"

namespace omniteleop {

/// Mean of |x - baseline|. Throws std::invalid_argument on an empty series.
double compute_mae(std::span<const double> series, double baseline = 0.0);

/// Axis order: x_dot, y_dot, z_dot, roll rate, pitch rate, yaw rate.
inline constexpr int kDecouplingAxes = 6;
const std::array<std::string, kDecouplingAxes>& decoupling_axis_names();

/// values(commanded, affected): MAE of the affected reference axis against zero while the
/// commanded axis is driven. Diagonal is NaN; the commanded axis' own MAE is in `commanded`.
struct MaeMatrix {
  Mat6 values = Mat6::Constant(std::numeric_limits<double>::quiet_NaN());
  Vec6 commanded = Vec6::Zero();

  std::vector<double> off_diagonal() const;
  double max_off_diagonal() const;
  double median_off_diagonal() const;
};

struct DecouplingOptions {
  double duration = 30.0;        // s per commanded axis
  double frequency = 0.15;       // Hz, back-and-forth drive
  double throw_fraction = 0.8;   // of the stick (or body) limit
  double hand_crosstalk = 0.05;  // fraction leaking onto the other axis of the same input
  bool null_input = false;       // all inputs held at zero
};

/// Six runs with the corrected mode-2 preset, one commanded axis each, executed in parallel.
MaeMatrix run_decoupling_experiment(const SystemConfig& cfg, const DecouplingOptions& opt = {});

/// The scripted inputs that drive one decoupling run.
ScenarioScript decoupling_scenario(int commanded_axis, const SystemConfig& cfg,
                                   const DecouplingOptions& opt);

struct HoverSummary {
  SessionResult session;
  double mean_roll = 0.0;   // signed means, rad
  double mean_pitch = 0.0;
  double mean_abs_roll = 0.0;
  double mean_abs_pitch = 0.0;
  double max_drift = 0.0;   // m from the start position
  double mean_rotor_percent = 0.0;
};

HoverSummary run_hover_experiment(const SystemConfig& cfg, double duration = 60.0);

struct WallPushOptions {
  double muscle_torque = 0.06;  // N m on the right stick y axis
  double onset = 1.0;           // s
  double ramp = 1.0;            // s
  double push_duration = 12.0;  // s of contact after first touch
  double max_gap = 1.0;         // s of lost contact tolerated
  double steady_window = 4.0;   // s at the end of the push used for steady values
  double approach_timeout = 30.0;
};

struct WallPushSummary {
  enum class Status { kCompleted, kContactLost, kNoContact, kDiverged };
  Status status = Status::kNoContact;
  std::string diagnostic;
  std::vector<TelemetryRecord> telemetry;
  double first_contact = 0.0;       // s
  double contact_time = 0.0;        // s in contact during the push phase
  double longest_gap = 0.0;         // s
  double mean_tilt_rotor1 = 0.0;    // rad, over samples in contact
  double steady_contact_force = 0.0;     // N along the wall normal, pressing
  double commanded_push_force = 0.0;     // N, impedance force toward the wall
  double steady_push_feedback = 0.0;     // N m on the pushing stick axis
  double steady_push_deflection = 0.0;   // rad of the pushing stick axis

  bool ok() const { return status == Status::kCompleted; }
};

WallPushSummary run_wallpush_experiment(const SystemConfig& cfg, const WallPushOptions& opt = {});

/// Computes the envelope of the configured vehicle and writes both CSV files into dir.
EnvelopeResult export_envelope(const SystemConfig& cfg, int resolution, const std::filesystem::path& dir);

}  // namespace omniteleop
