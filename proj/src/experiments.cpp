#include "omniteleop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace omniteleop {

double compute_mae(std::span<const double> series, double baseline) {
  if (series.empty()) throw std::invalid_argument("compute_mae: empty series");
  double sum = 0.0;
  for (double x : series) sum += std::abs(x - baseline);
  return sum / static_cast<double>(series.size());
}

const std::array<std::string, kDecouplingAxes>& decoupling_axis_names() {
  static const std::array<std::string, kDecouplingAxes> names{"x_dot",     "y_dot",      "z_dot",
                                                              "roll_rate", "pitch_rate", "yaw_rate"};
  return names;
}

std::vector<double> MaeMatrix::off_diagonal() const {
  std::vector<double> out;
  for (int i = 0; i < kDecouplingAxes; ++i)
    for (int j = 0; j < kDecouplingAxes; ++j)
      if (i != j) out.push_back(values(i, j));
  return out;
}

double MaeMatrix::max_off_diagonal() const {
  const auto v = off_diagonal();
  return *std::max_element(v.begin(), v.end());
}

double MaeMatrix::median_off_diagonal() const {
  auto v = off_diagonal();
  std::sort(v.begin(), v.end());
  return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

namespace {

// Input driving each reference axis under the corrected mode-2 preset:
// stick axis index (0..3) or body axis (-1 roll, -2 pitch).
constexpr std::array<int, kDecouplingAxes> kAxisInput{3, 2, 1, -1, -2, 0};

int partner_input(int input) {
  switch (input) {
    case 0: return 1;
    case 1: return 0;
    case 2: return 3;
    case 3: return 2;
    case -1: return -2;
    default: return -1;
  }
}

}  // namespace

ScenarioScript decoupling_scenario(int commanded_axis, const SystemConfig& cfg,
                                   const DecouplingOptions& opt) {
  if (commanded_axis < 0 || commanded_axis >= kDecouplingAxes) {
    throw std::out_of_range("decoupling_scenario: axis index");
  }
  const int input = kAxisInput[commanded_axis];
  const int partner = partner_input(input);
  const double amplitude = opt.null_input ? 0.0 : opt.throw_fraction * cfg.stick_limit;
  const double w = 2.0 * std::numbers::pi * opt.frequency;
  const double leak = opt.hand_crosstalk;

  auto channel = [=](double t, int which) {
    const double s = amplitude * std::sin(w * t);
    if (which == input) return s;
    if (which == partner) return leak * s;
    return 0.0;
  };

  ScenarioScript sc;
  sc.duration = opt.duration;
  sc.stick_angles = [=](double t) {
    return Vec4(channel(t, 0), channel(t, 1), channel(t, 2), channel(t, 3));
  };
  sc.body_attitude = [=](double t) {
    return so3::from_euler_zyx(channel(t, -1), channel(t, -2), 0.0);
  };
  return sc;
}

MaeMatrix run_decoupling_experiment(const SystemConfig& cfg_in, const DecouplingOptions& opt) {
  SystemConfig cfg = cfg_in;
  cfg.mode_preset = "corrected-mode2";
  cfg.validate();

  std::array<std::array<double, kDecouplingAxes>, kDecouplingAxes> mae{};
  std::array<std::string, kDecouplingAxes> failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < kDecouplingAxes; ++j) {
    const SessionResult r = run_session(cfg, decoupling_scenario(j, cfg, opt));
    if (r.status != SessionResult::Status::kCompleted || r.telemetry.empty()) {
      failure[j] = r.diagnostic.empty() ? "no telemetry" : r.diagnostic;
      continue;
    }
    std::vector<double> series(r.telemetry.size());
    for (int i = 0; i < kDecouplingAxes; ++i) {
      for (std::size_t k = 0; k < r.telemetry.size(); ++k) {
        const TelemetryRecord& rec = r.telemetry[k];
        series[k] = i < 3 ? rec.ref_velocity[i] : rec.ref_angular_velocity[i - 3];
      }
      mae[j][i] = compute_mae(series);
    }
  }

  MaeMatrix out;
  for (int j = 0; j < kDecouplingAxes; ++j) {
    if (!failure[j].empty()) {
      throw std::runtime_error("decoupling run for " + decoupling_axis_names()[j] + " failed: " + failure[j]);
    }
    for (int i = 0; i < kDecouplingAxes; ++i) {
      if (i == j) out.commanded[j] = mae[j][i];
      else out.values(j, i) = mae[j][i];
    }
  }
  return out;
}

HoverSummary run_hover_experiment(const SystemConfig& cfg, double duration) {
  ScenarioScript sc;
  sc.duration = duration;
  HoverSummary h;
  h.session = run_session(cfg, sc);
  const auto& tel = h.session.telemetry;
  if (tel.empty()) return h;
  for (const auto& r : tel) {
    h.mean_roll += r.euler[0];
    h.mean_pitch += r.euler[1];
    h.mean_abs_roll += std::abs(r.euler[0]);
    h.mean_abs_pitch += std::abs(r.euler[1]);
    h.max_drift = std::max(h.max_drift, (r.position - cfg.initial_position).norm());
    h.mean_rotor_percent += r.rotor_percent.mean();
  }
  const double n = static_cast<double>(tel.size());
  h.mean_roll /= n;
  h.mean_pitch /= n;
  h.mean_abs_roll /= n;
  h.mean_abs_pitch /= n;
  h.mean_rotor_percent /= n;
  return h;
}

WallPushSummary run_wallpush_experiment(const SystemConfig& cfg_in, const WallPushOptions& opt) {
  if (!(opt.push_duration > 0.0) || !(opt.steady_window > 0.0) || opt.steady_window > opt.push_duration) {
    throw std::invalid_argument("wall push: steady window must lie inside the push");
  }
  SystemConfig cfg = cfg_in;
  cfg.wall.enabled = true;
  cfg.mode_preset = "corrected-mode2";
  cfg.validate();

  ScenarioScript sc;
  sc.duration = opt.approach_timeout + opt.push_duration;
  sc.wall = true;
  sc.muscle_torque = [opt](double t) {
    const double ramp = std::clamp((t - opt.onset) / opt.ramp, 0.0, 1.0);
    return Vec4(0.0, 0.0, 0.0, opt.muscle_torque * ramp);
  };

  WallPushSummary out;
  Session session(cfg, sc);
  const Vec3 normal = cfg.wall.normal.normalized();
  const double dt = cfg.loop.physics_dt;

  const auto push_steps = static_cast<std::uint64_t>(std::llround(opt.push_duration / dt));
  const auto steady_from = push_steps - static_cast<std::uint64_t>(std::llround(opt.steady_window / dt));
  bool touched = false;
  std::uint64_t contact_step = 0, contact_steps = 0;
  double gap = 0.0;
  double tilt_sum = 0.0;
  std::size_t tilt_samples = 0;
  double force_sum = 0.0, command_sum = 0.0, feedback_sum = 0.0, deflection_sum = 0.0;
  std::size_t steady_samples = 0;

  try {
    while (true) {
      session.step();
      const double t = session.time();
      const bool in_contact = session.contact_force().norm() > 0.0;
      if (!touched) {
        if (in_contact) {
          touched = true;
          contact_step = session.physics_steps();
          out.first_contact = t;
        } else if (t >= opt.approach_timeout) {
          out.status = WallPushSummary::Status::kNoContact;
          out.diagnostic = "wall not reached within the approach timeout";
          break;
        }
        continue;
      }
      const std::uint64_t since = session.physics_steps() - contact_step;
      if (since > push_steps) {
        out.status = WallPushSummary::Status::kCompleted;
        break;
      }
      if (in_contact) {
        gap = 0.0;
        ++contact_steps;
        tilt_sum += session.actuators().tilt[0];
        ++tilt_samples;
      } else {
        gap += dt;
        out.longest_gap = std::max(out.longest_gap, gap);
        if (gap > opt.max_gap) {
          out.status = WallPushSummary::Status::kContactLost;
          out.diagnostic = "contact lost for more than " + std::to_string(opt.max_gap) + " s";
          break;
        }
      }
      if (since > steady_from) {
        const Vec3 commanded_world = session.state().rotation * session.impedance_term().force;
        force_sum += normal.dot(session.contact_force());
        command_sum += -normal.dot(commanded_world);
        feedback_sum += session.feedback()[3];
        deflection_sum += session.sticks().angle[3];
        ++steady_samples;
      }
    }
  } catch (const SimulationDiverged& e) {
    out.status = WallPushSummary::Status::kDiverged;
    out.diagnostic = e.what();
  }

  out.contact_time = static_cast<double>(contact_steps) * dt;
  if (tilt_samples > 0) out.mean_tilt_rotor1 = tilt_sum / static_cast<double>(tilt_samples);
  if (steady_samples > 0) {
    const double n = static_cast<double>(steady_samples);
    out.steady_contact_force = force_sum / n;
    out.commanded_push_force = command_sum / n;
    out.steady_push_feedback = feedback_sum / n;
    out.steady_push_deflection = deflection_sum / n;
  }
  out.telemetry = session.telemetry();
  return out;
}

EnvelopeResult export_envelope(const SystemConfig& cfg, int resolution, const std::filesystem::path& dir) {
  EnvelopeResult env = compute_envelope(cfg.allocation(), resolution);
  write_envelope_csv(env, dir);
  return env;
}

}  // namespace omniteleop
