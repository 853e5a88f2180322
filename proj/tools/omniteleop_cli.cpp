#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "omniteleop/experiments.hpp"
#include "omniteleop/live.hpp"

using namespace omniteleop;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCriteriaFailed = 1;
constexpr int kConfigError = 2;

std::atomic<bool> g_stop{false};

SystemConfig base_config(const std::string& path) {
  SystemConfig cfg = path.empty() ? SystemConfig{} : load_config(path);
  cfg.validate();
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

int report(bool ok, const char* what) {
  std::printf("%s: %s\n", what, ok ? "PASS" : "FAIL");
  return ok ? kOk : kCriteriaFailed;
}

int run_decoupling(const SystemConfig& cfg, const fs::path& out) {
  const MaeMatrix m = run_decoupling_experiment(cfg);
  const auto& names = decoupling_axis_names();
  std::printf("%-11s", "commanded");
  for (const auto& n : names) std::printf(" %10s", n.c_str());
  std::printf("\n");
  for (int i = 0; i < kDecouplingAxes; ++i) {
    std::printf("%-11s", names[i].c_str());
    for (int j = 0; j < kDecouplingAxes; ++j) {
      if (i == j) std::printf(" %10s", "-");
      else std::printf(" %10.5f", m.values(i, j));
    }
    std::printf("   (commanded %.4f)\n", m.commanded[i]);
  }
  std::printf("max cross-axis MAE %.5f, median %.5f\n", m.max_off_diagonal(), m.median_off_diagonal());
  if (!out.empty()) {
    ensure_dir(out);
    std::FILE* f = std::fopen((out / "mae.csv").c_str(), "w");
    if (!f) throw std::runtime_error("cannot write mae.csv");
    std::fprintf(f, "commanded");
    for (const auto& n : names) std::fprintf(f, ",%s", n.c_str());
    std::fprintf(f, "\n");
    for (int i = 0; i < kDecouplingAxes; ++i) {
      std::fprintf(f, "%s", names[i].c_str());
      for (int j = 0; j < kDecouplingAxes; ++j) std::fprintf(f, ",%.9g", i == j ? m.commanded[i] : m.values(i, j));
      std::fprintf(f, "\n");
    }
    std::fclose(f);
  }
  return report(m.max_off_diagonal() <= 0.3 && m.median_off_diagonal() <= 0.06, "decoupling");
}

int run_hover(const SystemConfig& cfg, const fs::path& out) {
  const HoverSummary h = run_hover_experiment(cfg);
  if (h.session.status != SessionResult::Status::kCompleted) {
    std::printf("session aborted: %s\n", h.session.diagnostic.c_str());
  }
  std::printf("mean roll %.4f rad, mean pitch %.4f rad (mean |.| %.4f, %.4f)\n", h.mean_roll, h.mean_pitch,
              h.mean_abs_roll, h.mean_abs_pitch);
  std::printf("max drift %.4f m, mean rotor %.1f %%, wall time %.2f s\n", h.max_drift, h.mean_rotor_percent,
              h.session.wall_seconds);
  if (!out.empty()) {
    ensure_dir(out);
    write_telemetry_csv(h.session.telemetry, out / "hover_telemetry.csv");
  }
  const bool ok = h.session.status == SessionResult::Status::kCompleted && std::abs(h.mean_roll) <= 0.03 &&
                  std::abs(h.mean_pitch) <= 0.03 && h.max_drift <= 0.1 && h.mean_rotor_percent >= 40.0 &&
                  h.mean_rotor_percent <= 60.0;
  return report(ok, "hover");
}

int run_wallpush(const SystemConfig& cfg, const fs::path& out) {
  const WallPushSummary w = run_wallpush_experiment(cfg);
  if (!w.diagnostic.empty()) std::printf("%s\n", w.diagnostic.c_str());
  std::printf("first contact %.2f s, contact %.2f s, longest gap %.3f s\n", w.first_contact, w.contact_time,
              w.longest_gap);
  std::printf("mean rotor 1 tilt in contact %.4f rad\n", w.mean_tilt_rotor1);
  std::printf("steady contact force %.3f N, commanded push %.3f N\n", w.steady_contact_force,
              w.commanded_push_force);
  std::printf("push-axis feedback %.4f N m at deflection %.4f rad\n", w.steady_push_feedback,
              w.steady_push_deflection);
  if (!out.empty()) {
    ensure_dir(out);
    write_telemetry_csv(w.telemetry, out / "wallpush_telemetry.csv");
  }
  const bool force_ok = w.commanded_push_force > 0.0 &&
                        std::abs(w.steady_contact_force - w.commanded_push_force) <= 0.2 * w.commanded_push_force;
  return report(w.ok() && w.mean_tilt_rotor1 > 0.0 && force_ok, "wallpush");
}

int run_replay(const fs::path& file) {
  const auto records = read_telemetry_csv(file);
  if (records.empty()) {
    std::printf("%s: no records\n", file.c_str());
    return kOk;
  }
  double max_err = 0.0, rotor = 0.0;
  for (const auto& r : records) {
    max_err = std::max(max_err, (r.position - r.ref_position).norm());
    rotor += r.rotor_percent.mean();
  }
  const auto& first = records.front();
  const auto& last = records.back();
  std::printf("%zu records, t %.3f .. %.3f s\n", records.size(), first.t, last.t);
  std::printf("start position %.3f %.3f %.3f, end position %.3f %.3f %.3f\n", first.position[0], first.position[1],
              first.position[2], last.position[0], last.position[1], last.position[2]);
  std::printf("max tracking error %.4f m, mean rotor %.1f %%\n", max_err, rotor / records.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperation simulator for an omnidirectional tilting-rotor quadrotor"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("sim", "Serve a live cockpit session");
  int port = 7600;
  std::string preset;
  bool realtime = true;
  double duration = std::numeric_limits<double>::infinity();
  sim->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks a free one)")->check(CLI::Range(0, 65535));
  sim->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  sim->add_option("--mode-preset", preset, "built-in preset name or preset file");
  sim->add_flag("--realtime,!--no-realtime", realtime, "pace the loop by the wall clock (default on)");
  sim->add_option("--duration", duration, "stop after this many simulated seconds");

  auto* exp = app.add_subcommand("exp", "Run a scripted experiment");
  std::string which;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  exp->add_option("experiment", which, "decoupling, hover or wallpush")
      ->required()
      ->check(CLI::IsMember({"decoupling", "hover", "wallpush"}));
  exp->add_option("--out", out_dir, "directory for CSV output");
  exp->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_given = true; });
  exp->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

  auto* env = app.add_subcommand("envelope", "Export the force and torque envelopes");
  int resolution = 20;
  std::string env_out = ".";
  env->add_option("--resolution", resolution, "grid resolution per angle")->check(CLI::PositiveNumber);
  env->add_option("--out", env_out, "output directory");
  env->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "Summarize a telemetry CSV");
  std::string telemetry_file;
  replay->add_option("--telemetry", telemetry_file, "telemetry CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) {
      SystemConfig cfg = base_config(config_path);
      if (!preset.empty()) cfg.mode_preset = preset;
      cfg.loop.realtime = realtime;
      cfg.validate();
      load_preset(cfg.mode_preset);
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      live::ServeOptions opt;
      opt.port = static_cast<std::uint16_t>(port);
      opt.max_duration = duration;
      opt.stop = &g_stop;
      opt.on_listening = [](std::uint16_t p) {
        std::printf("listening on 127.0.0.1:%u\n", p);
        std::fflush(stdout);
      };
      const auto s = live::serve_cockpit(cfg, opt);
      std::printf("simulated %.2f s, %zu stick frames\n", s.simulated_seconds, s.frames_received);
      if (s.diverged) {
        std::printf("session aborted: %s\n", s.diagnostic.c_str());
        return kCriteriaFailed;
      }
      return kOk;
    }
    if (*exp) {
      SystemConfig cfg = base_config(config_path);
      if (seed_given) cfg.loop.seed = seed;
      if (which == "decoupling") return run_decoupling(cfg, out_dir);
      if (which == "hover") return run_hover(cfg, out_dir);
      return run_wallpush(cfg, out_dir);
    }
    if (*env) {
      const SystemConfig cfg = base_config(config_path);
      if (resolution < 10) throw ConfigurationError("envelope resolution must be at least 10");
      const EnvelopeResult r = export_envelope(cfg, resolution, env_out);
      std::printf("force axis max  %.3f %.3f %.3f N\n", r.force_axis_max[0], r.force_axis_max[1],
                  r.force_axis_max[2]);
      std::printf("torque axis max %.3f %.3f %.3f N m\n", r.torque_axis_max[0], r.torque_axis_max[1],
                  r.torque_axis_max[2]);
      std::printf("eta_f %.3f .. %.3f, eta_m %.3f .. %.3f\n", r.eta_f_min, r.eta_f_max, r.eta_m_min, r.eta_m_max);
      std::printf("wrote %zu force and %zu torque points to %s\n", r.force.size(), r.torque.size(),
                  env_out.c_str());
      return kOk;
    }
    return run_replay(telemetry_file);
  } catch (const ConfigurationError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
}
