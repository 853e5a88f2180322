#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "omniteleop/session.hpp"

using namespace omniteleop;

TEST_CASE("empty scenario holds hover") {
  ScenarioScript sc;
  sc.duration = 5.0;
  const SystemConfig cfg;
  const SessionResult r = run_session(cfg, sc);
  REQUIRE(r.status == SessionResult::Status::kCompleted);
  CHECK(r.telemetry.size() == 250);
  CHECK((r.final_state.position - cfg.initial_position).norm() < 0.05);
  for (const auto& rec : r.telemetry) {
    CHECK(std::abs(rec.euler[0]) < 0.03);
    CHECK(std::abs(rec.euler[1]) < 0.03);
  }
}

TEST_CASE("telemetry is one record per tick with monotone time") {
  ScenarioScript sc;
  sc.duration = 1.0;
  const SessionResult r = run_session(SystemConfig{}, sc);
  REQUIRE(r.telemetry.size() == 50);
  for (std::size_t i = 0; i < r.telemetry.size(); ++i) {
    CHECK(r.telemetry[i].t == doctest::Approx(0.02 * (i + 1)).epsilon(1e-12));
  }
}

TEST_CASE("identical seeds give byte-identical telemetry files") {
  SystemConfig cfg;
  cfg.actuators.servo_noise_std = 0.005;
  cfg.loop.seed = 1234;
  ScenarioScript sc;
  sc.duration = 3.0;
  sc.stick_angles = [](double t) { return Vec4(0.0, 0.1 * std::sin(t), 0.2 * std::sin(2 * t), 0.0); };
  const std::string a = telemetry_csv(run_session(cfg, sc).telemetry);
  const std::string b = telemetry_csv(run_session(cfg, sc).telemetry);
  CHECK(a == b);
  cfg.loop.seed = 4321;
  CHECK(telemetry_csv(run_session(cfg, sc).telemetry) != a);
}

TEST_CASE("telemetry CSV round trip") {
  ScenarioScript sc;
  sc.duration = 0.5;
  const SessionResult r = run_session(SystemConfig{}, sc);
  const auto path = std::filesystem::temp_directory_path() / "omniteleop_session_telemetry.csv";
  write_telemetry_csv(r.telemetry, path);
  const auto back = read_telemetry_csv(path);
  REQUIRE(back.size() == r.telemetry.size());
  CHECK(telemetry_csv(back) == telemetry_csv(r.telemetry));
  std::filesystem::remove(path);
}

TEST_CASE("bad rates are rejected at startup") {
  SystemConfig cfg;
  cfg.loop.device_rate = 300.0;
  CHECK_THROWS_AS(Session{cfg}, ConfigurationError);
  ScenarioScript sc;
  sc.duration = 0.0;
  CHECK_THROWS_AS((Session{SystemConfig{}, sc}), ConfigurationError);
}

TEST_CASE("centered sticks never move the translational reference") {
  SystemConfig cfg;
  cfg.actuators.servo_noise_std = 0.01;
  ScenarioScript sc;
  sc.duration = 20.0;
  Session s(cfg, sc);
  const Vec3 start = s.reference().position;
  s.set_step_observer([&](const Session& x) {
    REQUIRE(x.reference().velocity == Vec3::Zero());
  });
  s.run_until(20.0);
  CHECK(s.reference().position == start);
}

TEST_CASE("a scripted stick deflection drives the matching reference axis") {
  ScenarioScript sc;
  sc.duration = 3.0;
  sc.stick_angles = [](double t) { return Vec4(0, 0, 0, t > 0.5 ? 0.3 : 0.0); };
  Session s(SystemConfig{}, sc);
  s.run_until(3.0);
  CHECK(s.reference().velocity[0] == doctest::Approx(0.5 * std::sin(0.3)).epsilon(1e-3));
  CHECK(s.reference().velocity.tail<2>().norm() < 1e-12);
  CHECK(s.state().position[0] > s.config().initial_position[0] + 0.1);
}

TEST_CASE("live input reaches the reference within two device ticks and fails safe") {
  SystemConfig cfg;
  Session s(cfg);
  s.enable_live_mode(true);
  const double device_dt = 1.0 / cfg.loop.device_rate;
  s.run_until(1.0);
  CHECK(s.reference().velocity.isZero(0.0));

  LiveInput in;
  in.axes = Vec4(0, 0, 0, 0.3);
  s.push_live_input(in);
  const double t0 = s.time();
  while (s.reference().velocity[0] == 0.0 && s.time() < t0 + 1.0) s.step();
  CHECK(s.time() - t0 <= 2.0 * device_dt + 1e-12);
  CHECK(s.live_input_active());

  // Keep the link alive with heartbeats only: the last frame stays in force.
  for (int i = 0; i < 10; ++i) {
    s.note_heartbeat();
    s.run_until(s.time() + 0.1);
  }
  CHECK(s.live_input_active());
  CHECK(s.reference().velocity[0] > 0.1);

  // Silence past the timeout: sticks spring back and the reference stops.
  s.run_until(s.time() + cfg.heartbeat_timeout + 0.5);
  CHECK_FALSE(s.live_input_active());
  CHECK(std::abs(s.sticks().angle[3]) < 1e-3);
  s.run_until(s.time() + 1.0);
  CHECK(s.reference().velocity.norm() < 1e-3);
  const Vec3 held = s.reference().position;
  s.run_until(s.time() + 5.0);
  CHECK((s.reference().position - held).norm() < 5e-3);
  CHECK(s.state().world_velocity().norm() < 0.05);
}

TEST_CASE("divergence is reported with a diagnostic") {
  ScenarioScript sc;
  sc.duration = 2.0;
  sc.disturbance_force = [](double t, const RobotState&) { return Vec3(0, 0, t > 0.5 ? 1e9 : 0.0); };
  const SessionResult r = run_session(SystemConfig{}, sc);
  CHECK(r.status == SessionResult::Status::kDiverged);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(r.final_state.finite());
}
