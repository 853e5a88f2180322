#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "omniteleop/config.hpp"

using namespace omniteleop;

TEST_CASE("defaults are valid and documented values") {
  const SystemConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.loop.physics_dt == 0.001);
  CHECK(c.loop.controller_rate == 500.0);
  CHECK(c.loop.device_rate == 250.0);
  CHECK(c.loop.telemetry_rate == 50.0);
  CHECK(c.loop.physics_steps_per(250.0) == 4);
  CHECK(c.heartbeat_timeout == 0.5);
  CHECK(c.vehicle.max_rotor_thrust() == doctest::Approx(12.5).epsilon(1e-3));
}

TEST_CASE("key = value parsing") {
  const SystemConfig c = parse_config(
      "# comment\n"
      "\n"
      "mass = 2.5   # trailing comment\n"
      "k_rec = 0.1 0.2 0.3 0.4\n"
      "k_ext = 0.05\n"
      "wall_point = 2 0 0\n"
      "q_variant = paper-normalized\n"
      "realtime = true\n"
      "seed = 18446744073709551615\n");
  CHECK(c.vehicle.mass == 2.5);
  CHECK(c.k_rec == Vec4(0.1, 0.2, 0.3, 0.4));
  CHECK(c.k_ext == Vec4::Constant(0.05));
  CHECK(c.wall.point == Vec3(2, 0, 0));
  CHECK(c.q_variant == so3::QVariant::kPaperNormalized);
  CHECK(c.loop.realtime);
  CHECK(c.loop.seed == 18446744073709551615ULL);
}

TEST_CASE("unknown keys and malformed values are configuration errors") {
  try {
    parse_config("mass = 2\nbogus_key = 3\n");
    FAIL("accepted unknown key");
  } catch (const ConfigurationError& e) {
    const std::string what = e.what();
    CHECK(what.find("unknown config key") != std::string::npos);
    CHECK(what.find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("mass = heavy\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("k_rec = 1 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("seed = -4\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("q_variant = cubic\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("mass = -1\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("k_yaw = 1.5\n"), ConfigurationError);
}

TEST_CASE("loop rates must divide the physics rate") {
  CHECK_THROWS_AS(parse_config("device_rate = 300\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("controller_rate = 2000\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("physics_dt = 0\n"), ConfigurationError);
  CHECK_NOTHROW(parse_config("device_rate = 200\ntelemetry_rate = 100\n"));
}

TEST_CASE("formatted configuration parses back to the same values") {
  SystemConfig c;
  c.vehicle.mass = 2.345678901234567;
  c.k_rec = Vec4(0.1, 0.2, 0.3, 0.4);
  c.loop.seed = 987654321;
  c.mode_preset = "paper-mode2";
  const SystemConfig d = parse_config(format_config(c));
  CHECK(format_config(d) == format_config(c));
  CHECK(d.vehicle.mass == c.vehicle.mass);
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "omniteleop_test.cfg";
  {
    std::ofstream out(path);
    out << "translation_frequency = 3.0\n";
  }
  CHECK(load_config(path.string()).translation_frequency == 3.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), ConfigurationError);
}
