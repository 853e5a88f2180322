#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "omniteleop/experiments.hpp"

using namespace omniteleop;

TEST_CASE("mean absolute error") {
  CHECK_THROWS_AS(compute_mae({}), std::invalid_argument);
  const std::vector<double> constant(10, 0.5);
  CHECK(compute_mae(constant) == doctest::Approx(0.5));
  CHECK(compute_mae(constant, 0.5) == 0.0);
  const std::vector<double> mixed{-1.0, 1.0, -3.0, 3.0};
  CHECK(compute_mae(mixed) == doctest::Approx(2.0));

  // Rectified sine over whole periods: 2A/pi.
  std::vector<double> sine;
  const double a = 0.7;
  for (int i = 0; i < 4000; ++i) sine.push_back(a * std::sin(2.0 * std::numbers::pi * 0.5 * i * 1e-3));
  CHECK(compute_mae(sine) == doctest::Approx(2.0 * a / std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("mae matrix statistics ignore the diagonal") {
  MaeMatrix m;
  for (int c = 0; c < 6; ++c)
    for (int a = 0; a < 6; ++a)
      if (a != c) m.values(c, a) = 0.01 * (6 * c + a);
  CHECK(m.off_diagonal().size() == 30);
  CHECK(m.max_off_diagonal() == doctest::Approx(0.01 * 34));
  std::vector<double> v = m.off_diagonal();
  std::sort(v.begin(), v.end());
  CHECK(m.median_off_diagonal() == doctest::Approx(0.5 * (v[14] + v[15])));
}

TEST_CASE("decoupling scenario drives only its input") {
  SystemConfig cfg;
  DecouplingOptions opt;
  opt.hand_crosstalk = 0.0;
  const ScenarioScript yaw = decoupling_scenario(5, cfg, opt);
  REQUIRE(yaw.stick_angles);
  const Vec4 a = yaw.stick_angles(1.0);
  CHECK(a[0] != 0.0);
  CHECK(a.tail<3>().isZero());
  CHECK_THROWS_AS(decoupling_scenario(6, cfg, opt), std::out_of_range);
}

TEST_CASE("null input keeps every reference rate at zero") {
  SystemConfig cfg;
  DecouplingOptions opt;
  opt.duration = 5.0;
  opt.null_input = true;
  const MaeMatrix m = run_decoupling_experiment(cfg, opt);
  CHECK(m.max_off_diagonal() <= 1e-3);
  CHECK(m.commanded.maxCoeff() <= 1e-3);
}

TEST_CASE("a commanded axis dominates its cross terms") {
  SystemConfig cfg;
  DecouplingOptions opt;
  opt.duration = 10.0;
  const MaeMatrix m = run_decoupling_experiment(cfg, opt);
  for (int c = 0; c < 6; ++c) {
    CAPTURE(c);
    CHECK(m.commanded[c] > 0.02);
    for (int a = 0; a < 6; ++a) {
      if (a != c) CHECK(m.commanded[c] >= 10.0 * m.values(c, a));
    }
  }
}

TEST_CASE("envelope export writes readable files") {
  const auto dir = std::filesystem::temp_directory_path() / "omniteleop_envelope_test";
  std::filesystem::remove_all(dir);
  const EnvelopeResult r = export_envelope(SystemConfig{}, 20, dir);
  CHECK(r.force.size() >= 400);
  CHECK(r.torque.size() >= 400);
  const auto force = read_envelope_csv(dir / "force_envelope.csv");
  const auto torque = read_envelope_csv(dir / "torque_envelope.csv");
  REQUIRE(force.size() == r.force.size());
  REQUIRE(torque.size() == r.torque.size());
  for (std::size_t i = 0; i < r.force.size(); ++i) {
    CHECK(force[i].direction == r.force[i].direction);
    CHECK(force[i].magnitude == r.force[i].magnitude);
    CHECK(force[i].efficiency == r.force[i].efficiency);
  }
  for (std::size_t i = 0; i < r.torque.size(); ++i) CHECK(torque[i].magnitude == r.torque[i].magnitude);
  std::filesystem::remove_all(dir);
}

TEST_CASE("wall push holds contact and the feedback resists the push") {
  const WallPushSummary w = run_wallpush_experiment(SystemConfig{});
  REQUIRE(w.ok());
  CHECK(w.contact_time == doctest::Approx(12.0));
  CHECK(w.longest_gap == 0.0);
  CHECK(w.mean_tilt_rotor1 > 0.0);
  CHECK(w.steady_push_deflection != 0.0);
  CHECK(w.steady_push_feedback * w.steady_push_deflection < 0.0);
  CHECK(w.steady_contact_force == doctest::Approx(w.commanded_push_force).epsilon(0.2));

  WallPushOptions bad;
  bad.steady_window = 20.0;
  CHECK_THROWS_AS(run_wallpush_experiment(SystemConfig{}, bad), std::invalid_argument);
}

TEST_CASE("without a push the vehicle never reaches the wall") {
  WallPushOptions opt;
  opt.muscle_torque = 0.0;
  opt.approach_timeout = 3.0;
  const WallPushSummary w = run_wallpush_experiment(SystemConfig{}, opt);
  CHECK(w.status == WallPushSummary::Status::kNoContact);
  CHECK_FALSE(w.diagnostic.empty());
}
