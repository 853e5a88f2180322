#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "omniteleop/reference.hpp"

using namespace omniteleop;
using std::numbers::pi;

namespace {

const Rotation I = Rotation::Identity();

// Input axis k: 0..3 stick axes (left x, left y, right x, right y), 4..5 body x, y.
RateCommand deflect(const ModePreset& p, int k, double theta) {
  Vec4 sticks = Vec4::Zero();
  Vec2 body = Vec2::Zero();
  if (k < 4) sticks[k] = theta;
  else body[k - 4] = theta;
  const Rotation left = so3::rot_x(sticks[0]) * so3::rot_y(sticks[1]);
  const Rotation right = so3::rot_x(sticks[2]) * so3::rot_y(sticks[3]);
  const Rotation c = so3::rot_x(body[0]) * so3::rot_y(body[1]);
  return stick_to_rates(left, right, c, p);
}

Vec6 stacked(const RateCommand& c) {
  Vec6 v;
  v << c.translational, c.rotational;
  return v;
}

}  // namespace

TEST_CASE("centered inputs give zero rates") {
  for (const auto& p : {preset_paper_mode2(), preset_corrected_mode2()}) {
    const RateCommand c = stick_to_rates(I, I, I, p);
    CHECK(stacked(c).isZero(0.0));
  }
}

TEST_CASE("literal mode-2 sparsity") {
  const ModePreset p = preset_paper_mode2();
  CHECK(p.nonzero_count() == 6);
  CHECK(p.matrix(PresetSlot::k1L)(2, 1) == 1.0);
  CHECK(p.matrix(PresetSlot::k1R)(2, 0) == 1.0);
  CHECK(p.matrix(PresetSlot::k2L)(0, 1) == 1.0);
  CHECK(p.matrix(PresetSlot::k2L)(1, 0) == 1.0);
  CHECK(p.matrix(PresetSlot::k2C)(0, 1) == 1.0);
  CHECK(p.matrix(PresetSlot::k2C)(1, 0) == 1.0);
  CHECK(p.matrix(PresetSlot::k1C).isZero(0.0));
  CHECK(p.matrix(PresetSlot::k2R).isZero(0.0));

  const double theta = 0.25;
  const RateCommand c = stick_to_rates(I, so3::rot_x(theta), I, p);
  CHECK((c.translational - Vec3(0, 0, std::sin(theta))).norm() < 1e-15);
  CHECK(c.rotational.isZero(0.0));
}

TEST_CASE("corrected mode-2 reaches every axis from exactly one input") {
  const ModePreset p = preset_corrected_mode2();
  CHECK(p.nonzero_count() == 6);
  CHECK_NOTHROW(p.validate());

  const double theta = 0.3;
  const RateCommand vx = stick_to_rates(I, so3::rot_y(theta), I, p);
  CHECK((vx.translational - Vec3(std::sin(theta), 0, 0)).norm() < 1e-15);

  // input -> expected reference axis: left x -> yaw, left y -> v_z, right x -> v_y,
  // right y -> v_x, body x -> roll rate, body y -> pitch rate.
  const int expected[6] = {5, 2, 1, 0, 3, 4};
  Eigen::Matrix<int, 6, 1> coverage = Eigen::Matrix<int, 6, 1>::Zero();
  for (int k = 0; k < 6; ++k) {
    const Vec6 r = stacked(deflect(p, k, theta));
    for (int j = 0; j < 6; ++j) {
      if (j == expected[k]) CHECK(r[j] == doctest::Approx(std::sin(theta)).epsilon(1e-12));
      else CHECK(r[j] == 0.0);
    }
    coverage[expected[k]] += 1;
  }
  CHECK(coverage == Eigen::Matrix<int, 6, 1>::Ones());
}

TEST_CASE("single-input deflection produces a single nonzero reference axis") {
  const ModePreset p = preset_corrected_mode2();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int i = 0; i < 200; ++i) {
    const Vec6 r = stacked(deflect(p, i % 6, u(rng)));
    CHECK((r.array() != 0.0).count() <= 1);
  }
}

TEST_CASE("rates are clipped to the unit box") {
  ModePreset p;
  p.name = "gain";
  p.matrix(PresetSlot::k1R)(0, 1) = 5.0;
  const RateCommand c = stick_to_rates(I, so3::rot_y(0.4), I, p);
  CHECK(c.translational[0] == 1.0);
}

TEST_CASE("normalized stick map is bang-bang") {
  const ModePreset p = preset_corrected_mode2();
  const RateCommand c = stick_to_rates(I, so3::rot_y(0.01), I, p, so3::QVariant::kPaperNormalized);
  CHECK(c.translational[0] == doctest::Approx(1.0));
}

TEST_CASE("reference integration") {
  const ReferenceLimits lim;
  ReferenceState rs;
  rs.position = Vec3(1, 2, 3);
  rs.rotation = so3::rot_y(0.2);
  const ReferenceState frozen = integrate_reference(rs, RateCommand{}, lim, 0.002);
  CHECK(frozen.position == rs.position);
  CHECK((frozen.rotation - rs.rotation).norm() < 1e-15);

  RateCommand up;
  up.translational = Vec3(0, 0, 1);
  ReferenceState r;
  r.velocity = Vec3(0, 0, 0.5);  // already moving, so the trapezoid carries no start-up half step
  for (int i = 0; i < 1000; ++i) r = integrate_reference(r, up, lim, 0.002);
  CHECK((r.position - Vec3(0, 0, 1.0)).norm() < 1e-12);
  CHECK(r.velocity[2] == 0.5);

  RateCommand spin;
  spin.rotational = Vec3(0, 0, 1);
  ReferenceState y;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) y = integrate_reference(y, spin, lim, 4.0 * pi / steps);
  CHECK((y.rotation - Rotation::Identity()).norm() < 1e-9);
  CHECK_THROWS_AS(integrate_reference(y, spin, lim, 0.0), std::invalid_argument);
}

TEST_CASE("references scale with the limits") {
  RateCommand c;
  c.translational = Vec3(0.3, -0.5, 1.0);
  c.rotational = Vec3(-0.2, 0.7, 0.1);
  ReferenceLimits a, b;
  b.v_max = 2.0 * a.v_max;
  const ReferenceState ra = integrate_reference({}, c, a, 0.002), rb = integrate_reference({}, c, b, 0.002);
  CHECK((rb.velocity - 2.0 * ra.velocity).norm() < 1e-15);
  CHECK(rb.angular_velocity == ra.angular_velocity);
  CHECK(ra.velocity.cwiseAbs().maxCoeff() <= a.v_max / 2);
  CHECK(ra.angular_velocity.cwiseAbs().maxCoeff() <= a.omega_max / 2);
}

TEST_CASE("reference position moves continuously") {
  const ReferenceLimits lim;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ReferenceState r;
  const double dt = 0.002;
  for (int i = 0; i < 2000; ++i) {
    RateCommand c;
    c.translational = Vec3(u(rng), u(rng), u(rng));
    const ReferenceState next = integrate_reference(r, c, lim, dt);
    CHECK((next.position - r.position).cwiseAbs().maxCoeff() <= lim.v_max / 2 * dt + 1e-15);
    r = next;
  }
}

TEST_CASE("preset files round trip and validate") {
  for (const auto& p : {preset_paper_mode2(), preset_corrected_mode2()}) {
    const ModePreset q = parse_preset(format_preset(p));
    CHECK(q.name == p.name);
    CHECK(q.allow_shared_outputs == p.allow_shared_outputs);
    for (int k = 0; k < 6; ++k) CHECK(q.selection[k] == p.selection[k]);
  }
  CHECK(load_preset("corrected-mode2").nonzero_count() == 6);
  CHECK_THROWS_AS(load_preset("no-such-preset"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("name = x\nentry = P1R 4 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("name = x\ncolour = blue\n"), std::invalid_argument);
  // Two inputs on one reference axis need the explicit flag.
  CHECK_THROWS_AS(parse_preset("name = x\nentry = P1R 3 1\nentry = P1L 3 2\n"), std::invalid_argument);
  CHECK_NOTHROW(parse_preset("name = x\nallow_shared_outputs = true\nentry = P1R 3 1\nentry = P1L 3 2\n"));
}
