#include "omniteleop/envelope.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace omniteleop {

namespace {

constexpr double kSearchUpper = 1000.0;
constexpr int kBisectionSteps = 80;

Vec6 embed(const Vec3& dir, bool torque) {
  Vec6 w = Vec6::Zero();
  if (torque) {
    w.tail<3>() = dir;
  } else {
    w.head<3>() = dir;
  }
  return w;
}

double peak_thrust(const RotorComponents& x) {
  double peak = 0.0;
  for (int i = 0; i < kNumRotors; ++i) peak = std::max(peak, std::hypot(x[2 * i], x[2 * i + 1]));
  return peak;
}

EnvelopePoint evaluate(const Allocator& allocator, const Vec3& dir, bool torque) {
  const Vec6 w = embed(dir, torque);
  return {dir, max_feasible_magnitude(allocator, w), allocation_efficiency(allocator, w, torque)};
}

void summarize(EnvelopeResult& r, const Allocator& allocator) {
  for (const auto& p : r.force) {
    r.eta_f_min = std::min(r.eta_f_min, p.efficiency);
    r.eta_f_max = std::max(r.eta_f_max, p.efficiency);
  }
  for (const auto& p : r.torque) {
    r.eta_m_min = std::min(r.eta_m_min, p.efficiency);
    r.eta_m_max = std::max(r.eta_m_max, p.efficiency);
  }
  for (int k = 0; k < 3; ++k) {
    r.force_axis_max[k] = max_feasible_magnitude(allocator, embed(Vec3::Unit(k), false));
    r.torque_axis_max[k] = max_feasible_magnitude(allocator, embed(Vec3::Unit(k), true));
  }
}

void check_resolution(int resolution) {
  if (resolution < 10) throw std::invalid_argument("envelope: resolution must be at least 10");
}

}  // namespace

std::vector<Vec3> sample_directions(int resolution) {
  check_resolution(resolution);
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(resolution * resolution + 6));
  for (int i = 0; i < resolution; ++i) {
    const double polar = std::numbers::pi * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double azimuth = 2.0 * std::numbers::pi * j / resolution;
      dirs.emplace_back(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                        std::cos(polar));
    }
  }
  for (int k = 0; k < 3; ++k) {
    dirs.push_back(Vec3::Unit(k));
    dirs.push_back(-Vec3::Unit(k));
  }
  return dirs;
}

double max_feasible_magnitude(const Allocator& allocator, const Vec6& direction) {
  const double limit = allocator.params().vehicle.max_rotor_thrust();
  const RotorComponents unit = allocator.mixer() * direction;
  double lo = 0.0;
  double hi = kSearchUpper;
  if (peak_thrust(hi * unit) <= limit) return hi;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (peak_thrust(mid * unit) <= limit) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double allocation_efficiency(const Allocator& allocator, const Vec6& direction, bool torque) {
  const RotorComponents x = allocator.mixer() * direction;
  double effort = 0.0;
  for (int i = 0; i < kNumRotors; ++i) effort += std::hypot(x[2 * i], x[2 * i + 1]);
  if (effort <= 0.0) return 0.0;
  const Vec6 produced = allocator.physical_matrix() * x;
  const double output = torque ? produced.tail<3>().norm() : produced.head<3>().norm();
  const double lever = torque ? allocator.params().vehicle.arm_length : 1.0;
  return std::min(1.0, output / (effort * lever));
}

EnvelopeResult compute_envelope_serial(const AllocationParams& ap, int resolution) {
  const Allocator allocator(ap);
  const std::vector<Vec3> dirs = sample_directions(resolution);
  EnvelopeResult r;
  r.force.reserve(dirs.size());
  r.torque.reserve(dirs.size());
  for (const Vec3& d : dirs) {
    r.force.push_back(evaluate(allocator, d, false));
    r.torque.push_back(evaluate(allocator, d, true));
  }
  summarize(r, allocator);
  return r;
}

EnvelopeResult compute_envelope(const AllocationParams& ap, int resolution) {
  const Allocator allocator(ap);
  const std::vector<Vec3> dirs = sample_directions(resolution);
  const auto n = static_cast<std::ptrdiff_t>(dirs.size());
  EnvelopeResult r;
  r.force.resize(dirs.size());
  r.torque.resize(dirs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    r.force[i] = evaluate(allocator, dirs[i], false);
    r.torque[i] = evaluate(allocator, dirs[i], true);
  }
  summarize(r, allocator);
  return r;
}

namespace {

void write_points(const std::vector<EnvelopePoint>& points, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "dir_x,dir_y,dir_z,magnitude,eta\n";
  char line[160];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.direction.x(),
                  p.direction.y(), p.direction.z(), p.magnitude, p.efficiency);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

}  // namespace

void write_envelope_csv(const EnvelopeResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_points(result.force, dir / "force_envelope.csv");
  write_points(result.torque, dir / "torque_envelope.csv");
}

std::vector<EnvelopePoint> read_envelope_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  std::vector<EnvelopePoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    double v[5];
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("malformed envelope row: " + line);
      x = std::stod(cell);
    }
    points.push_back({Vec3(v[0], v[1], v[2]), v[3], v[4]});
  }
  return points;
}

}  // namespace omniteleop
