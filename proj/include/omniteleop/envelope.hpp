#pragma once

#include <filesystem>
#include <vector>

#include "omniteleop/allocation.hpp"

namespace omniteleop {

struct EnvelopePoint {
  Vec3 direction = Vec3::Zero();  // unit
  double magnitude = 0.0;         // N for forces, N m for torques
  double efficiency = 0.0;        // eta_f or eta_m in [0, 1]
};

struct EnvelopeResult {
  std::vector<EnvelopePoint> force;   // pure forces, zero torque
  std::vector<EnvelopePoint> torque;  // pure torques, zero force
  Vec3 force_axis_max = Vec3::Zero();   // along +x_B, +y_B, +z_B
  Vec3 torque_axis_max = Vec3::Zero();
  double eta_f_min = 1.0, eta_f_max = 0.0;
  double eta_m_min = 1.0, eta_m_max = 0.0;
};

/// resolution x resolution polar/azimuth grid followed by the six signed body axes.
std::vector<Vec3> sample_directions(int resolution);

/// Largest s such that allocating s * direction keeps every rotor below its thrust limit.
/// Bisection on the feasibility predicate; direction is a unit 6-vector.
double max_feasible_magnitude(const Allocator& allocator, const Vec6& direction);

/// Efficiency of the unsaturated allocation along a direction:
///   eta_f = ||F|| / sum_i f_i            (force directions)
///   eta_m = ||tau|| / (l * sum_i f_i)    (torque directions)
/// Both equal one when no rotor thrust is cancelled internally.
double allocation_efficiency(const Allocator& allocator, const Vec6& direction, bool torque);

/// OpenMP kernel over all sampled directions. Throws std::invalid_argument when resolution < 10.
EnvelopeResult compute_envelope(const AllocationParams& ap, int resolution);

/// Serial reference kept for testing and benchmarking the parallel kernel.
EnvelopeResult compute_envelope_serial(const AllocationParams& ap, int resolution);

/// Writes <dir>/force_envelope.csv and <dir>/torque_envelope.csv
/// (columns dir_x, dir_y, dir_z, magnitude, eta). Throws std::runtime_error on I/O failure.
void write_envelope_csv(const EnvelopeResult& result, const std::filesystem::path& dir);

std::vector<EnvelopePoint> read_envelope_csv(const std::filesystem::path& file);

}  // namespace omniteleop
