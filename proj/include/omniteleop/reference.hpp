#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "omniteleop/so3.hpp"

namespace omniteleop {

enum class PresetSlot { k1L = 0, k1R, k1C, k2L, k2R, k2C };

/// Selection matrices mapping stick (L, R) and joystick-body (C) attitudes to the
/// normalized translational (1) and rotational (2) rate commands.
struct ModePreset {
  std::string name;
  std::array<Mat3, 6> selection{Mat3::Zero(), Mat3::Zero(), Mat3::Zero(),
                                Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  // Allow one reference axis to be driven by more than one input axis.
  bool allow_shared_outputs = false;

  Mat3& matrix(PresetSlot slot) { return selection[static_cast<int>(slot)]; }
  const Mat3& matrix(PresetSlot slot) const { return selection[static_cast<int>(slot)]; }

  int nonzero_count() const;
  /// Throws std::invalid_argument when a reference axis has several sources and
  /// allow_shared_outputs is false.
  void validate() const;
};

/// Original mode-2 sparsity: both stick contributions land on v_z, v_x/v_y are unreachable.
ModePreset preset_paper_mode2();

/// Mode 2 with every vehicle axis reachable: right stick y/x -> v_x/v_y, left stick
/// y -> v_z, left stick x -> w_z, joystick body x/y -> w_x/w_y.
ModePreset preset_corrected_mode2();

/// "paper-mode2" | "corrected-mode2" | path to a preset file.
ModePreset load_preset(const std::string& name_or_path);

/// Key-value preset format:
///   name = corrected-mode2
///   allow_shared_outputs = false
///   entry = P1R 1 2        (matrix, 1-based row, 1-based col[, value])
ModePreset parse_preset(const std::string& text);
std::string format_preset(const ModePreset& preset);

struct ReferenceLimits {
  double v_max = 1.0;      // m/s
  double omega_max = 1.0;  // rad/s

  void validate() const;
};

struct ReferenceState {
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

struct RateCommand {
  Vec3 translational = Vec3::Zero();  // v1, each axis in [-1, 1]
  Vec3 rotational = Vec3::Zero();     // omega2, each axis in [-1, 1]
};

/// v1 = P1L Q(R_L) + P1R Q(R_R) + P1C Q(R_C), omega2 likewise; clipped to [-1, 1] per axis.
RateCommand stick_to_rates(const Rotation& left, const Rotation& right, const Rotation& body,
                           const ModePreset& preset, so3::QVariant variant = so3::QVariant::kSinAxis);

/// v_ref = v_max/2 v1 (trapezoidal position), w_ref = w_max/2 w2 (exponential map attitude).
ReferenceState integrate_reference(const ReferenceState& rs, const RateCommand& cmd,
                                   const ReferenceLimits& lim, double dt);

}  // namespace omniteleop
