#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "omniteleop/so3.hpp"

namespace omniteleop {

/// 18-byte little-endian joystick frame:
///   [0..1]   header 0xAA55
///   [2..5]   joystick body attitude about x_C, y_C  (int16, rad * 10000)
///   [6..13]  stick axes left x, left y, right x, right y (int16, rad * 10000)
///   [14..15] sequence counter (uint16)
///   [16..17] CRC-16/CCITT-FALSE over bytes [2..15]
inline constexpr std::size_t kFrameSize = 18;
inline constexpr std::uint16_t kFrameHeader = 0xAA55;
inline constexpr double kFrameScale = 10000.0;
inline constexpr double kFrameRange = 32767.0 / kFrameScale;

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

enum class FrameErrorKind { kShortFrame, kBadHeader, kBadCrc, kOutOfRange };

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

struct JoystickFrame {
  Vec2 attitude = Vec2::Zero();  // rad
  Vec4 axes = Vec4::Zero();      // rad
  std::uint16_t sequence = 0;
};

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

/// Throws FrameError(kOutOfRange) when an angle exceeds +-3.2767 rad.
FrameBytes encode_frame(const Vec2& attitude, const Vec4& axes, std::uint16_t sequence);

/// Throws FrameError with a distinct kind for short frames, header and CRC violations.
JoystickFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Quantization applied by the codec, for callers that need encode/decode equivalence.
double quantize_angle(double rad);

/// Resynchronizing parser for a byte stream carrying consecutive frames.
class FrameStreamParser {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<JoystickFrame> next();
  std::size_t rejected() const { return rejected_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t rejected_ = 0;
};

}  // namespace omniteleop
