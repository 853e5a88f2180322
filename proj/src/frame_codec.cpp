#include "omniteleop/frame_codec.hpp"

#include <cmath>

namespace omniteleop {

namespace {

void put_u16(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v & 0xFF);
  out[1] = static_cast<std::uint8_t>(v >> 8);
}

std::uint16_t get_u16(const std::uint8_t* in) {
  return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::int16_t to_fixed(double rad) {
  if (!std::isfinite(rad) || std::abs(rad) > kFrameRange) {
    throw FrameError(FrameErrorKind::kOutOfRange, "frame: angle outside fixed-point range");
  }
  return static_cast<std::int16_t>(std::lround(rad * kFrameScale));
}

double from_fixed(std::uint16_t raw) { return static_cast<std::int16_t>(raw) / kFrameScale; }

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

double quantize_angle(double rad) { return to_fixed(rad) / kFrameScale; }

FrameBytes encode_frame(const Vec2& attitude, const Vec4& axes, std::uint16_t sequence) {
  FrameBytes out{};
  put_u16(&out[0], kFrameHeader);
  for (int i = 0; i < 2; ++i) put_u16(&out[2 + 2 * i], static_cast<std::uint16_t>(to_fixed(attitude[i])));
  for (int i = 0; i < 4; ++i) put_u16(&out[6 + 2 * i], static_cast<std::uint16_t>(to_fixed(axes[i])));
  put_u16(&out[14], sequence);
  put_u16(&out[16], crc16_ccitt_false(std::span(out).subspan(2, 14)));
  return out;
}

JoystickFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameSize) throw FrameError(FrameErrorKind::kShortFrame, "frame: too short");
  if (get_u16(&bytes[0]) != kFrameHeader) throw FrameError(FrameErrorKind::kBadHeader, "frame: bad header");
  if (get_u16(&bytes[16]) != crc16_ccitt_false(bytes.subspan(2, 14))) {
    throw FrameError(FrameErrorKind::kBadCrc, "frame: CRC mismatch");
  }
  JoystickFrame f;
  for (int i = 0; i < 2; ++i) f.attitude[i] = from_fixed(get_u16(&bytes[2 + 2 * i]));
  for (int i = 0; i < 4; ++i) f.axes[i] = from_fixed(get_u16(&bytes[6 + 2 * i]));
  f.sequence = get_u16(&bytes[14]);
  return f;
}

void FrameStreamParser::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<JoystickFrame> FrameStreamParser::next() {
  while (buffer_.size() >= kFrameSize) {
    if (buffer_[0] != (kFrameHeader & 0xFF) || buffer_[1] != (kFrameHeader >> 8)) {
      buffer_.erase(buffer_.begin());
      continue;
    }
    try {
      JoystickFrame f = decode_frame(std::span(buffer_).first(kFrameSize));
      buffer_.erase(buffer_.begin(), buffer_.begin() + kFrameSize);
      return f;
    } catch (const FrameError&) {
      ++rejected_;
      buffer_.erase(buffer_.begin());
    }
  }
  return std::nullopt;
}

}  // namespace omniteleop
