#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "omniteleop/config.hpp"
#include "omniteleop/telemetry.hpp"

namespace omniteleop::live {

// Wire format: 4-byte big-endian payload length, then a UTF-8 JSON object with a "type" field.
inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 64 * 1024;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Hello {
  int version = kProtocolVersion;
};
struct StickFrame {
  std::uint32_t sequence = 0;
  Vec2 attitude = Vec2::Zero();  // rad, quantized like the serial frame
  Vec4 axes = Vec4::Zero();
};
struct Heartbeat {};

using Inbound = std::variant<Hello, StickFrame, Heartbeat>;

/// Adds the length prefix.
std::string frame_message(const std::string& payload);

/// Parses one client payload. Throws ProtocolError with a human-readable reason.
Inbound parse_inbound(const std::string& payload);

std::string hello_payload();
std::string stick_frame_payload(const StickFrame& f);
std::string heartbeat_payload();
std::string telemetry_payload(const TelemetryRecord& r);
std::string feedback_payload(double t, const Vec4& torque);
std::string error_payload(const std::string& reason);

/// Reassembles length-prefixed payloads from an arbitrary byte stream.
class MessageReader {
 public:
  void feed(const char* data, std::size_t n);
  /// Next complete payload. Throws ProtocolError when the announced length exceeds the limit.
  std::optional<std::string> next();

 private:
  std::string buffer_;
};

/// Loopback TCP server. A network thread accepts cockpit clients, answers hello and
/// malformed messages directly, and queues valid stick frames and heartbeats for the
/// simulation thread.
class LiveServer {
 public:
  explicit LiveServer(std::uint16_t port = 0);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::size_t client_count() const { return clients_.load(); }

  std::vector<Inbound> drain();
  void broadcast(const std::string& payload);
  void stop();

 private:
  void run();

  int listen_fd_ = -1;
  int wake_[2] = {-1, -1};
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> clients_{0};
  std::mutex mutex_;
  std::vector<Inbound> inbound_;
  std::vector<std::string> outbound_;
  std::thread thread_;
};

struct ServeOptions {
  std::uint16_t port = 0;
  double max_duration = std::numeric_limits<double>::infinity();  // simulated seconds
  std::function<void(std::uint16_t)> on_listening;
  std::atomic<bool>* stop = nullptr;
};

struct ServeSummary {
  double simulated_seconds = 0.0;
  std::size_t frames_received = 0;
  bool diverged = false;
  std::string diagnostic;
};

/// Live session: cockpit frames drive the sticks, telemetry and feedback stream back at
/// the telemetry rate. Without fresh input for the heartbeat timeout the sticks recenter.
ServeSummary serve_cockpit(const SystemConfig& cfg, const ServeOptions& opt);

}  // namespace omniteleop::live
