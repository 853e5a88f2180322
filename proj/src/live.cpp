#include "omniteleop/live.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>

#include "json.hpp"
#include "omniteleop/frame_codec.hpp"
#include "omniteleop/session.hpp"

namespace omniteleop::live {

using nlohmann::json;

namespace {

constexpr double kAngleRange = 3.2767;          // rad, same range as the serial frame
constexpr std::size_t kMaxPendingBytes = 1 << 20;  // slow clients beyond this are dropped

json vec_json(const auto& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> read_angles(const json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != static_cast<std::size_t>(N)) {
    throw ProtocolError(std::string("field '") + key + "' must be an array of " + std::to_string(N) +
                        " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!a[i].is_number()) throw ProtocolError(std::string("field '") + key + "' must hold numbers");
    const double x = a[i].get<double>();
    if (!std::isfinite(x) || std::abs(x) > kAngleRange) {
      throw ProtocolError(std::string("field '") + key + "' out of range");
    }
    out[i] = quantize_angle(x);
  }
  return out;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

}  // namespace

std::string frame_message(const std::string& payload) {
  if (payload.size() > kMaxMessageBytes) throw ProtocolError("message too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += payload;
  return out;
}

Inbound parse_inbound(const std::string& payload) {
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::parse_error&) {
    throw ProtocolError("payload is not valid JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ProtocolError("message must be an object with a string 'type'");
  }
  const std::string type = j["type"];
  if (type == "hello") {
    if (!j.contains("version") || !j["version"].is_number_integer()) {
      throw ProtocolError("hello requires an integer 'version'");
    }
    Hello h;
    h.version = j["version"].get<int>();
    if (h.version != kProtocolVersion) {
      throw ProtocolError("protocol version mismatch: server speaks " + std::to_string(kProtocolVersion));
    }
    return h;
  }
  if (type == "stick_frame") {
    StickFrame f;
    if (j.contains("seq")) {
      if (!j["seq"].is_number_unsigned()) throw ProtocolError("'seq' must be a non-negative integer");
      f.sequence = j["seq"].get<std::uint32_t>();
    }
    f.attitude = read_angles<2>(j, "attitude");
    f.axes = read_angles<4>(j, "axes");
    return f;
  }
  if (type == "heartbeat") return Heartbeat{};
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string hello_payload() {
  return json{{"type", "hello"}, {"version", kProtocolVersion}, {"telemetry_columns", telemetry_columns()}}
      .dump();
}

std::string stick_frame_payload(const StickFrame& f) {
  return json{{"type", "stick_frame"}, {"seq", f.sequence}, {"attitude", vec_json(f.attitude)},
              {"axes", vec_json(f.axes)}}
      .dump();
}

std::string heartbeat_payload() { return json{{"type", "heartbeat"}}.dump(); }

std::string telemetry_payload(const TelemetryRecord& r) {
  return json{{"type", "telemetry"}, {"values", flatten(r)}}.dump();
}

std::string feedback_payload(double t, const Vec4& torque) {
  return json{{"type", "feedback"}, {"t", t}, {"torque", vec_json(torque)}}.dump();
}

std::string error_payload(const std::string& reason) {
  return json{{"type", "error"}, {"message", reason}}.dump();
}

void MessageReader::feed(const char* data, std::size_t n) { buffer_.append(data, n); }

std::optional<std::string> MessageReader::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
  const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (n > kMaxMessageBytes) throw ProtocolError("announced message length exceeds limit");
  if (buffer_.size() < 4 + n) return std::nullopt;
  std::string payload = buffer_.substr(4, n);
  buffer_.erase(0, 4 + n);
  return payload;
}

LiveServer::LiveServer(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 8) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_nonblocking(listen_fd_);
  if (::pipe(wake_) < 0) {
    ::close(listen_fd_);
    throw std::runtime_error("pipe failed");
  }
  set_nonblocking(wake_[0]);
  set_nonblocking(wake_[1]);
  thread_ = std::thread([this] { run(); });
}

LiveServer::~LiveServer() {
  stop();
  ::close(listen_fd_);
  ::close(wake_[0]);
  ::close(wake_[1]);
}

void LiveServer::stop() {
  if (stopping_.exchange(true)) return;
  const char c = 'q';
  [[maybe_unused]] auto n = ::write(wake_[1], &c, 1);
  if (thread_.joinable()) thread_.join();
}

std::vector<Inbound> LiveServer::drain() {
  std::lock_guard lock(mutex_);
  std::vector<Inbound> out;
  out.swap(inbound_);
  return out;
}

void LiveServer::broadcast(const std::string& payload) {
  {
    std::lock_guard lock(mutex_);
    outbound_.push_back(frame_message(payload));
  }
  const char c = 'w';
  [[maybe_unused]] auto n = ::write(wake_[1], &c, 1);
}

void LiveServer::run() {
  struct Client {
    MessageReader reader;
    std::string pending;
  };
  std::map<int, Client> clients;

  auto drop = [&](int fd) {
    ::close(fd);
    clients.erase(fd);
    clients_ = clients.size();
  };
  auto reply = [&](Client& c, const std::string& payload) { c.pending += frame_message(payload); };

  while (!stopping_) {
    std::vector<pollfd> fds;
    fds.push_back({wake_[0], POLLIN, 0});
    fds.push_back({listen_fd_, POLLIN, 0});
    for (auto& [fd, c] : clients) {
      fds.push_back({fd, static_cast<short>(POLLIN | (c.pending.empty() ? 0 : POLLOUT)), 0});
    }
    if (::poll(fds.data(), fds.size(), 200) < 0) {
      if (errno == EINTR) continue;
      break;
    }

    if (fds[0].revents & POLLIN) {
      char sink[256];
      while (::read(wake_[0], sink, sizeof(sink)) > 0) {
      }
      std::vector<std::string> out;
      {
        std::lock_guard lock(mutex_);
        out.swap(outbound_);
      }
      for (auto& [fd, c] : clients)
        for (const auto& m : out) c.pending += m;
    }

    if (fds[1].revents & POLLIN) {
      while (true) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        set_nonblocking(fd);
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        clients[fd].pending = frame_message(hello_payload());
        clients_ = clients.size();
      }
    }

    for (std::size_t k = 2; k < fds.size(); ++k) {
      const int fd = fds[k].fd;
      auto it = clients.find(fd);
      if (it == clients.end()) continue;
      Client& c = it->second;
      bool closed = (fds[k].revents & (POLLERR | POLLHUP | POLLNVAL)) != 0;

      if (!closed && (fds[k].revents & POLLIN)) {
        char buf[4096];
        const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) {
          closed = n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK);
        } else {
          c.reader.feed(buf, static_cast<std::size_t>(n));
          try {
            while (auto payload = c.reader.next()) {
              try {
                Inbound msg = parse_inbound(*payload);
                if (std::holds_alternative<Hello>(msg)) continue;
                std::lock_guard lock(mutex_);
                inbound_.push_back(std::move(msg));
              } catch (const ProtocolError& e) {
                reply(c, error_payload(e.what()));
              }
            }
          } catch (const ProtocolError& e) {
            // The stream cannot be resynchronized after a bad length prefix.
            reply(c, error_payload(e.what()));
            [[maybe_unused]] auto w = ::send(fd, c.pending.data(), c.pending.size(), MSG_NOSIGNAL);
            closed = true;
          }
        }
      }

      if (!closed && !c.pending.empty()) {
        const ssize_t n = ::send(fd, c.pending.data(), c.pending.size(), MSG_NOSIGNAL);
        if (n > 0) c.pending.erase(0, static_cast<std::size_t>(n));
        else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) closed = true;
        if (c.pending.size() > kMaxPendingBytes) closed = true;
      }
      if (closed) drop(fd);
    }
  }
  for (auto& [fd, c] : clients) ::close(fd);
  clients.clear();
  clients_ = 0;
}

ServeSummary serve_cockpit(const SystemConfig& cfg, const ServeOptions& opt) {
  LiveServer server(opt.port);
  if (opt.on_listening) opt.on_listening(server.port());

  Session session(cfg);
  session.enable_live_mode(true);
  session.set_record_telemetry(false);
  session.set_telemetry_sink([&](const TelemetryRecord& r) {
    server.broadcast(telemetry_payload(r));
    server.broadcast(feedback_payload(r.t, r.feedback));
  });

  ServeSummary summary;
  const int device_every = cfg.loop.physics_steps_per(cfg.loop.device_rate);
  const auto start = std::chrono::steady_clock::now();
  try {
    while (session.time() < opt.max_duration && !(opt.stop && opt.stop->load())) {
      if (session.physics_steps() % static_cast<std::uint64_t>(device_every) == 0) {
        for (const Inbound& msg : server.drain()) {
          if (const auto* f = std::get_if<StickFrame>(&msg)) {
            session.push_live_input({f->attitude, f->axes});
            ++summary.frames_received;
          } else if (std::holds_alternative<Heartbeat>(msg)) {
            session.note_heartbeat();
          }
        }
      }
      session.step();
      if (cfg.loop.realtime) {
        std::this_thread::sleep_until(start + std::chrono::duration<double>(session.time()));
      }
    }
  } catch (const SimulationDiverged& e) {
    summary.diverged = true;
    summary.diagnostic = e.what();
    server.broadcast(error_payload(std::string("session aborted: ") + e.what()));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  summary.simulated_seconds = session.time();
  server.stop();
  return summary;
}

}  // namespace omniteleop::live
