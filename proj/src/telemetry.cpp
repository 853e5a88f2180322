#include "omniteleop/telemetry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omniteleop {

namespace {

void push(std::vector<std::string>& cols, const std::string& prefix, std::initializer_list<const char*> suffixes) {
  for (const char* s : suffixes) cols.push_back(prefix + s);
}

template <typename V>
void append(std::vector<double>& out, const V& v) {
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
}

template <typename V>
void take(const std::vector<double>& in, std::size_t& k, V& v) {
  for (int i = 0; i < v.size(); ++i) v[i] = in.at(k++);
}

}  // namespace

const std::vector<std::string>& telemetry_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    push(c, "p", {"x", "y", "z"});
    push(c, "v", {"x", "y", "z"});
    push(c, "", {"roll", "pitch", "yaw"});
    push(c, "w", {"x", "y", "z"});
    push(c, "pref_", {"x", "y", "z"});
    push(c, "vref_", {"x", "y", "z"});
    push(c, "ref_", {"roll", "pitch", "yaw"});
    push(c, "wref_", {"x", "y", "z"});
    push(c, "alpha", {"1", "2", "3", "4"});
    push(c, "rotor", {"1", "2", "3", "4"});
    push(c, "rotor_pct", {"1", "2", "3", "4"});
    push(c, "ext_", {"fx", "fy", "fz", "tx", "ty", "tz"});
    push(c, "stick_", {"lx", "ly", "rx", "ry"});
    push(c, "fb_", {"lx", "ly", "rx", "ry"});
    push(c, "contact_", {"x", "y", "z"});
    return c;
  }();
  return cols;
}

std::vector<double> flatten(const TelemetryRecord& r) {
  std::vector<double> out{r.t};
  out.reserve(telemetry_columns().size());
  append(out, r.position);
  append(out, r.velocity);
  append(out, r.euler);
  append(out, r.angular_velocity);
  append(out, r.ref_position);
  append(out, r.ref_velocity);
  append(out, r.ref_euler);
  append(out, r.ref_angular_velocity);
  append(out, r.tilt);
  append(out, r.rotor_speed);
  append(out, r.rotor_percent);
  append(out, r.external_estimate);
  append(out, r.stick_axes);
  append(out, r.feedback);
  append(out, r.contact_force);
  return out;
}

TelemetryRecord unflatten(const std::vector<double>& values) {
  if (values.size() != telemetry_columns().size()) {
    throw std::invalid_argument("telemetry row has " + std::to_string(values.size()) + " fields");
  }
  TelemetryRecord r;
  std::size_t k = 0;
  r.t = values[k++];
  take(values, k, r.position);
  take(values, k, r.velocity);
  take(values, k, r.euler);
  take(values, k, r.angular_velocity);
  take(values, k, r.ref_position);
  take(values, k, r.ref_velocity);
  take(values, k, r.ref_euler);
  take(values, k, r.ref_angular_velocity);
  take(values, k, r.tilt);
  take(values, k, r.rotor_speed);
  take(values, k, r.rotor_percent);
  take(values, k, r.external_estimate);
  take(values, k, r.stick_axes);
  take(values, k, r.feedback);
  take(values, k, r.contact_force);
  return r;
}

std::string telemetry_csv(const std::vector<TelemetryRecord>& records) {
  std::string out = "# omniteleop telemetry v1; SI units, angles in rad, world-frame velocity\n";
  const auto& cols = telemetry_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += cols[i];
    out += i + 1 < cols.size() ? ',' : '\n';
  }
  char cell[32];
  for (const auto& r : records) {
    const std::vector<double> row = flatten(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(cell, sizeof cell, "%.9g", row[i]);
      out += cell;
      out += i + 1 < row.size() ? ',' : '\n';
    }
  }
  return out;
}

void write_telemetry_csv(const std::vector<TelemetryRecord>& records, const std::filesystem::path& file) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << telemetry_csv(records);
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::vector<TelemetryRecord> read_telemetry_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  std::vector<TelemetryRecord> records;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> values;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    records.push_back(unflatten(values));
  }
  return records;
}

}  // namespace omniteleop
