#include "omniteleop/reference.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omniteleop {

namespace {

constexpr const char* kSlotNames[6] = {"P1L", "P1R", "P1C", "P2L", "P2R", "P2C"};

void set_one(ModePreset& p, PresetSlot slot, int row, int col, double value = 1.0) {
  p.matrix(slot)(row - 1, col - 1) = value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

int ModePreset::nonzero_count() const {
  int n = 0;
  for (const auto& m : selection) n += static_cast<int>((m.array() != 0.0).count());
  return n;
}

void ModePreset::validate() const {
  if (allow_shared_outputs) return;
  for (int group = 0; group < 2; ++group) {
    for (int row = 0; row < 3; ++row) {
      int sources = 0;
      for (int k = 0; k < 3; ++k) {
        sources += static_cast<int>((selection[3 * group + k].row(row).array() != 0.0).count());
      }
      if (sources > 1) {
        throw std::invalid_argument("preset '" + name + "': reference axis driven by several inputs");
      }
    }
  }
}

ModePreset preset_paper_mode2() {
  ModePreset p;
  p.name = "paper-mode2";
  p.allow_shared_outputs = true;
  set_one(p, PresetSlot::k1L, 3, 2);
  set_one(p, PresetSlot::k2L, 1, 2);
  set_one(p, PresetSlot::k2L, 2, 1);
  set_one(p, PresetSlot::k1R, 3, 1);
  set_one(p, PresetSlot::k2C, 1, 2);
  set_one(p, PresetSlot::k2C, 2, 1);
  return p;
}

ModePreset preset_corrected_mode2() {
  ModePreset p;
  p.name = "corrected-mode2";
  set_one(p, PresetSlot::k1R, 1, 2);
  set_one(p, PresetSlot::k1R, 2, 1);
  set_one(p, PresetSlot::k1L, 3, 2);
  set_one(p, PresetSlot::k2L, 3, 1);
  set_one(p, PresetSlot::k2C, 1, 1);
  set_one(p, PresetSlot::k2C, 2, 2);
  return p;
}

ModePreset parse_preset(const std::string& text) {
  ModePreset p;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("preset line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "name") {
      p.name = value;
    } else if (key == "allow_shared_outputs") {
      if (value != "true" && value != "false") {
        throw std::invalid_argument("preset line " + std::to_string(line_no) + ": expected true/false");
      }
      p.allow_shared_outputs = value == "true";
    } else if (key == "entry") {
      std::istringstream fields(value);
      std::string slot_name;
      int row = 0, col = 0;
      double v = 1.0;
      fields >> slot_name >> row >> col;
      if (!fields) throw std::invalid_argument("preset line " + std::to_string(line_no) + ": bad entry");
      if (!(fields >> v)) v = 1.0;
      int slot = -1;
      for (int k = 0; k < 6; ++k) {
        if (slot_name == kSlotNames[k]) slot = k;
      }
      if (slot < 0 || row < 1 || row > 3 || col < 1 || col > 3) {
        throw std::invalid_argument("preset line " + std::to_string(line_no) + ": bad entry");
      }
      p.selection[slot](row - 1, col - 1) = v;
    } else {
      throw std::invalid_argument("preset line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

std::string format_preset(const ModePreset& preset) {
  std::ostringstream out;
  out << "name = " << preset.name << "\n";
  out << "allow_shared_outputs = " << (preset.allow_shared_outputs ? "true" : "false") << "\n";
  for (int k = 0; k < 6; ++k) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const double v = preset.selection[k](r, c);
        if (v == 0.0) continue;
        out << "entry = " << kSlotNames[k] << ' ' << r + 1 << ' ' << c + 1;
        if (v != 1.0) out << ' ' << v;
        out << "\n";
      }
    }
  }
  return out.str();
}

ModePreset load_preset(const std::string& name_or_path) {
  if (name_or_path == "paper-mode2") return preset_paper_mode2();
  if (name_or_path == "corrected-mode2") return preset_corrected_mode2();
  std::ifstream in(name_or_path);
  if (!in) throw std::invalid_argument("unknown preset or unreadable file: " + name_or_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_preset(buf.str());
}

void ReferenceLimits::validate() const {
  if (!(v_max > 0.0) || !(omega_max > 0.0)) {
    throw std::invalid_argument("reference limits must be positive");
  }
}

RateCommand stick_to_rates(const Rotation& left, const Rotation& right, const Rotation& body,
                           const ModePreset& preset, so3::QVariant variant) {
  const Vec3 ql = so3::q_map(left, variant);
  const Vec3 qr = so3::q_map(right, variant);
  const Vec3 qc = so3::q_map(body, variant);
  RateCommand cmd;
  cmd.translational = preset.matrix(PresetSlot::k1L) * ql + preset.matrix(PresetSlot::k1R) * qr +
                      preset.matrix(PresetSlot::k1C) * qc;
  cmd.rotational = preset.matrix(PresetSlot::k2L) * ql + preset.matrix(PresetSlot::k2R) * qr +
                   preset.matrix(PresetSlot::k2C) * qc;
  cmd.translational = cmd.translational.cwiseMax(-1.0).cwiseMin(1.0);
  cmd.rotational = cmd.rotational.cwiseMax(-1.0).cwiseMin(1.0);
  return cmd;
}

ReferenceState integrate_reference(const ReferenceState& rs, const RateCommand& cmd,
                                   const ReferenceLimits& lim, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_reference: dt must be positive");
  ReferenceState next;
  next.velocity = 0.5 * lim.v_max * cmd.translational;
  next.angular_velocity = 0.5 * lim.omega_max * cmd.rotational;
  next.position = rs.position + 0.5 * dt * (rs.velocity + next.velocity);
  next.rotation = so3::integrate_rotation(rs.rotation, next.angular_velocity, dt);
  return next;
}

}  // namespace omniteleop
