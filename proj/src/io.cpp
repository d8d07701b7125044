#include "bipgo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bipgo/errors.hpp"

namespace bipgo {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_pose_fields(std::ostream& out, const Rotation& r, const Vec3& t) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out << ' ' << fmt(r(i, j));
  }
  for (int i = 0; i < 3; ++i) out << ' ' << fmt(t(i));
}

struct LineReader {
  explicit LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open " + path);
  }
  // Returns false at end of file; skips blanks and '#' comment lines unless
  // the caller wants them.
  bool next(std::string& line, bool skip_comments = true) {
    while (std::getline(in_, line)) {
      ++line_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (skip_comments && line[first] == '#') continue;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_, line_, what);
  }
  long line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  long line_ = 0;
};

bool parse_pose_fields(std::istringstream& s, Rotation& r, Vec3& t) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!(s >> r(i, j))) return false;
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!(s >> t(i))) return false;
  }
  return true;
}

}  // namespace

std::vector<EdgeMeasurement> read_edges(const std::string& path) {
  LineReader reader(path);
  std::vector<EdgeMeasurement> edges;
  std::string line;
  while (reader.next(line)) {
    std::istringstream s(line);
    EdgeMeasurement e;
    if (!(s >> e.cam >> e.marker >> e.time)) {
      reader.fail("expected 'cam marker time' ids");
    }
    if (!parse_pose_fields(s, e.r_meas, e.t_meas)) {
      reader.fail("expected 12 pose values");
    }
    if (!(s >> e.noise.kappa >> e.noise.tau)) {
      reader.fail("expected kappa and tau");
    }
    std::string extra;
    if (s >> extra) reader.fail("trailing fields");
    edges.push_back(std::move(e));
  }
  if (edges.empty()) throw ParseError(path, reader.line(), "no edges in file");
  return edges;
}

void write_edges(const std::string& path, const std::vector<EdgeMeasurement>& edges,
                 const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# cam marker time r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz kappa tau\n";
  for (const auto& c : header_comments) out << "# " << c << '\n';
  for (const auto& e : edges) {
    out << e.cam << ' ' << e.marker << ' ' << e.time;
    write_pose_fields(out, e.r_meas, e.t_meas);
    out << ' ' << fmt(e.noise.kappa) << ' ' << fmt(e.noise.tau) << '\n';
  }
}

ObjectModel read_object(const std::string& path) {
  LineReader reader(path);
  ObjectModel model;
  std::string line;
  while (reader.next(line)) {
    std::istringstream s(line);
    NodeId id;
    Pose p;
    if (!(s >> id) || !parse_pose_fields(s, p.r, p.t)) {
      reader.fail("expected 'marker r00..r22 tx ty tz'");
    }
    if (model.rel.count(id)) reader.fail("duplicate marker id");
    if (model.markers.empty()) {
      if ((p.r - Mat3::Identity()).norm() > 1e-6 || p.t.norm() > 1e-6) {
        reader.fail("reference marker (first line) must carry identity values");
      }
      p = identity_pose();
    }
    model.markers.push_back(id);
    model.rel[id] = p;
  }
  if (model.markers.empty()) throw ParseError(path, reader.line(), "no markers in file");
  return model;
}

void write_object(const std::string& path, const ObjectModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# marker r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz\n";
  for (NodeId id : model.markers) {
    const Pose& p = model.rel.at(id);
    out << id;
    write_pose_fields(out, p.r, p.t);
    out << '\n';
  }
}

PoseFile read_poses(const std::string& path) {
  LineReader reader(path);
  PoseFile poses;
  std::string line;
  while (reader.next(line, /*skip_comments=*/false)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (line[first] == '#') {
      std::istringstream s(line.substr(first + 1));
      std::string tag, key;
      if (s >> tag >> key && tag == "meta") {
        std::string value;
        std::getline(s, value);
        const auto start = value.find_first_not_of(" \t");
        poses.meta[key] = start == std::string::npos ? "" : value.substr(start);
      }
      continue;
    }
    std::istringstream s(line);
    std::string kind;
    NodeId id;
    Pose p;
    if (!(s >> kind >> id) || !parse_pose_fields(s, p.r, p.t)) {
      reader.fail("expected 'cam|obj <id> r00..r22 tx ty tz'");
    }
    if (kind == "cam") {
      poses.cameras.emplace_back(id, p);
    } else if (kind == "obj") {
      poses.objects.emplace_back(id, p);
    } else {
      reader.fail("unknown pose kind '" + kind + "'");
    }
  }
  if (poses.cameras.empty()) throw ParseError(path, reader.line(), "no camera poses");
  return poses;
}

void write_poses(const std::string& path, const PoseFile& poses) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# kind id r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz\n";
  for (const auto& [key, value] : poses.meta) {
    out << "# meta " << key << ' ' << value << '\n';
  }
  for (const auto& [id, p] : poses.cameras) {
    out << "cam " << id;
    write_pose_fields(out, p.r, p.t);
    out << '\n';
  }
  for (const auto& [id, p] : poses.objects) {
    out << "obj " << id;
    write_pose_fields(out, p.r, p.t);
    out << '\n';
  }
}

SceneConfig read_scene_config(const std::string& path) {
  LineReader reader(path);
  SceneConfig cfg;
  std::string line;
  auto fail = [&](const std::string& what) {
    throw BadConfig(path + ":" + std::to_string(reader.line()) + ": " + what);
  };
  while (reader.next(line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("empty key or value");
    try {
      if (key == "name") {
        cfg.name = value;
      } else if (key == "cameras") {
        cfg.num_cameras = std::stoi(value);
      } else if (key == "times") {
        cfg.num_times = std::stoi(value);
      } else if (key == "room_x") {
        cfg.room.x() = std::stod(value);
      } else if (key == "room_y") {
        cfg.room.y() = std::stod(value);
      } else if (key == "room_z") {
        cfg.room.z() = std::stod(value);
      } else if (key == "camera_jitter_deg") {
        cfg.camera_jitter_deg = std::stod(value);
      } else if (key == "max_range") {
        cfg.visibility.max_range = std::stod(value);
      } else if (key == "max_view_angle_deg") {
        cfg.visibility.max_view_angle_deg = std::stod(value);
      } else if (key == "dropout_prob") {
        cfg.visibility.dropout_prob = std::stod(value);
      } else if (key == "kappa_base") {
        cfg.noise.kappa_base = std::stod(value);
      } else if (key == "tau_base") {
        cfg.noise.tau_base = std::stod(value);
      } else if (key == "atten_d0") {
        cfg.noise.atten_d0 = std::stod(value);
      } else if (key == "atten_p") {
        cfg.noise.atten_p = std::stod(value);
      } else if (key == "object") {
        cfg.object_source = value;
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail("bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      fail("value out of range for '" + key + "'");
    }
  }
  return cfg;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

}  // namespace bipgo
