#pragma once

#include <map>
#include <string>
#include <vector>

#include "bipgo/graph.hpp"
#include "bipgo/simulation.hpp"

namespace bipgo {

// All formats are line-oriented decimal text with '#' comments; numbers are
// written with 17 significant digits so files round-trip exactly.

// Edge file: one edge per line,
// cam marker time r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz kappa tau
std::vector<EdgeMeasurement> read_edges(const std::string& path);
void write_edges(const std::string& path, const std::vector<EdgeMeasurement>& edges,
                 const std::vector<std::string>& header_comments = {});

// Object model file: one marker per line, reference marker first with identity
// values: marker r00..r22 tx ty tz
ObjectModel read_object(const std::string& path);
void write_object(const std::string& path, const ObjectModel& model);

// Pose file: `cam <id> r00..r22 tx ty tz` lines followed by `obj <time> ...`
// lines. `# meta <key> <value>` comments carry solver statistics.
struct PoseFile {
  std::vector<std::pair<NodeId, Pose>> cameras;
  std::vector<std::pair<NodeId, Pose>> objects;
  std::map<std::string, std::string> meta;
};
PoseFile read_poses(const std::string& path);
void write_poses(const std::string& path, const PoseFile& poses);

// key = value scene configuration; unknown keys and malformed values raise
// BadConfig with the offending line.
SceneConfig read_scene_config(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace bipgo
