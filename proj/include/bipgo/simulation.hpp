#pragma once

#include <string>
#include <vector>

#include "bipgo/graph.hpp"

namespace bipgo {

struct VisibilityModel {
  double max_range = 4.0;          // meters, camera center to marker center
  double max_view_angle_deg = 70;  // between the marker normal and the ray to the camera
  double dropout_prob = 0.0;
};

// Distance attenuation kappa(d) = kappa_base / (1 + (d/d0)^p); d0 <= 0
// disables attenuation. tau follows the same rule.
struct NoiseModel {
  double kappa_base = kNoiselessKappa;
  double tau_base = kNoiselessTau;
  double atten_d0 = 0.0;
  double atten_p = 2.0;
};

struct SceneConfig {
  std::string name = "custom";
  int num_cameras = 25;
  int num_times = 50;
  Vec3 room = Vec3(9.0, 8.0, 3.0);  // meters
  double camera_jitter_deg = 10.0;
  VisibilityModel visibility;
  NoiseModel noise;
  std::string object_source = "cube";  // "cube" or an object file path
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::vector<Pose> cam_poses;     // ordered as graph.cameras
  std::vector<Pose> object_poses;  // reference-marker pose per time step
};

struct Scene {
  GroundTruth truth;
  MeasurementGraph graph;
};

inline constexpr double kCubeSide = 0.575;        // meters
inline constexpr double kCubeMarkerSide = 0.276;  // meters

// 24-marker rig: four markers per face of a cube, frames aligned with the
// outward face normal, marker 1 as the identity reference.
ObjectModel builtin_cube();

// Ceiling camera grid with jittered downward orientations, object poses
// sampled uniformly inside the room, edges emitted under the visibility model
// with Langevin/Gaussian noise. Deterministic for a given config.
Scene generate_scene(const SceneConfig& cfg);

// Named Table-style presets: SmallRoom50/500/5K and LargeShop500/5K/10K.
SceneConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct CalibrationViews {
  std::vector<EdgeMeasurement> edges;   // single camera (id 0), one time per view
  std::vector<Pose> camera_poses;       // per view
};

// A single camera orbiting a static rig: poses sampled on a sphere around the
// rig, looking at its center, with per-view edges to the visible markers.
CalibrationViews generate_calibration_views(const ObjectModel& object, int num_views,
                                            const NoiseModel& noise, std::uint64_t seed);

}  // namespace bipgo
