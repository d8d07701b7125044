#pragma once

#include <string>
#include <vector>

#include "bipgo/graph.hpp"

namespace bipgo {

// Gauge H minimizing the orbit distance between est and gt when applied on the
// right of every estimated pose: R_H from the SVD of sum_c R_gt^T R_est
// (det-corrected), t_H = mean of R_est^T (t_gt - t_est).
Pose align_gauge(const std::vector<Pose>& est, const std::vector<Pose>& gt);

struct CameraError {
  NodeId id;
  double dr_deg;
  double dt_m;
};

struct OrbitDistance {
  double avg_dr_deg = 0.0;
  double max_dr_deg = 0.0;
  double avg_dt_m = 0.0;
  double max_dt_m = 0.0;
  std::vector<CameraError> per_camera;
  Pose gauge;
};

// Aligns internally, then reports per-camera geodesic angles and Euclidean
// translation distances plus their mean/max aggregates.
OrbitDistance orbit_distance(const std::vector<Pose>& est, const std::vector<Pose>& gt,
                             const std::vector<NodeId>& ids = {});

// Negative log-likelihood of the measurements under the given poses, evaluated
// through the merged object parameterization; additive constants dropped.
// object_poses are the reference-marker poses, ordered like g.times.
double nll(const MeasurementGraph& g, const std::vector<Pose>& cam_poses,
           const std::vector<Pose>& object_poses);

struct ErrorReport {
  std::string dataset;
  Index num_cameras = 0;
  Index num_times = 0;
  Index num_edges = 0;
  double avg_dr = 0.0;  // degrees
  double max_dr = 0.0;
  double avg_dt = 0.0;  // meters
  double max_dt = 0.0;
  std::vector<CameraError> per_camera;
  int iterations = 0;
  double seconds_per_iteration = 0.0;
  bool certified = false;
};

ErrorReport render_report(const std::string& dataset, const std::vector<NodeId>& cam_ids,
                          const std::vector<Pose>& est, const std::vector<Pose>& gt,
                          Index num_times, Index num_edges, int iterations,
                          double seconds_per_iteration, bool certified);

// dataset,C,T,E,avg_dr_deg,max_dr_deg,avg_dt_m,max_dt_m,iters,sec_per_iter,certified
std::string report_csv_header();
std::string report_csv_row(const ErrorReport& r);
ErrorReport parse_report_row(const std::string& csv_row);

// Human-readable row in the avg/max error-table layout.
std::string report_table(const ErrorReport& r);

}  // namespace bipgo
