#include "bipgo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SVD>

#include "bipgo/errors.hpp"

namespace bipgo {

Pose align_gauge(const std::vector<Pose>& est, const std::vector<Pose>& gt) {
  if (est.empty() || est.size() != gt.size()) {
    throw InvalidInput("align_gauge: pose sets must be non-empty and equal-sized");
  }
  Mat3 q = Mat3::Zero();
  Vec3 t = Vec3::Zero();
  for (size_t c = 0; c < est.size(); ++c) {
    q += gt[c].r.transpose() * est[c].r;
    t += est[c].r.transpose() * (gt[c].t - est[c].t);
  }
  Pose h;
  // R_H = V U^T from the SVD of q; det-corrected, which only differs on
  // adversarial inputs where the optimal gauge is reflected.
  h.r = project_to_so3(q.transpose());
  h.t = t / static_cast<double>(est.size());
  return h;
}

OrbitDistance orbit_distance(const std::vector<Pose>& est, const std::vector<Pose>& gt,
                             const std::vector<NodeId>& ids) {
  OrbitDistance out;
  out.gauge = align_gauge(est, gt);
  out.per_camera.reserve(est.size());
  for (size_t c = 0; c < est.size(); ++c) {
    const Pose aligned = compose(est[c], out.gauge);
    CameraError err;
    err.id = ids.empty() ? static_cast<NodeId>(c) : ids[c];
    err.dr_deg = geodesic_angle_deg(gt[c].r, aligned.r);
    err.dt_m = (gt[c].t - aligned.t).norm();
    out.avg_dr_deg += err.dr_deg;
    out.avg_dt_m += err.dt_m;
    out.max_dr_deg = std::max(out.max_dr_deg, err.dr_deg);
    out.max_dt_m = std::max(out.max_dt_m, err.dt_m);
    out.per_camera.push_back(err);
  }
  out.avg_dr_deg /= static_cast<double>(est.size());
  out.avg_dt_m /= static_cast<double>(est.size());
  return out;
}

double nll(const MeasurementGraph& g, const std::vector<Pose>& cam_poses,
           const std::vector<Pose>& object_poses) {
  if (static_cast<Index>(cam_poses.size()) != g.num_cameras() ||
      static_cast<Index>(object_poses.size()) != g.num_times()) {
    throw InvalidInput("nll: pose count mismatch");
  }
  const GraphIndex idx(g);
  double total = 0.0;
  for (const auto& e : g.edges) {
    const Pose* rel = g.object.find(e.marker);
    if (!rel) throw UnknownMarker(e.marker);
    const Pose& cam = cam_poses[static_cast<size_t>(idx.camera(e.cam))];
    const Pose& obj = object_poses[static_cast<size_t>(idx.time(e.time))];
    const Mat3 r_m = rel->r * obj.r;
    const Mat3 cam_to_marker = cam.r * r_m.transpose();
    // Translation residual in the merged variables.
    const Vec3 adjusted = e.t_meas + cam_to_marker * rel->t;
    const Vec3 resid = adjusted - cam.t + cam_to_marker * rel->r * obj.t;
    total += 0.5 * e.noise.tau * resid.squaredNorm();
    // Rotation term: -kappa Tr(R_meas R_rel R_t R_c^T).
    total -= e.noise.kappa *
             ((e.r_meas * rel->r * obj.r).cwiseProduct(cam.r)).sum();
  }
  return total;
}

ErrorReport render_report(const std::string& dataset, const std::vector<NodeId>& cam_ids,
                          const std::vector<Pose>& est, const std::vector<Pose>& gt,
                          Index num_times, Index num_edges, int iterations,
                          double seconds_per_iteration, bool certified) {
  const OrbitDistance d = orbit_distance(est, gt, cam_ids);
  ErrorReport r;
  r.dataset = dataset;
  r.num_cameras = static_cast<Index>(est.size());
  r.num_times = num_times;
  r.num_edges = num_edges;
  r.avg_dr = d.avg_dr_deg;
  r.max_dr = d.max_dr_deg;
  r.avg_dt = d.avg_dt_m;
  r.max_dt = d.max_dt_m;
  r.per_camera = d.per_camera;
  r.iterations = iterations;
  r.seconds_per_iteration = seconds_per_iteration;
  r.certified = certified;
  return r;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string report_csv_header() {
  return "dataset,C,T,E,avg_dr_deg,max_dr_deg,avg_dt_m,max_dt_m,iters,"
         "sec_per_iter,certified";
}

std::string report_csv_row(const ErrorReport& r) {
  std::ostringstream out;
  out << r.dataset << ',' << r.num_cameras << ',' << r.num_times << ',' << r.num_edges
      << ',' << fmt_double(r.avg_dr) << ',' << fmt_double(r.max_dr) << ','
      << fmt_double(r.avg_dt) << ',' << fmt_double(r.max_dt) << ',' << r.iterations
      << ',' << fmt_double(r.seconds_per_iteration) << ',' << (r.certified ? 1 : 0);
  return out.str();
}

ErrorReport parse_report_row(const std::string& csv_row) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : csv_row) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  if (fields.size() != 11) {
    throw ParseError("report", 1, "expected 11 comma-separated fields");
  }
  ErrorReport r;
  r.dataset = fields[0];
  r.num_cameras = std::stoll(fields[1]);
  r.num_times = std::stoll(fields[2]);
  r.num_edges = std::stoll(fields[3]);
  r.avg_dr = std::stod(fields[4]);
  r.max_dr = std::stod(fields[5]);
  r.avg_dt = std::stod(fields[6]);
  r.max_dt = std::stod(fields[7]);
  r.iterations = std::stoi(fields[8]);
  r.seconds_per_iteration = std::stod(fields[9]);
  r.certified = fields[10] == "1" || fields[10] == "true";
  return r;
}

std::string report_table(const ErrorReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-14s %10s %10s %10s %10s %9s\n"
                "%-14s %10.4f %10.4f %10.4f %10.4f %9.3f\n",
                "dataset", "avg_dR", "max_dR", "avg_dt", "max_dt", "t(s/it)",
                r.dataset.c_str(), r.avg_dr, r.max_dr, r.avg_dt, r.max_dt,
                r.seconds_per_iteration);
  return buf;
}

}  // namespace bipgo
