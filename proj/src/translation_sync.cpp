#include "bipgo/translation_sync.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "bipgo/errors.hpp"

namespace bipgo {

TranslationSystem build_translation_system(const MeasurementGraph& g,
                                           const std::vector<Rotation>& r_c,
                                           const std::vector<Rotation>& r_t,
                                           NodeId anchor_cam) {
  if (static_cast<Index>(r_c.size()) != g.num_cameras() ||
      static_cast<Index>(r_t.size()) != g.num_times()) {
    throw InvalidInput("build_translation_system: rotation count mismatch");
  }
  const GraphIndex idx(g);
  TranslationSystem sys;
  sys.num_cameras = g.num_cameras();
  sys.num_times = g.num_times();
  try {
    sys.anchor = idx.camera(anchor_cam);
  } catch (const UnknownCamera&) {
    throw UnknownAnchor(anchor_cam);
  }
  sys.rows.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (!(e.noise.tau > 0.0)) throw InvalidInput("edge with non-positive tau");
    const Pose* rel = g.object.find(e.marker);
    if (!rel) throw UnknownMarker(e.marker);
    const Index c = idx.camera(e.cam);
    const Index t = idx.time(e.time);
    // Marker rotation at this time, then the adjusted measurement.
    const Mat3 r_m = rel->r * r_t[static_cast<size_t>(t)];
    const Mat3 cam_to_marker = r_c[static_cast<size_t>(c)] * r_m.transpose();
    TranslationSystem::Row row;
    row.cam = c;
    row.time = t;
    row.tau = e.noise.tau;
    row.object_block = cam_to_marker * rel->r;
    row.rhs = e.noise.tau * (e.t_meas + cam_to_marker * rel->t);
    sys.rows.push_back(row);
  }
  return sys;
}

namespace {

// Column index after deleting the anchor camera; objects follow the cameras.
inline Index packed_cam(const TranslationSystem& sys, Index c) {
  return c < sys.anchor ? c : c - 1;
}
inline Index packed_time(const TranslationSystem& sys, Index t) {
  return sys.num_cameras - 1 + t;
}

}  // namespace

TranslationSolution solve_translations(const TranslationSystem& sys, double tol,
                                       int max_iterations) {
  const Index n = sys.num_cameras - 1 + sys.num_times;
  if (n <= 0) throw InvalidInput("solve_translations: empty system");
  if (max_iterations <= 0) max_iterations = static_cast<int>(10 * n + 100);

  // Normal equations: diagonal camera/object blocks are tau^2 I; each edge
  // couples its camera and object columns with -tau^2 * object_block.
  std::vector<Mat3> diag(static_cast<size_t>(n), Mat3::Zero());
  BlockMatrix33::Builder off(n, n);
  VecX b = VecX::Zero(3 * n);
  for (const auto& row : sys.rows) {
    const double w = row.tau * row.tau;
    const bool anchored = row.cam == sys.anchor;
    const Index tcol = packed_time(sys, row.time);
    diag[static_cast<size_t>(tcol)] += w * Mat3::Identity();
    b.segment<3>(3 * tcol) -= row.tau * (row.object_block.transpose() * row.rhs);
    if (!anchored) {
      const Index ccol = packed_cam(sys, row.cam);
      diag[static_cast<size_t>(ccol)] += w * Mat3::Identity();
      b.segment<3>(3 * ccol) += row.tau * row.rhs;
      off.add(ccol, tcol, -w * row.object_block);
      off.add(tcol, ccol, -w * row.object_block.transpose());
    }
  }
  BlockMatrix33 coupling = off.build();
  std::vector<Mat3> jacobi(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    jacobi[static_cast<size_t>(i)] = diag[static_cast<size_t>(i)].inverse();
  }

  auto apply_normal = [&](const VecX& x) {
    VecX y(3 * n);
    for (Index i = 0; i < n; ++i) {
      y.segment<3>(3 * i) = diag[static_cast<size_t>(i)] * x.segment<3>(3 * i);
    }
    for (Index i = 0; i < n; ++i) {
      auto yi = y.segment<3>(3 * i);
      for (const auto& e : coupling.row(i)) {
        yi.noalias() += e.m * x.segment<3>(3 * e.col);
      }
    }
    return y;
  };
  auto apply_jacobi = [&](const VecX& r) {
    VecX z(3 * n);
    for (Index i = 0; i < n; ++i) {
      z.segment<3>(3 * i) = jacobi[static_cast<size_t>(i)] * r.segment<3>(3 * i);
    }
    return z;
  };

  const double b_norm = b.norm();
  VecX x = VecX::Zero(3 * n);
  TranslationSolution out;
  if (b_norm > 0.0) {
    VecX r = b;
    VecX z = apply_jacobi(r);
    VecX p = z;
    double rz = r.dot(z);
    bool converged = false;
    for (int it = 1; it <= max_iterations; ++it) {
      const VecX ap = apply_normal(p);
      const double alpha = rz / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      out.iterations = it;
      if (r.norm() <= tol * b_norm) {
        converged = true;
        break;
      }
      z = apply_jacobi(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    out.residual = r.norm() / b_norm;
    if (!converged) {
      throw NoConvergence("solve_translations: conjugate gradients hit the iteration cap",
                          out.residual);
    }
  }

  out.cam.assign(static_cast<size_t>(sys.num_cameras), Vec3::Zero());
  for (Index c = 0; c < sys.num_cameras; ++c) {
    if (c == sys.anchor) continue;
    out.cam[static_cast<size_t>(c)] = x.segment<3>(3 * packed_cam(sys, c));
  }
  out.obj.resize(static_cast<size_t>(sys.num_times));
  for (Index t = 0; t < sys.num_times; ++t) {
    out.obj[static_cast<size_t>(t)] = x.segment<3>(3 * packed_time(sys, t));
  }
  return out;
}

}  // namespace bipgo
