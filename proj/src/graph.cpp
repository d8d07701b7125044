#include "bipgo/graph.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "bipgo/errors.hpp"
#include "internal.hpp"

namespace bipgo {

MeasurementGraph make_graph(std::vector<EdgeMeasurement> edges, ObjectModel object) {
  if (edges.empty()) throw EmptyGraph("graph has no edges");
  std::set<NodeId> cams, times;
  std::set<std::tuple<NodeId, NodeId, NodeId>> keys;
  for (const auto& e : edges) {
    cams.insert(e.cam);
    times.insert(e.time);
    if (!keys.insert({e.cam, e.marker, e.time}).second) {
      throw InvalidInput("duplicate (cam, marker, time) edge: " +
                         std::to_string(e.cam) + "," + std::to_string(e.marker) +
                         "," + std::to_string(e.time));
    }
  }
  MeasurementGraph g;
  g.cameras.assign(cams.begin(), cams.end());
  g.times.assign(times.begin(), times.end());
  g.edges = std::move(edges);
  g.object = std::move(object);
  return g;
}

GraphIndex::GraphIndex(const MeasurementGraph& g) {
  cam_.reserve(g.cameras.size());
  for (Index i = 0; i < g.num_cameras(); ++i) cam_[g.cameras[static_cast<size_t>(i)]] = i;
  time_.reserve(g.times.size());
  for (Index i = 0; i < g.num_times(); ++i) time_[g.times[static_cast<size_t>(i)]] = i;
}

Index GraphIndex::camera(NodeId id) const {
  auto it = cam_.find(id);
  if (it == cam_.end()) throw UnknownCamera(id);
  return it->second;
}

Index GraphIndex::time(NodeId id) const {
  auto it = time_.find(id);
  if (it == time_.end()) throw InvalidInput("unknown time id " + std::to_string(id));
  return it->second;
}

MergedBlocks merge_object_blocks(const MeasurementGraph& g) {
  const GraphIndex idx(g);
  BlockMatrix33::Builder rot(g.num_cameras(), g.num_times());
  std::vector<Eigen::Triplet<double>> weights;
  weights.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (e.noise.kappa < 0.0) throw InvalidInput("negative kappa on edge");
    if (e.noise.kappa == 0.0) continue;  // translation-only edge
    const Pose* rel = g.object.find(e.marker);
    if (!rel) throw UnknownMarker(e.marker);
    const Index c = idx.camera(e.cam);
    const Index t = idx.time(e.time);
    rot.add(c, t, e.noise.kappa * (e.r_meas * rel->r));
    weights.emplace_back(static_cast<int>(c), static_cast<int>(t), e.noise.kappa);
  }
  MergedBlocks out;
  out.rot = rot.build();
  out.adjacency.resize(g.num_cameras(), g.num_times());
  out.adjacency.setFromTriplets(weights.begin(), weights.end());
  return out;
}

Degrees degree_matrix(const SparseMatrixD& adjacency) {
  Degrees d;
  d.cam = VecX::Zero(adjacency.rows());
  d.time = VecX::Zero(adjacency.cols());
  for (int k = 0; k < adjacency.outerSize(); ++k) {
    for (SparseMatrixD::InnerIterator it(adjacency, k); it; ++it) {
      d.cam(it.row()) += it.value();
      d.time(it.col()) += it.value();
    }
  }
  for (Index i = 0; i < d.cam.size(); ++i) {
    if (!(d.cam(i) > 0.0)) {
      throw DisconnectedNode("camera index " + std::to_string(i) + " has zero degree");
    }
  }
  for (Index i = 0; i < d.time.size(); ++i) {
    if (!(d.time(i) > 0.0)) {
      throw DisconnectedNode("time index " + std::to_string(i) + " has zero degree");
    }
  }
  return d;
}

namespace detail {

// Symmetric 3x3 inverse through an eigendecomposition, with a condition check.
Mat3 invert_spd_block(const Mat3& m, Index time_index) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(m);
  const Vec3& v = eig.eigenvalues();
  if (!(v(0) > 0.0) || v(2) / v(0) >= 1e12) throw SingularDualBlock(time_index);
  return eig.eigenvectors() * v.cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

std::vector<Mat3> invert_spd_blocks(const std::vector<Mat3>& blocks) {
  std::vector<Mat3> inv(blocks.size());
  for (size_t t = 0; t < blocks.size(); ++t) {
    inv[t] = invert_spd_block(blocks[t], static_cast<Index>(t));
  }
  return inv;
}

// Shared-column power operator: op(i,j) = sum_s cols(s,i)^T inv(s) cols(s,j)
// where cols is the transposed measurement matrix (one row per shared node).
BlockMatrix33 power_operator_from_cols(const BlockMatrix33& cols_sc,
                                       const std::vector<Mat3>& inv) {
  const Index n = cols_sc.block_cols();
  BlockMatrix33::Builder b(n, n);
  for (Index s = 0; s < cols_sc.block_rows(); ++s) {
    const auto row = cols_sc.row(s);
    std::vector<Mat3> scaled(row.size());
    for (size_t a = 0; a < row.size(); ++a) {
      scaled[a] = inv[static_cast<size_t>(s)] * row[a].m;
    }
    for (size_t a = 0; a < row.size(); ++a) {
      const Mat3 left = row[a].m.transpose();
      b.add(row[a].col, row[a].col, left * scaled[a]);
      for (size_t c = a + 1; c < row.size(); ++c) {
        const Mat3 block = left * scaled[c];
        b.add(row[a].col, row[c].col, block);
        b.add(row[c].col, row[a].col, block.transpose());
      }
    }
  }
  return b.build();
}

}  // namespace detail

BlockMatrix33 power_graph_operator(const BlockMatrix33& rot_ct,
                                   const std::vector<Mat3>& lambda_t) {
  if (static_cast<Index>(lambda_t.size()) != rot_ct.block_cols()) {
    throw InvalidInput("power_graph_operator: lambda size mismatch");
  }
  const auto inv = detail::invert_spd_blocks(lambda_t);
  return detail::power_operator_from_cols(rot_ct.transposed(), inv);
}

PruneResult prune(const MeasurementGraph& g) {
  std::unordered_map<NodeId, double> cam_deg, time_deg;
  for (const auto& e : g.edges) {
    cam_deg[e.cam] += e.noise.kappa;
    time_deg[e.time] += e.noise.kappa;
  }
  PruneResult out;
  auto kept_cam = [&](NodeId id) {
    auto it = cam_deg.find(id);
    return it != cam_deg.end() && it->second > 0.0;
  };
  auto kept_time = [&](NodeId id) {
    auto it = time_deg.find(id);
    return it != time_deg.end() && it->second > 0.0;
  };
  for (NodeId id : g.cameras) {
    if (!kept_cam(id)) out.dropped_cameras.push_back(id);
  }
  for (NodeId id : g.times) {
    if (!kept_time(id)) out.dropped_times.push_back(id);
  }
  std::vector<EdgeMeasurement> kept;
  kept.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (kept_cam(e.cam) && kept_time(e.time)) kept.push_back(e);
  }
  if (kept.empty()) throw EmptyGraph("prune removed every edge");
  out.graph = make_graph(std::move(kept), g.object);
  return out;
}

bool is_connected(const MeasurementGraph& g) {
  const Index c = g.num_cameras();
  const Index t = g.num_times();
  if (c == 0 || t == 0) return false;
  const GraphIndex idx(g);
  std::vector<std::vector<Index>> nbr(static_cast<size_t>(c + t));
  for (const auto& e : g.edges) {
    if (!(e.noise.kappa > 0.0)) continue;
    const Index ci = idx.camera(e.cam);
    const Index ti = c + idx.time(e.time);
    nbr[static_cast<size_t>(ci)].push_back(ti);
    nbr[static_cast<size_t>(ti)].push_back(ci);
  }
  std::vector<char> seen(static_cast<size_t>(c + t), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 0;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    ++count;
    for (Index w : nbr[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return count == c + t;
}

}  // namespace bipgo
