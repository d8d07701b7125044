#pragma once

#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "bipgo/block_matrix.hpp"
#include "bipgo/geometry.hpp"

namespace bipgo {

// One camera-to-marker observation at a given time step. (cam, marker, time)
// triples are unique within a graph.
struct EdgeMeasurement {
  NodeId cam = 0;
  NodeId marker = 0;
  NodeId time = 0;
  Rotation r_meas = Rotation::Identity();
  Vec3 t_meas = Vec3::Zero();
  NoiseParams noise;
};

// Rigid-rig model: pose of each marker relative to the reference marker. The
// reference marker is listed first and maps to the identity pose.
struct ObjectModel {
  std::vector<NodeId> markers;
  std::unordered_map<NodeId, Pose> rel;

  NodeId reference() const { return markers.at(0); }
  const Pose* find(NodeId marker) const {
    auto it = rel.find(marker);
    return it == rel.end() ? nullptr : &it->second;
  }
};

// Bipartite measurement graph: edges connect cameras to object-at-time nodes
// only. Camera and time id lists are kept sorted.
struct MeasurementGraph {
  std::vector<NodeId> cameras;
  std::vector<NodeId> times;
  std::vector<EdgeMeasurement> edges;
  ObjectModel object;

  Index num_cameras() const { return static_cast<Index>(cameras.size()); }
  Index num_times() const { return static_cast<Index>(times.size()); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }
};

// Builds a graph from an edge list, inferring the sorted camera/time lists.
MeasurementGraph make_graph(std::vector<EdgeMeasurement> edges, ObjectModel object);

// Id -> dense index lookup for one graph snapshot.
class GraphIndex {
 public:
  explicit GraphIndex(const MeasurementGraph& g);
  Index camera(NodeId id) const;  // throws UnknownCamera
  Index time(NodeId id) const;    // throws InvalidInput

 private:
  std::unordered_map<NodeId, Index> cam_;
  std::unordered_map<NodeId, Index> time_;
};

using SparseMatrixD = Eigen::SparseMatrix<double>;

struct MergedBlocks {
  BlockMatrix33 rot;       // C x T blocks, kappa-weighted sums of merged rotations
  SparseMatrixD adjacency;  // C x T kappa sums
};

// Collapses all markers seen by camera c at time t onto the reference marker:
// block(c,t) = sum_m kappa * R_meas * R_rel(m), adjacency(c,t) = sum_m kappa.
// Edges with kappa == 0 carry translation information only and are skipped.
MergedBlocks merge_object_blocks(const MeasurementGraph& g);

struct Degrees {
  VecX cam;   // row sums
  VecX time;  // column sums
};

// Throws DisconnectedNode when a row/column sums to zero (prune first).
Degrees degree_matrix(const SparseMatrixD& adjacency);

// Camera-side power-graph operator: block(i,j) = sum_t rot(i,t) *
// lambda_t(t)^{-1} * rot(j,t)^T. Each lambda block must be SPD with condition
// number below 1e12 (SingularDualBlock otherwise). The result is block
// symmetric by construction.
BlockMatrix33 power_graph_operator(const BlockMatrix33& rot_ct,
                                   const std::vector<Mat3>& lambda_t);

struct PruneResult {
  MeasurementGraph graph;
  std::vector<NodeId> dropped_cameras;
  std::vector<NodeId> dropped_times;
};

// Drops cameras and time steps whose rotation-weighted degree is zero, along
// with their edges. Throws EmptyGraph when nothing remains.
PruneResult prune(const MeasurementGraph& g);

// Connectivity over rotation-carrying edges (kappa > 0).
bool is_connected(const MeasurementGraph& g);

}  // namespace bipgo
