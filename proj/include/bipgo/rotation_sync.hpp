#pragma once

#include <limits>
#include <vector>

#include "bipgo/eigensolver.hpp"
#include "bipgo/graph.hpp"

namespace bipgo {

// Block-diagonal symmetric dual variable, one 3x3 block per node.
struct DualBlocks {
  std::vector<Mat3> blocks;

  Index size() const { return static_cast<Index>(blocks.size()); }
  double trace() const;
};

struct SolverConfig {
  double delta = 1e-5;           // eigenvalue convergence threshold |lambda_3|
  int max_outer = 50;            // outer sweeps (K)
  int max_inner = 100;           // camera-side primal-dual sweeps per outer
  double eig_tol = 1e-8;         // eigensolver residual tolerance
  double certificate_tol = 1e-6; // PSD slack, relative to the mean dual trace
  std::uint64_t seed = 0;
};

struct Certificate {
  double min_eig = 0.0;
  bool certified = false;
};

struct RotSolution {
  std::vector<Rotation> r_c;
  std::vector<Rotation> r_t;
  DualBlocks lambda_c;
  DualBlocks lambda_t;
  std::vector<double> dual_trace_history;  // -Tr(Lambda) per sweep
  Certificate certificate;
  int iterations = 0;
  bool converged = false;
  double last_lambda3 = std::numeric_limits<double>::infinity();
  double kkt_residual = 0.0;  // ||(Lambda - Rtilde) R||_F / ||Rtilde||_F
  double seconds_per_iteration = 0.0;
};

// Lambda_T = Deg_T (x) I3; Lambda_C = Diag(A Deg_T^{-1} A^T 1) (x) I3, the
// degree matrix of the camera power graph.
std::pair<DualBlocks, DualBlocks> spectral_init_duals(const SparseMatrixD& adjacency,
                                                      const VecX& deg_c,
                                                      const VecX& deg_t);

// Per-block det-corrected projection of a column-orthonormal 3C x 3 basis.
// The eigenbasis is defined up to an O(3) change of basis, so both the given
// basis and its reflection are projected and the lower-cost set (w.r.t. the
// quadratic form of cost_op) is kept.
std::vector<Rotation> primal_from_eigvectors(const MatX& v, const BlockMatrix33& cost_op);

// Camera dual update: per block row i of power_op * stacked(r_c), Lambda_i =
// U S U^T from its SVD. Always symmetric PSD.
DualBlocks dual_update_c(const BlockMatrix33& power_op, const std::vector<Rotation>& r_c);

// Object dual update: per time t, Lambda_t = U S U^T from the SVD of
// sum_c rot(c,t)^T r_c.
DualBlocks dual_update_t(const BlockMatrix33& rot_ct, const std::vector<Rotation>& r_c);

// Negative trace objective of the merged rotation term:
// -sum_{c,t} Tr(rot(c,t) r_t r_c^T).
double rotation_cost(const BlockMatrix33& rot_ct, const std::vector<Rotation>& r_c,
                     const std::vector<Rotation>& r_t);

// Full (C+T)^2 bipartite measurement matrix with the C x T blocks off-diagonal.
BlockMatrix33 assemble_bipartite(const BlockMatrix33& rot_ct);

// Concatenated block-diagonal dual (cameras then object nodes).
DualBlocks concat(const DualBlocks& a, const DualBlocks& b);

// Global optimality check: smallest eigenvalue of Lambda - Rtilde; certified
// iff min_eig >= -tol * Tr(Lambda) / (3 (C+T)).
Certificate check_certificate(const BlockMatrix33& rot_full, const DualBlocks& lambda_full,
                              double tol, const EigenOptions& eig = {});

// Primal-dual solver for the bipartite rotation synchronization problem:
// spectral dual init, then outer sweeps of {camera-side primal-dual sub-solve
// on the power-graph operator, object-side dual update}. Object rotations are
// recovered at the end by orthogonal projection. Never throws on iteration
// exhaustion; the best state is returned with converged = false.
RotSolution solve_rotations(const MeasurementGraph& g, const SolverConfig& cfg = {});

// Exact block-coordinate reference: alternates camera-side and object-side
// sub-synchronizations, each driven to convergence with the same primal-dual
// machinery, so the dual trace -Tr(Lambda) is non-decreasing. Small graphs
// only (C + T <= 200).
RotSolution exact_bcd_solve(const MeasurementGraph& g, const SolverConfig& cfg = {});

struct GpmResult {
  std::vector<Rotation> r_c;
  std::vector<Rotation> r_t;
  std::vector<double> cost_history;  // one entry per sweep
};

// Generalized power method baseline: alternating blockwise projections starting
// from the given camera rotations.
GpmResult gpm_solve(const MeasurementGraph& g, const std::vector<Rotation>& init_r_c,
                    int iterations);

// Incremental solver: batch-solves an initial graph, then extends it one time
// step at a time. Appends warm-start the duals (new object block at its
// degree, camera blocks incremented by the new column weights), rank-update
// the cached power-graph operator and re-run the camera-side optimization, so
// the result tracks a from-scratch batch solve.
class StreamingSolver {
 public:
  StreamingSolver(const MeasurementGraph& initial, const SolverConfig& cfg);

  // edges must all carry one new time id; cameras must already exist. An empty
  // list (or one with no rotation-carrying edge) leaves the state unchanged.
  void append(const std::vector<EdgeMeasurement>& edges_at_new_time);

  const RotSolution& solution() const { return solution_; }
  const MeasurementGraph& graph() const { return graph_; }

 private:
  void finalize_solution(int outer_iters, bool converged, double lambda3,
                         std::vector<double> trace_hist, double loop_seconds);

  SolverConfig cfg_;
  MeasurementGraph graph_;
  BlockMatrix33 cols_tc_;  // transposed merged blocks, one row per time step
  std::vector<std::vector<std::pair<Index, double>>> adj_cols_;
  VecX deg_c_, deg_t_;
  std::vector<Mat3> dual_c_, dual_t_;
  std::vector<Rotation> r_c_;
  MatX warm_basis_;
  BlockMatrix33 power_cached_;
  RotSolution solution_;
};

struct CalibrationResult {
  ObjectModel model;
  RotSolution rotations;
};

// Rig calibration from a single moving camera: solves the reversed bipartite
// graph (static markers on the camera side, camera-at-time on the object
// side) and re-bases marker poses on the lowest marker id. Throws
// DisconnectedRig when some markers never share a view with the rest.
CalibrationResult calibrate_object(const std::vector<EdgeMeasurement>& views,
                                   const SolverConfig& cfg = {});

}  // namespace bipgo
