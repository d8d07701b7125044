#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace bipgo {

using Scalar = double;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using Index = Eigen::Index;

// Node identifiers as they appear in input files (camera, marker, time ids).
using NodeId = std::int64_t;

}  // namespace bipgo
