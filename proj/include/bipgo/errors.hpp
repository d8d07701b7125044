#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bipgo/types.hpp"

namespace bipgo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

// Nearest-rotation projection hit a (near-)tie among minimizers.
struct DegenerateProjection : Error {
  using Error::Error;
};

struct UnknownMarker : Error {
  explicit UnknownMarker(NodeId m)
      : Error("edge references marker " + std::to_string(m) +
              " absent from the object model"),
        marker(m) {}
  NodeId marker;
};

struct UnknownCamera : Error {
  explicit UnknownCamera(NodeId c)
      : Error("unknown camera id " + std::to_string(c)), camera(c) {}
  NodeId camera;
};

struct UnknownAnchor : Error {
  explicit UnknownAnchor(NodeId c)
      : Error("anchor camera id " + std::to_string(c) + " not in graph"),
        camera(c) {}
  NodeId camera;
};

struct DisconnectedNode : Error {
  using Error::Error;
};

struct EmptyGraph : Error {
  using Error::Error;
};

struct SingularDualBlock : Error {
  explicit SingularDualBlock(Index t)
      : Error("singular dual block at time index " + std::to_string(t)),
        time_index(t) {}
  Index time_index;
};

struct NoConvergence : Error {
  NoConvergence(const std::string& what, double r) : Error(what), residual(r) {}
  double residual;
};

struct SizeGuard : Error {
  using Error::Error;
};

struct DisconnectedRig : Error {
  explicit DisconnectedRig(std::vector<NodeId> m)
      : Error("rig markers unreachable from the reference marker"),
        unreachable(std::move(m)) {}
  std::vector<NodeId> unreachable;
};

struct ParseError : Error {
  ParseError(const std::string& path, long line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        file(path),
        line_number(line) {}
  std::string file;
  long line_number;
};

struct BadConfig : Error {
  using Error::Error;
};

}  // namespace bipgo
