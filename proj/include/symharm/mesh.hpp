#pragma once

#include <utility>
#include <vector>

#include "symharm/hyp2.hpp"

namespace symharm {

struct MeshEdge {
  int u = 0, v = 0;
  double weight = 0.0;  // cotangent-type, symmetric, positive after clamping
  double length = 0.0;  // hyperbolic
};

// Geodesic-polar triangulation of a closed ball about i: ring j sits at
// radius j * (R / rings) and carries enough vertices to keep every edge
// shorter than two ring spacings. Vertex ids are ring-major, center first.
struct DiskMesh {
  double radius = 0.0;
  double delta = 0.0;  // realized ring spacing, R / rings
  std::vector<HypPoint> vertices;
  std::vector<int> ring_of;
  std::vector<bool> boundary;  // outermost ring
  std::vector<MeshEdge> edges;
  std::vector<std::vector<std::pair<int, double>>> neighbors;
  int clamped_weights = 0;  // nonpositive weights raised to the floor
  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int interior_count() const;
};

DiskMesh build_mesh(double R, double delta);

}  // namespace symharm
