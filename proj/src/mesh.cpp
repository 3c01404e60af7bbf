#include "symharm/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace symharm {

namespace {

constexpr double kWeightFloor = 1e-6;

struct Triangle {
  int a, b, c;
};

// Strip triangulation between two rings, advancing whichever side keeps the
// next cross edge shortest in angle.
void triangulate_annulus(const std::vector<int>& inner,
                         const std::vector<int>& outer,
                         std::vector<Triangle>& tris) {
  const int ni = static_cast<int>(inner.size());
  const int no = static_cast<int>(outer.size());
  int a = 0, b = 0;
  while (a < ni || b < no) {
    const double next_inner = (a + 1.0) / ni;
    const double next_outer = (b + 1.0) / no;
    if (b >= no || (a < ni && next_inner <= next_outer)) {
      tris.push_back({inner[a % ni], inner[(a + 1) % ni], outer[b % no]});
      ++a;
    } else {
      tris.push_back({inner[a % ni], outer[(b + 1) % no], outer[b % no]});
      ++b;
    }
  }
}

}  // namespace

int DiskMesh::interior_count() const {
  int n = 0;
  for (bool b : boundary)
    if (!b) ++n;
  return n;
}

DiskMesh build_mesh(double R, double delta) {
  if (!(delta > 0.0) || !(delta <= R))
    throw std::domain_error("build_mesh: need 0 < delta <= R");
  const int rings = std::max(1, static_cast<int>(std::lround(R / delta)));

  DiskMesh mesh;
  mesh.radius = R;
  mesh.delta = R / rings;  // outer ring lands exactly on the target radius

  mesh.vertices.push_back({0.0, 1.0});
  mesh.ring_of.push_back(0);
  std::vector<std::vector<int>> ring_ids(rings + 1);
  ring_ids[0] = {0};
  for (int j = 1; j <= rings; ++j) {
    const double r = j * mesh.delta;
    const int n = std::max(
        3, static_cast<int>(std::ceil(2.0 * M_PI * std::sinh(r) / mesh.delta)));
    const std::vector<HypPoint> pts = circle_points({0.0, 1.0}, r, n);
    for (const HypPoint& p : pts) {
      ring_ids[j].push_back(static_cast<int>(mesh.vertices.size()));
      mesh.vertices.push_back(p);
      mesh.ring_of.push_back(j);
    }
  }
  mesh.boundary.assign(mesh.vertices.size(), false);
  for (int id : ring_ids[rings]) mesh.boundary[id] = true;

  std::vector<Triangle> tris;
  const int n1 = static_cast<int>(ring_ids[1].size());
  for (int k = 0; k < n1; ++k)
    tris.push_back({0, ring_ids[1][k], ring_ids[1][(k + 1) % n1]});
  for (int j = 1; j < rings; ++j)
    triangulate_annulus(ring_ids[j], ring_ids[j + 1], tris);

  // cotangent weights of the piecewise-Euclidean comparison triangles built
  // from the hyperbolic side lengths
  std::map<std::pair<int, int>, double> weight;
  auto key = [](int u, int v) {
    return std::make_pair(std::min(u, v), std::max(u, v));
  };
  for (const Triangle& t : tris) {
    const std::array<int, 3> v{t.a, t.b, t.c};
    std::array<double, 3> len{};  // len[i] = side opposite vertex i
    for (int i = 0; i < 3; ++i)
      len[i] =
          hyp_distance(mesh.vertices[v[(i + 1) % 3]], mesh.vertices[v[(i + 2) % 3]]);
    for (int i = 0; i < 3; ++i) {
      const double a = len[(i + 1) % 3], b = len[(i + 2) % 3], c = len[i];
      const double cosg =
          std::clamp((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0);
      const double sing = std::sqrt(std::max(0.0, 1.0 - cosg * cosg));
      if (!(sing > 1e-14))
        throw std::domain_error("build_mesh: degenerate comparison triangle");
      weight[key(v[(i + 1) % 3], v[(i + 2) % 3])] += 0.5 * cosg / sing;
    }
  }

  mesh.neighbors.assign(mesh.vertices.size(), {});
  for (auto& [uv, w] : weight) {
    if (!(w > 0.0)) {
      w = kWeightFloor;
      ++mesh.clamped_weights;
    }
    const double len = hyp_distance(mesh.vertices[uv.first], mesh.vertices[uv.second]);
    mesh.edges.push_back({uv.first, uv.second, w, len});
    mesh.neighbors[uv.first].push_back({uv.second, w});
    mesh.neighbors[uv.second].push_back({uv.first, w});
  }
  for (size_t v = 0; v < mesh.neighbors.size(); ++v)
    if (!mesh.boundary[v] && mesh.neighbors[v].size() < 3)
      throw std::domain_error("build_mesh: interior vertex with degree < 3");
  return mesh;
}

}  // namespace symharm
