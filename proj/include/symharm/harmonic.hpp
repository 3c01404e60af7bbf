#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "symharm/embedding.hpp"
#include "symharm/mesh.hpp"
#include "symharm/spd.hpp"

namespace symharm {

// Dense assignment of one target point per mesh vertex.
struct VertexMap {
  std::vector<SpdPoint> values;
  int size() const { return static_cast<int>(values.size()); }
};

// Same assignment with each point carried as an invertible factor f of the
// target f f^T. Factors keep the small eigendirections of points far from
// the identity, which assembled matrices lose to roundoff, so the solver
// pipeline works in this form throughout.
struct FactorMap {
  std::vector<Eigen::MatrixXd> values;
  int size() const { return static_cast<int>(values.size()); }
};

using PointEvaluator = std::function<SpdPoint(const HypPoint&)>;
using FactorEvaluator = std::function<Eigen::MatrixXd(const HypPoint&)>;

FactorMap to_factors(const VertexMap& h);
VertexMap to_points(const FactorMap& h);

VertexMap restrict_to_mesh(const PointEvaluator& f, const DiskMesh& mesh);
FactorMap restrict_to_mesh(const FactorEvaluator& f, const DiskMesh& mesh);

struct MollifyResult {
  FactorMap map;
  double sample_spread = 0.0;  // sup over vertices of max sample-to-mean gap
};

// Per vertex, the center of mass of f over a deterministic quasi-uniform
// layout (center, half ring, full ring) inside the hyperbolic ball of the
// given radius around the vertex.
MollifyResult mollify(const FactorEvaluator& f, const DiskMesh& mesh,
                      double radius = 1.0, int samples = 19);
MollifyResult mollify(const PointEvaluator& f, const DiskMesh& mesh,
                      double radius = 1.0, int samples = 19);

// Max over edges of d_Y(h(u), h(v)) divided by the hyperbolic edge length.
double vertex_lipschitz(const DiskMesh& mesh, const FactorMap& h);
double vertex_lipschitz(const DiskMesh& mesh, const VertexMap& h);

double dirichlet_energy(const DiskMesh& mesh, const FactorMap& h);
double dirichlet_energy(const DiskMesh& mesh, const VertexMap& h);

struct SolveOptions {
  double tol = 1e-8;        // max geodesic vertex move per sweep
  int max_sweeps = 100000;
  double relax = 1.9;       // geodesic over-relaxation, safeguarded per sweep
};

struct SolveResult {
  FactorMap h;
  int sweeps = 0;
  double final_move = 0.0;
  std::vector<double> energy;  // per sweep, non-increasing by construction
  int safeguard_hits = 0;      // sweeps redone without over-relaxation
};

// Interior vertices move to the weighted center of mass of their neighbors
// in deterministic conflict-free color sweeps until the largest move drops
// below tol; boundary vertices keep the supplied values throughout.
SolveResult solve_dirichlet(const DiskMesh& mesh, const FactorMap& boundary,
                            const FactorMap& init,
                            const SolveOptions& opt = {});
SolveResult solve_dirichlet(const DiskMesh& mesh, const VertexMap& boundary,
                            const VertexMap& init,
                            const SolveOptions& opt = {});

struct ExhaustStage {
  double radius = 0.0;
  double sup_vs_input = 0.0;     // radius-(R-2) subdisk, against the input map
  double sup_vs_previous = 0.0;  // radius-(R_prev - 2) subdisk vs prior stage
  double mollify_spread = 0.0;
  int sweeps = 0;
  int vertices = 0;
  int safeguard_hits = 0;
};

// Solve on a growing family of balls with mollified boundary data and report
// interior agreement between consecutive solutions.
std::vector<ExhaustStage> exhaust_map(const FactorEvaluator& f,
                                      const std::vector<double>& radii,
                                      double delta,
                                      const SolveOptions& opt = {});
std::vector<ExhaustStage> exhaust_map(const PointEvaluator& f,
                                      const std::vector<double>& radii,
                                      double delta,
                                      const SolveOptions& opt = {});
std::vector<ExhaustStage> exhaust(const EmbeddingHandle& e,
                                  const std::vector<double>& radii,
                                  double delta, const SolveOptions& opt = {});

struct DiagnosticsReport {
  double min_laplacian_sq_minus_energy = 0.0;  // over interior vertices
  double min_laplacian_dist = 0.0;             // subharmonicity of d_y(h)
  double max_gradient = 0.0;                   // max edge ratio of h
  double harnack_ratio = 0.0;                  // max_gradient / sqrt(d_y(h(center)))
  double quad_worst = 0.0;   // max of (F - D + F' - D') - 2EE'/D over pairs
  int interior_count = 0;
  int quad_pairs = 0;
};

DiagnosticsReport diagnostics(const FactorMap& h, const DiskMesh& mesh,
                              const FactorMap& f, const SpdPoint& y,
                              std::uint64_t seed = 1, int quad_pairs = 200);
DiagnosticsReport diagnostics(const VertexMap& h, const DiskMesh& mesh,
                              const VertexMap& f, const SpdPoint& y,
                              std::uint64_t seed = 1, int quad_pairs = 200);

}  // namespace symharm
