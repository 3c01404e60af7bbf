#include "symharm/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symharm {

namespace {

// Deterministic greedy coloring; vertices inside one class share no edge, so
// a class updates as one conflict-free half-sweep.
std::vector<std::vector<int>> color_classes(const DiskMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<int> color(n, -1);
  int max_color = 0;
  for (int v = 0; v < n; ++v) {
    unsigned used = 0;
    for (const auto& [u, w] : mesh.neighbors[v])
      if (color[u] >= 0) used |= 1u << color[u];
    int c = 0;
    while (used & (1u << c)) ++c;
    color[v] = c;
    max_color = std::max(max_color, c);
  }
  std::vector<std::vector<int>> classes(max_color + 1);
  for (int v = 0; v < n; ++v)
    if (!mesh.boundary[v]) classes[color[v]].push_back(v);
  return classes;
}

Eigen::MatrixXd factor_of(const SpdPoint& p) {
  const Eigen::LLT<Eigen::MatrixXd> llt(p.m);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("to_factors: value is not positive definite");
  return llt.matrixL();
}

template <typename Mat>
constexpr bool kClosedForm =
    Mat::RowsAtCompileTime == 2 || Mat::RowsAtCompileTime == 3;

template <typename Mat>
void sym_eigen(Eigen::SelfAdjointEigenSolver<Mat>& es, const Mat& a,
               int options) {
  if constexpr (kClosedForm<Mat>)
    es.computeDirect(a, options);
  else
    es.compute(a, options);
}

// One tangent step toward the weighted neighbor barycenter, relaxed by omega.
// The step vanishes exactly at the barycenter, so sweeping these updates has
// the same fixed points as exact per-vertex minimization while costing one
// eigendecomposition per edge visit. Returns the geodesic step length.
template <typename Mat>
double one_step(const DiskMesh& mesh, std::vector<Eigen::MatrixXd>& h, int v,
                double omega) {
  const int d = static_cast<int>(h[v].rows());
  const Mat fv(h[v]);
  const Eigen::PartialPivLU<Mat> lu(fv);
  Mat acc = Mat::Zero(d, d);
  double wsum = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> ea;
  for (const auto& [u, w] : mesh.neighbors[v]) {
    const Mat b = lu.solve(Mat(h[u]));
    Mat a = b * b.transpose();
    a = (0.5 * (a + a.transpose())).eval();
    sym_eigen(ea, a, Eigen::ComputeEigenvectors);
    acc.noalias() += w * (ea.eigenvectors() *
                          ea.eigenvalues().array().log().matrix().asDiagonal() *
                          ea.eigenvectors().transpose());
    wsum += w;
  }
  acc *= omega / wsum;
  acc = (0.5 * (acc + acc.transpose())).eval();
  acc -= (acc.trace() / d) * Mat::Identity(d, d);
  sym_eigen(ea, acc, Eigen::ComputeEigenvectors);
  // the right factor exp(acc / 2) moves the point f f^T along the geodesic
  // with whisked tangent acc while staying in factored form
  const Mat step = ea.eigenvectors() *
                   (0.5 * ea.eigenvalues()).array().exp().matrix().asDiagonal() *
                   ea.eigenvectors().transpose();
  Mat m = fv * step;
  m *= std::pow(std::abs(m.determinant()), -1.0 / d);
  h[v] = m;
  return kMetricScale * acc.norm();
}

// Squared distance between the points f f^T of two factors; the whisk
// b = fv^{-1} fu leaves a well-conditioned eigenproblem for neighboring
// values no matter how far both sit from the identity.
template <typename Mat>
double dist2_impl(const Eigen::MatrixXd& fu, const Eigen::MatrixXd& fv) {
  const Mat fvm(fv);
  const Eigen::PartialPivLU<Mat> lu(fvm);
  const Mat b = lu.solve(Mat(fu));
  Mat a = b * b.transpose();
  a = (0.5 * (a + a.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es;
  sym_eigen(es, a, Eigen::EigenvaluesOnly);
  const auto logs = es.eigenvalues().array().log().eval();
  const double mean = logs.mean();
  return kMetricScale * kMetricScale * (logs - mean).square().sum();
}

double pair_dist2(const Eigen::MatrixXd& fu, const Eigen::MatrixXd& fv) {
  switch (fu.rows()) {
    case 2:
      return dist2_impl<Eigen::Matrix2d>(fu, fv);
    case 3:
      return dist2_impl<Eigen::Matrix3d>(fu, fv);
    default:
      return dist2_impl<Eigen::MatrixXd>(fu, fv);
  }
}

Eigen::MatrixXd neighbor_mean(const DiskMesh& mesh,
                              const std::vector<Eigen::MatrixXd>& h, int v) {
  std::vector<Eigen::MatrixXd> pts;
  std::vector<double> ws;
  pts.reserve(mesh.neighbors[v].size());
  ws.reserve(mesh.neighbors[v].size());
  for (const auto& [u, w] : mesh.neighbors[v]) {
    pts.push_back(h[u]);
    ws.push_back(w);
  }
  return karcher_mean_factored(pts, ws, 1e-11, 200, &h[v]);
}

}  // namespace

FactorMap to_factors(const VertexMap& h) {
  FactorMap out;
  out.values.reserve(h.values.size());
  for (const SpdPoint& p : h.values) out.values.push_back(factor_of(p));
  return out;
}

VertexMap to_points(const FactorMap& h) {
  VertexMap out;
  out.values.reserve(h.values.size());
  for (const Eigen::MatrixXd& f : h.values)
    out.values.push_back(make_spd(f * f.transpose()));
  return out;
}

VertexMap restrict_to_mesh(const PointEvaluator& f, const DiskMesh& mesh) {
  VertexMap out;
  out.values.reserve(mesh.vertex_count());
  for (const HypPoint& z : mesh.vertices) out.values.push_back(f(z));
  return out;
}

FactorMap restrict_to_mesh(const FactorEvaluator& f, const DiskMesh& mesh) {
  FactorMap out;
  out.values.reserve(mesh.vertex_count());
  for (const HypPoint& z : mesh.vertices) out.values.push_back(f(z));
  return out;
}

MollifyResult mollify(const FactorEvaluator& f, const DiskMesh& mesh,
                      double radius, int samples) {
  if (!(radius > 0) || samples < 7)
    throw std::domain_error("mollify: need radius > 0 and samples >= 7");
  const int inner = std::max(3, (samples - 1) / 3);
  const int outer = std::max(3, samples - 1 - inner);
  MollifyResult out;
  out.map.values.reserve(mesh.vertex_count());
  for (const HypPoint& z : mesh.vertices) {
    std::vector<Eigen::MatrixXd> vals;
    vals.reserve(1 + inner + outer);
    vals.push_back(f(z));
    for (const HypPoint& p : circle_points(z, 0.5 * radius, inner))
      vals.push_back(f(p));
    for (const HypPoint& p : circle_points(z, radius, outer))
      vals.push_back(f(p));
    const std::vector<double> ws(vals.size(), 1.0);
    const Eigen::MatrixXd mean =
        karcher_mean_factored(vals, ws, 1e-10, 200, &vals.front());
    for (const Eigen::MatrixXd& s : vals)
      out.sample_spread =
          std::max(out.sample_spread, distance_factored(s, mean));
    out.map.values.push_back(mean);
  }
  return out;
}

MollifyResult mollify(const PointEvaluator& f, const DiskMesh& mesh,
                      double radius, int samples) {
  const FactorEvaluator wrap = [&f](const HypPoint& z) {
    return factor_of(f(z));
  };
  return mollify(wrap, mesh, radius, samples);
}

double vertex_lipschitz(const DiskMesh& mesh, const FactorMap& h) {
  if (h.size() != mesh.vertex_count())
    throw std::domain_error("vertex_lipschitz: map size mismatch");
  double worst = 0.0;
  for (const MeshEdge& e : mesh.edges)
    worst = std::max(
        worst, std::sqrt(pair_dist2(h.values[e.u], h.values[e.v])) / e.length);
  return worst;
}

double vertex_lipschitz(const DiskMesh& mesh, const VertexMap& h) {
  return vertex_lipschitz(mesh, to_factors(h));
}

double dirichlet_energy(const DiskMesh& mesh, const FactorMap& h) {
  if (h.size() != mesh.vertex_count())
    throw std::domain_error("dirichlet_energy: map size mismatch");
  long double e = 0.0L;
  for (const MeshEdge& edge : mesh.edges)
    e += 0.5L * edge.weight * pair_dist2(h.values[edge.u], h.values[edge.v]);
  return double(e);
}

double dirichlet_energy(const DiskMesh& mesh, const VertexMap& h) {
  return dirichlet_energy(mesh, to_factors(h));
}

SolveResult solve_dirichlet(const DiskMesh& mesh, const FactorMap& boundary,
                            const FactorMap& init, const SolveOptions& opt) {
  const int n = mesh.vertex_count();
  if (boundary.size() != n || init.size() != n)
    throw std::domain_error(
        "solve_dirichlet: boundary and init must cover every vertex");
  if (!(opt.tol > 0) || opt.max_sweeps < 1 || !(opt.relax >= 1.0) ||
      !(opt.relax < 2.0))
    throw std::domain_error("solve_dirichlet: bad options");

  SolveResult res;
  res.h.values.reserve(n);
  for (int v = 0; v < n; ++v)
    res.h.values.push_back(mesh.boundary[v] ? boundary.values[v]
                                            : init.values[v]);
  const std::vector<std::vector<int>> classes = color_classes(mesh);
  const int d = n > 0 ? static_cast<int>(res.h.values[0].rows()) : 0;
  double omega = opt.relax;
  double energy = dirichlet_energy(mesh, res.h);
  std::vector<double> moves;

  auto run_sweep = [&](double w, bool exact) {
    double move = 0.0;
    for (const std::vector<int>& cls : classes)
      for (int v : cls) {
        if (exact) {
          const Eigen::MatrixXd next = neighbor_mean(mesh, res.h.values, v);
          move = std::max(
              move, std::sqrt(pair_dist2(res.h.values[v], next)));
          res.h.values[v] = next;
        } else if (d == 2) {
          move = std::max(move,
                          one_step<Eigen::Matrix2d>(mesh, res.h.values, v, w));
        } else if (d == 3) {
          move = std::max(move,
                          one_step<Eigen::Matrix3d>(mesh, res.h.values, v, w));
        } else {
          move = std::max(move,
                          one_step<Eigen::MatrixXd>(mesh, res.h.values, v, w));
        }
      }
    return move;
  };

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const std::vector<Eigen::MatrixXd> before = res.h.values;
    const double energy_before = energy;

    double move = run_sweep(omega, false);
    energy = dirichlet_energy(mesh, res.h);
    if (energy > energy_before + 1e-10 * (1.0 + energy_before)) {
      // an over-relaxed sweep overshot; redo it with exact center-of-mass
      // updates, which can only lower the energy, and relax less from now on
      res.h.values = before;
      move = run_sweep(1.0, true);
      energy = dirichlet_energy(mesh, res.h);
      omega = 1.0 + 0.9 * (omega - 1.0);
      ++res.safeguard_hits;
    }
    res.energy.push_back(energy);
    moves.push_back(move);
    res.sweeps = sweep + 1;
    res.final_move = move;
    if (move <= opt.tol) return res;
  }
  throw ConvergenceError("solve_dirichlet: sweep cap reached before the moves settled",
                         moves);
}

SolveResult solve_dirichlet(const DiskMesh& mesh, const VertexMap& boundary,
                            const VertexMap& init, const SolveOptions& opt) {
  return solve_dirichlet(mesh, to_factors(boundary), to_factors(init), opt);
}

std::vector<ExhaustStage> exhaust_map(const FactorEvaluator& f,
                                      const std::vector<double>& radii,
                                      double delta, const SolveOptions& opt) {
  if (radii.empty()) throw std::domain_error("exhaust: need at least one radius");
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw std::domain_error("exhaust: radii must increase");

  std::vector<ExhaustStage> stages;
  FactorMap prev;
  DiskMesh prev_mesh;
  for (double R : radii) {
    const DiskMesh mesh = build_mesh(R, delta);
    const MollifyResult mol = mollify(f, mesh);
    FactorMap init = mol.map;
    if (!stages.empty()) {
      // stages list vertices ring by ring, so the previous disk occupies a
      // prefix of this one; reuse its solution as the interior starting guess
      for (int v = 0; v < prev.size() && v < mesh.vertex_count(); ++v) {
        if (hyp_distance(mesh.vertices[v], prev_mesh.vertices[v]) > 1e-9)
          throw std::domain_error(
              "exhaust: stage meshes do not share the inner subdisk; use radii "
              "that are multiples of delta");
        if (!mesh.boundary[v]) init.values[v] = prev.values[v];
      }
    }
    const SolveResult sol = solve_dirichlet(mesh, mol.map, init, opt);

    ExhaustStage st;
    st.radius = R;
    st.vertices = mesh.vertex_count();
    st.sweeps = sol.sweeps;
    st.safeguard_hits = sol.safeguard_hits;
    st.mollify_spread = mol.sample_spread;
    // successive solutions are compared away from the previous boundary,
    // where its Dirichlet data still dominates the solution
    const double cmp_radius =
        stages.empty() ? -1.0 : stages.back().radius - 2.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const double r = mesh.ring_of[v] * mesh.delta;
      if (r <= R - 2.0 + 1e-9)
        st.sup_vs_input = std::max(
            st.sup_vs_input,
            distance_factored(sol.h.values[v], f(mesh.vertices[v])));
      if (r <= cmp_radius + 1e-9 && v < prev.size())
        st.sup_vs_previous =
            std::max(st.sup_vs_previous,
                     distance_factored(sol.h.values[v], prev.values[v]));
    }
    prev = sol.h;
    prev_mesh = mesh;
    stages.push_back(st);
  }
  return stages;
}

std::vector<ExhaustStage> exhaust_map(const PointEvaluator& f,
                                      const std::vector<double>& radii,
                                      double delta, const SolveOptions& opt) {
  const FactorEvaluator wrap = [&f](const HypPoint& z) {
    return factor_of(f(z));
  };
  return exhaust_map(wrap, radii, delta, opt);
}

std::vector<ExhaustStage> exhaust(const EmbeddingHandle& e,
                                  const std::vector<double>& radii,
                                  double delta, const SolveOptions& opt) {
  return exhaust_map(
      [&e](const HypPoint& z) { return embedding_factor(e, z); }, radii, delta,
      opt);
}

DiagnosticsReport diagnostics(const FactorMap& h, const DiskMesh& mesh,
                              const FactorMap& f, const SpdPoint& y,
                              std::uint64_t seed, int quad_pairs) {
  const int n = mesh.vertex_count();
  if (h.size() != n || f.size() != n)
    throw std::domain_error("diagnostics: map size mismatch");

  DiagnosticsReport rep;
  rep.min_laplacian_sq_minus_energy = std::numeric_limits<double>::infinity();
  rep.min_laplacian_dist = std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd yf = factor_of(y);
  std::vector<double> dy(n);
  for (int v = 0; v < n; ++v)
    dy[v] = distance_factored(yf, h.values[v]);

  for (int v = 0; v < n; ++v) {
    if (mesh.boundary[v]) continue;
    ++rep.interior_count;
    double lap_sq = 0.0, lap = 0.0, quad = 0.0;
    for (const auto& [u, w] : mesh.neighbors[v]) {
      lap_sq += w * (dy[u] * dy[u] - dy[v] * dy[v]);
      lap += w * (dy[u] - dy[v]);
      quad += w * pair_dist2(h.values[u], h.values[v]);
    }
    rep.min_laplacian_sq_minus_energy =
        std::min(rep.min_laplacian_sq_minus_energy, lap_sq - quad);
    rep.min_laplacian_dist = std::min(rep.min_laplacian_dist, lap);
  }

  for (const MeshEdge& e : mesh.edges)
    rep.max_gradient = std::max(
        rep.max_gradient,
        std::sqrt(pair_dist2(h.values[e.u], h.values[e.v])) / e.length);
  const double dcenter = dy[0];
  rep.harnack_ratio =
      dcenter > 0 ? rep.max_gradient / std::sqrt(dcenter) : 0.0;

  Rng rng(derive_seed(seed, "diagnostics-quad"));
  rep.quad_pairs = quad_pairs;
  double worst = 0.0;
  for (int k = 0; k < quad_pairs; ++k) {
    const int x = rng.uniform_int(n);
    int z = rng.uniform_int(n);
    if (z == x) z = (z + 1) % n;
    const double dd = distance_factored(f.values[x], h.values[z]);
    if (dd <= 1e-8) continue;
    const double ddp = distance_factored(f.values[z], h.values[x]);
    const double e1 = distance_factored(f.values[x], f.values[z]);
    const double e2 = distance_factored(h.values[z], h.values[x]);
    const double f1 = distance_factored(f.values[z], h.values[z]);
    const double f2 = distance_factored(f.values[x], h.values[x]);
    worst = std::max(worst, (f1 - dd + f2 - ddp) - 2.0 * e1 * e2 / dd);
  }
  rep.quad_worst = worst;
  return rep;
}

DiagnosticsReport diagnostics(const VertexMap& h, const DiskMesh& mesh,
                              const VertexMap& f, const SpdPoint& y,
                              std::uint64_t seed, int quad_pairs) {
  return diagnostics(to_factors(h), mesh, to_factors(f), y, seed, quad_pairs);
}

}  // namespace symharm
