#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symharm/rng.hpp"

namespace symharm {

// Distance scale on the determinant-1 positive definite model, chosen so the
// d = 2 slice matches the curvature -1 half-plane: d(I, diag(y,1/y)) = log y.
inline constexpr double kMetricScale = 0.70710678118654752440;

// Root functionals carry the matching scale: for d = 2 the single root of a
// vector distance equals the hyperbolic distance itself.
inline constexpr double kRootGapScale = 0.5;

// Point of the symmetric space: symmetric positive definite, determinant 1.
struct SpdPoint {
  Eigen::MatrixXd m;
  int dim() const { return static_cast<int>(m.rows()); }
};

// Chamber-valued distance: components sorted non-increasing, sum 0.
struct CartanVector {
  Eigen::VectorXd v;
  int dim() const { return static_cast<int>(v.size()); }
};

// Boundary-at-infinity point: orthogonal frame plus a unit-speed chamber
// direction (metric norm 1, so the associated ray has unit speed).
struct IdealPoint {
  Eigen::MatrixXd frame;
  CartanVector type_vec;
  int dim() const { return static_cast<int>(frame.rows()); }
};

// Tangent vector at base, stored in the symmetric chart at base: the point
// base^{1/2} exp(s) base^{1/2} lies at distance |s| from base.
struct TangentSym {
  Eigen::MatrixXd s;
  SpdPoint base;
};

struct ConvergenceError : std::runtime_error {
  std::vector<double> residual_history;
  ConvergenceError(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), residual_history(std::move(history)) {}
};

SpdPoint spd_identity(int d);
// Validates symmetry and positivity, then rescales to determinant 1.
SpdPoint make_spd(const Eigen::MatrixXd& m);
// Action g.P = g P g^T renormalized back to determinant 1.
SpdPoint congruence(const Eigen::MatrixXd& g, const SpdPoint& p);

// Sorts descending and subtracts the mean.
CartanVector fold_to_chamber(const Eigen::VectorXd& raw);
// Gap functional i in 1..d-1 applied to a chamber vector.
double root_functional(const CartanVector& w, int i);

CartanVector vector_distance(const SpdPoint& p, const SpdPoint& q);
double distance(const SpdPoint& p, const SpdPoint& q);
// Same chamber-valued distance for points given in factored form a a^T and
// b b^T (a, b invertible); singular values of b^{-1} a keep relative accuracy
// when the points are far apart, where the assembled products would not.
CartanVector vector_distance_factored(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b);
double distance_factored(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
SpdPoint geodesic(const SpdPoint& p, const SpdPoint& q, double t);

TangentSym log_map(const SpdPoint& base, const SpdPoint& q);
SpdPoint exp_map(const TangentSym& x);
double tangent_norm(const TangentSym& x);
double tangent_inner(const TangentSym& x, const TangentSym& y);

// Weighted center of mass; throws ConvergenceError with the residual history
// if the fixed-point residual does not reach tol.
SpdPoint karcher_mean(const std::vector<SpdPoint>& points,
                      const std::vector<double>& weights, double tol = 1e-10,
                      int max_iter = 200, const SpdPoint* init = nullptr);
// Center of mass of the points f f^T, returned as a factor of the same form.
// Staying in factored form keeps the small eigendirections when the points
// sit far from the identity.
Eigen::MatrixXd karcher_mean_factored(
    const std::vector<Eigen::MatrixXd>& factors,
    const std::vector<double>& weights, double tol = 1e-10, int max_iter = 200,
    const Eigen::MatrixXd* init = nullptr);

// Frame must be orthogonal; type_raw must be sorted non-increasing and is
// centered to mean 0 and rescaled to metric norm 1.
IdealPoint make_ideal(const Eigen::MatrixXd& frame,
                      const Eigen::VectorXd& type_raw);
IdealPoint opposite(const IdealPoint& eta);
// Unit-speed ray toward eta: frame * exp(t * type) * frame^T.
SpdPoint ray_point(const IdealPoint& eta, double t);

// Horofunction normalized to 0 at the identity, closed form through a
// unit upper-triangular factorization in the frame of eta.
double busemann(const IdealPoint& eta, const SpdPoint& p);
// Same value for a point given in factored form f f^T (f invertible). The
// pivots come from an orthogonal factorization of f in the frame of eta, so
// they keep relative accuracy for points whose assembled matrix would lose
// its small pivots to roundoff.
double busemann_factored(const IdealPoint& eta, const Eigen::MatrixXd& f);
// d(ray(horizon), p) - horizon, evaluated in extended precision.
double busemann_truncated(const IdealPoint& eta, const SpdPoint& p,
                          double horizon);
// Extrapolated limit of the truncated values at horizon/4, horizon/2, horizon.
double busemann_limit_estimate(const IdealPoint& eta, const SpdPoint& p,
                               double horizon = 1000.0);

// Minus cosine of the asymptotic angle: exact when the two ideal points share
// a maximal flat, otherwise a ray limit truncated at t = 10^3.
double slope(const IdealPoint& eta, const IdealPoint& xi);

// Minus cosine of the minimal angle between the theta-orbit of the positive
// chamber and the opposite chamber; theta holds gap indices in 1..d-1.
double separation(int d, const std::vector<int>& theta, double tol = 1e-8);

// Distance from p to the cone of chamber directions based at base through
// the regular point through.
double weyl_cone_distance(const SpdPoint& p, const SpdPoint& base,
                          const SpdPoint& through, double tol = 1e-6);

// Returns (F F', D D' + E E') for the cyclic order q1 q2 q3 q4 with
// diagonals F = d(q1,q3), F' = d(q2,q4).
std::pair<double, double> ptolemy_check(const SpdPoint& q1, const SpdPoint& q2,
                                        const SpdPoint& q3,
                                        const SpdPoint& q4);
// Returns (F - D + F' - D', 2 E E' / D) with D = d(p1,p3), D' = d(p2,p4),
// E = d(p1,p2), E' = d(p3,p4), F = d(p2,p3), F' = d(p1,p4); requires D > 0.
std::pair<double, double> quad_cr_bound_check(const SpdPoint& p1,
                                              const SpdPoint& p2,
                                              const SpdPoint& p3,
                                              const SpdPoint& p4);

// Geodesic-triangle estimate of the sectional curvature of the plane spanned
// by x and y at p (legs of length eps along the orthonormalized pair).
double sectional_curvature_estimate(const SpdPoint& p, const TangentSym& x,
                                    const TangentSym& y, double eps = 1e-2);

Eigen::MatrixXd haar_orthogonal(Rng& rng, int d);

}  // namespace symharm
