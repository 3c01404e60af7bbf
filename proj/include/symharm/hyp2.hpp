#pragma once

#include <vector>

namespace symharm {

// Upper half-plane point, curvature -1 metric (dx^2 + dy^2) / y^2.
struct HypPoint {
  double x = 0.0;
  double y = 1.0;
};

// Boundary circle RP^1 = R u {inf}; inf is represented by an actual IEEE
// infinity of either sign.
bool is_infinite_boundary(double t);

// Real projectivized 2x2 matrix acting by fractional linear maps.
struct Mobius {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  HypPoint apply(const HypPoint& z) const;
  double apply_boundary(double t) const;
  Mobius inverse() const;
  Mobius compose(const Mobius& rhs) const;  // this after rhs
};

// Pairwise distinct boundary triple with its cyclic orientation.
struct IdealTriple {
  double t1 = 0.0, t2 = 1.0;
  double t3 = 0.0;  // set via make_ideal_triple so orientation stays coherent
  bool ccw = true;
};

IdealTriple make_ideal_triple(double t1, double t2, double t3);

double hyp_distance(const HypPoint& p, const HypPoint& q);

// CR(t1,t2,t3,t4) = (t1-t2)(t3-t4) / ((t1-t4)(t3-t2)), so CR(x,0,1,inf) = x.
double cross_ratio(double t1, double t2, double t3, double t4);

// Foot of the perpendicular from t2 onto the geodesic (t1, t3).
HypPoint foot_point(const IdealTriple& t);

// g_z . (0, 1, inf) for the upper-triangular g_z with g_z . i = z,
// i.e. (x, x + y, inf); a right inverse of foot_point.
IdealTriple section(const HypPoint& z);

// Second deterministic right inverse of foot_point, g_z . (-1, 1, inf);
// stays at bounded distance from section.
IdealTriple section_symmetric(const HypPoint& z);

// The unique upper-triangular positive-diagonal Mobius with g . i = z.
Mobius upper_triangular_at(const HypPoint& z);

// n equally weighted points of the geodesic circle of radius r about x,
// at uniformly spaced tangent angles: a quadrature of the exit distribution
// of Brownian motion started at the center.
std::vector<HypPoint> circle_points(const HypPoint& x, double r, int n);

// Integral of 1/sinh over [a, b], 0 < a <= b, relative error <= 1e-10.
double gamma_integral(double a, double b);

}  // namespace symharm
