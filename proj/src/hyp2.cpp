#include "symharm/hyp2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symharm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_boundary(double s, double t) {
  if (is_infinite_boundary(s) || is_infinite_boundary(t))
    return is_infinite_boundary(s) && is_infinite_boundary(t);
  return s == t;
}

// Cyclic order predicate on R u {inf}: true iff walking the circle in the
// increasing-real direction from a reaches b before c.
bool cyclic(double a, double b, double c) {
  const bool ia = is_infinite_boundary(a);
  const bool ib = is_infinite_boundary(b);
  const bool ic = is_infinite_boundary(c);
  if (ia) return b < c;
  if (ib) return c < a;
  if (ic) return a < b;
  if (a < b) return b < c || c < a;
  return b < c && c < a;
}

}  // namespace

bool is_infinite_boundary(double t) { return std::isinf(t); }

HypPoint Mobius::apply(const HypPoint& z) const {
  // (az + b)(conj(cz + d)) / |cz + d|^2 for z = x + iy
  const double dn = (c * z.x + d) * (c * z.x + d) + c * c * z.y * z.y;
  if (dn == 0.0) throw std::domain_error("mobius: point maps to infinity");
  const double nx = (a * z.x + b) * (c * z.x + d) + a * c * z.y * z.y;
  const double ny = (a * d - b * c) * z.y;
  if (ny / dn <= 0.0) throw std::domain_error("mobius: orientation reversed");
  return {nx / dn, ny / dn};
}

double Mobius::apply_boundary(double t) const {
  if (is_infinite_boundary(t)) {
    if (c == 0.0) return kInf;
    return a / c;
  }
  const double dn = c * t + d;
  if (dn == 0.0) return kInf;
  return (a * t + b) / dn;
}

Mobius Mobius::inverse() const { return {d, -b, -c, a}; }

Mobius Mobius::compose(const Mobius& r) const {
  return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c,
          c * r.b + d * r.d};
}

IdealTriple make_ideal_triple(double t1, double t2, double t3) {
  if (same_boundary(t1, t2) || same_boundary(t2, t3) || same_boundary(t1, t3))
    throw std::domain_error("ideal triple: coincident points");
  IdealTriple t;
  t.t1 = t1;
  t.t2 = t2;
  t.t3 = t3;
  t.ccw = cyclic(t1, t2, t3);
  return t;
}

double hyp_distance(const HypPoint& p, const HypPoint& q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double u = (dx * dx + dy * dy) / (2.0 * p.y * q.y);
  // d = acosh(1 + u), evaluated as 2 asinh(sqrt(u/2)) for stability near 0
  return 2.0 * std::asinh(std::sqrt(0.5 * u));
}

double cross_ratio(double t1, double t2, double t3, double t4) {
  const double ts[4] = {t1, t2, t3, t4};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (same_boundary(ts[i], ts[j]))
        throw std::domain_error("cross_ratio: coincident points");
  // Factors containing an infinite entry cancel in pairs.
  double num = 1.0, den = 1.0;
  if (!is_infinite_boundary(t1)) {
    if (!is_infinite_boundary(t2)) num *= t1 - t2;
    if (!is_infinite_boundary(t4)) den *= t1 - t4;
  }
  if (!is_infinite_boundary(t3)) {
    if (!is_infinite_boundary(t4)) num *= t3 - t4;
    if (!is_infinite_boundary(t2)) den *= t3 - t2;
  }
  if (den == 0.0) throw std::domain_error("cross_ratio: degenerate");
  return num / den;
}

namespace {

// Mobius sending (t1, t2, t3) to (0, 1, inf), with infinities handled by
// dropping the cancelled factors.
Mobius normalizing_mobius(double t1, double t2, double t3) {
  if (is_infinite_boundary(t1)) return {0.0, t2 - t3, 1.0, -t3};
  if (is_infinite_boundary(t2)) return {1.0, -t1, 1.0, -t3};
  if (is_infinite_boundary(t3)) return {1.0, -t1, 0.0, t2 - t1};
  return {t2 - t3, -t1 * (t2 - t3), t2 - t1, -t3 * (t2 - t1)};
}

}  // namespace

HypPoint foot_point(const IdealTriple& t) {
  double a = t.t1, b = t.t2, c = t.t3;
  Mobius g = normalizing_mobius(a, b, c);
  if (g.det() < 0.0) {
    std::swap(a, c);
    g = normalizing_mobius(a, b, c);
  }
  if (g.det() == 0.0) throw std::domain_error("foot_point: degenerate triple");
  return g.inverse().apply({0.0, 1.0});
}

Mobius upper_triangular_at(const HypPoint& z) {
  const double s = std::sqrt(z.y);
  return {s, z.x / s, 0.0, 1.0 / s};
}

IdealTriple section(const HypPoint& z) {
  return make_ideal_triple(z.x, z.x + z.y, kInf);
}

IdealTriple section_symmetric(const HypPoint& z) {
  return make_ideal_triple(z.x - z.y, z.x + z.y, kInf);
}

std::vector<HypPoint> circle_points(const HypPoint& x, double r, int n) {
  if (!(r > 0.0)) throw std::domain_error("circle_points: r must be positive");
  if (n < 3) throw std::domain_error("circle_points: need n >= 3");
  const Mobius g = upper_triangular_at(x);
  std::vector<HypPoint> out;
  out.reserve(n);
  const double er = std::exp(r);
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * M_PI * k / n;
    // Rotation about i by tangent angle theta, as a Mobius matrix.
    const double phi = 0.5 * (M_PI / 2.0 - theta);
    const Mobius rot{std::cos(phi), std::sin(phi), -std::sin(phi),
                     std::cos(phi)};
    out.push_back(g.apply(rot.apply({0.0, er})));
  }
  return out;
}

namespace {

double csch(double s) { return 1.0 / std::sinh(s); }

// Adaptive Simpson with absolute tolerance budget.
double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(double a, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = csch(lm), frm = csch(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0) return left + right + delta / 15.0;
  if (std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double gamma_integral(double a, double b) {
  if (!(a > 0.0)) throw std::domain_error("gamma_integral: a must be > 0");
  if (!(b >= a)) throw std::domain_error("gamma_integral: need a <= b");
  if (a == b) return 0.0;
  const double fa = csch(a), fm = csch(0.5 * (a + b)), fb = csch(b);
  const double whole = simpson(a, b, fa, fm, fb);
  // Antiderivative log tanh(s/2) supplies the scale for the relative
  // tolerance; the value itself comes from the quadrature.
  const double scale = std::log(std::tanh(0.5 * b) / std::tanh(0.5 * a));
  const double tol = 0.5e-10 * scale;
  return adaptive(a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace symharm
