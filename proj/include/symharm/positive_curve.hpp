#pragma once

#include <Eigen/Core>
#include <vector>

#include "symharm/flags.hpp"

namespace symharm {

// Piecewise-linear strictly increasing function, linearly extended beyond its
// breakpoints with the end slopes.
struct PiecewiseMonotone {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double operator()(double t) const;
};

// Validates strict monotonicity, inserts breakpoints at 0 and 1 if absent,
// and renormalizes affinely so the function maps 0 to 0 and 1 to 1.
PiecewiseMonotone make_piecewise_monotone(std::vector<double> breakpoints,
                                          std::vector<double> values);

// Curve of full flags driven by d-1 increasing functions: on each cell of the
// refined grid the unipotent frame moves by the exponential of the constant
// superdiagonal slope matrix, accumulated on the right so that the frame at
// the window start is the identity.
struct PositiveCurve {
  int d = 0;
  double window_lo = 0;
  double window_hi = 0;
  std::vector<double> grid;             // refined breakpoints, ends at the window
  Eigen::MatrixXd slopes;               // (d-1) x (grid cells)
  std::vector<Eigen::MatrixXd> prefix;  // unipotent frame at each grid point
  int zero_slope_cells = 0;

  int dim() const { return d; }
};

PositiveCurve build_curve(const std::vector<PiecewiseMonotone>& phis,
                          double window_lo, double window_hi);

// Unipotent frame n(t); exact finite polynomial on each cell.
Eigen::MatrixXd curve_unipotent(const PositiveCurve& c, double t);

// n(a)^{-1} n(b): the frame change over [a, b], totally positive when a < b
// and all slopes over the span are positive.
Eigen::MatrixXd curve_transition(const PositiveCurve& c, double a, double b);

Flag eval_flag(const PositiveCurve& c, double t);

// Flag adjoined at infinity; every frame stabilizes it.
Flag eval_flag_infinity(const PositiveCurve& c);

struct QsGrid {
  double x_lo = -8.0;
  double x_hi = 8.0;
  int x_count = 257;
  std::vector<double> t_values;  // empty: dyadic 2^-4 .. 2^3
};

// Sampled sup of max(r, 1/r) with r = (phi(x+t)-phi(x))/(phi(x)-phi(x-t));
// a lower bound for the true quasisymmetry constant.
double qs_constant(const PiecewiseMonotone& phi, const QsGrid& grid = {});

struct CurveQsResult {
  double k = 1.0;
  int skipped = 0;
};

// Sampled sup over symmetric parameter quadruples (x-t, x, x+t, inf) of
// max_i max(-CR_i, -1/CR_i) of the image flag quadruple; quadruples whose
// normalization degenerates are skipped and counted.
CurveQsResult curve_qs_constant(const PositiveCurve& c, const QsGrid& grid = {});

struct NontransverseReport {
  int count = 0;                  // sign changes plus tangential zeros
  std::vector<double> locations;  // refined by bisection / local minimization
  int tangential = 0;
};

// Zeros of t -> det[v | leading d-k frame columns] on a uniform sample grid
// over the window, with column normalization for scale stability.
NontransverseReport count_nontransverse(const PositiveCurve& c,
                                        const Eigen::MatrixXd& v, int samples);

// Second chart in the coordinate u = -1/t covering a neighborhood of
// infinity, with the frame change mapping original-chart flags into it and a
// continuity residual measured on overlapping samples.
struct FlipChart {
  PositiveCurve flipped;       // parameter u in [-1, 1]
  Eigen::MatrixXd transition;  // flipped flag(u) ~ transition * flag(-1/u)
  double overlap_error = 0;
};

FlipChart flip_chart(const PositiveCurve& c, int chart_samples = 129);

}  // namespace symharm
