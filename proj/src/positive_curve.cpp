#include "symharm/positive_curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace symharm {

namespace {

// Finite polynomial sum; exact for strictly upper-triangular input.
Eigen::MatrixXd nilpotent_exp(const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
  for (int j = 1; j < d; ++j) {
    term = (term * a / j).eval();
    sum += term;
  }
  return sum;
}

Eigen::MatrixXd antidiagonal(int d) {
  Eigen::MatrixXd rev = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) rev(d - 1 - i, i) = 1.0;
  return rev;
}

std::vector<double> sorted_dedup(std::vector<double> xs, double tol) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

int cell_index(const PositiveCurve& c, double t) {
  const auto it = std::upper_bound(c.grid.begin(), c.grid.end(), t);
  int k = static_cast<int>(it - c.grid.begin()) - 1;
  const int cells = static_cast<int>(c.grid.size()) - 1;
  return std::clamp(k, 0, cells - 1);
}

void check_window(const PositiveCurve& c, double& t, const char* who) {
  const double slack = 1e-9 * (c.window_hi - c.window_lo);
  if (t < c.window_lo - slack || t > c.window_hi + slack)
    throw std::domain_error(std::string(who) + ": parameter outside window");
  t = std::clamp(t, c.window_lo, c.window_hi);
}

std::vector<double> dyadic_steps() {
  std::vector<double> ts;
  for (int e = -4; e <= 3; ++e) ts.push_back(std::ldexp(1.0, e));
  return ts;
}

}  // namespace

double PiecewiseMonotone::operator()(double t) const {
  const int n = static_cast<int>(breakpoints.size());
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  int k = static_cast<int>(it - breakpoints.begin()) - 1;
  k = std::clamp(k, 0, n - 2);
  const double w = (t - breakpoints[k]) / (breakpoints[k + 1] - breakpoints[k]);
  return values[k] + w * (values[k + 1] - values[k]);
}

PiecewiseMonotone make_piecewise_monotone(std::vector<double> breakpoints,
                                          std::vector<double> values) {
  if (breakpoints.size() != values.size() || breakpoints.size() < 2)
    throw std::domain_error(
        "make_piecewise_monotone: need two or more breakpoint/value pairs");
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw std::domain_error(
          "make_piecewise_monotone: breakpoints not strictly increasing");
    if (!(values[i] < values[i + 1]))
      throw std::domain_error(
          "make_piecewise_monotone: values not strictly increasing");
  }
  PiecewiseMonotone raw{std::move(breakpoints), std::move(values)};
  for (double anchor : {0.0, 1.0}) {
    const auto it = std::lower_bound(raw.breakpoints.begin(),
                                     raw.breakpoints.end(), anchor);
    if (it != raw.breakpoints.end() && *it == anchor) continue;
    const double v = raw(anchor);
    const size_t pos = it - raw.breakpoints.begin();
    raw.breakpoints.insert(raw.breakpoints.begin() + pos, anchor);
    raw.values.insert(raw.values.begin() + pos, v);
  }
  const double v0 = raw(0.0);
  const double v1 = raw(1.0);
  for (double& v : raw.values) v = (v - v0) / (v1 - v0);
  return raw;
}

PositiveCurve build_curve(const std::vector<PiecewiseMonotone>& phis,
                          double window_lo, double window_hi) {
  const int d = static_cast<int>(phis.size()) + 1;
  if (d < 2 || d > 6)
    throw std::domain_error("build_curve: need 1 to 5 driving functions");
  if (!(window_lo < window_hi))
    throw std::domain_error("build_curve: empty window");

  std::vector<double> knots{window_lo, window_hi};
  for (const auto& phi : phis)
    for (double b : phi.breakpoints)
      if (b > window_lo && b < window_hi) knots.push_back(b);
  const double tol = 1e-12 * std::max(1.0, window_hi - window_lo);

  PositiveCurve c;
  c.d = d;
  c.window_lo = window_lo;
  c.window_hi = window_hi;
  c.grid = sorted_dedup(std::move(knots), tol);

  const int cells = static_cast<int>(c.grid.size()) - 1;
  c.slopes.resize(d - 1, cells);
  for (int k = 0; k < cells; ++k) {
    const double dt = c.grid[k + 1] - c.grid[k];
    bool zero = false;
    for (int i = 0; i + 1 < d; ++i) {
      const double s = (phis[i](c.grid[k + 1]) - phis[i](c.grid[k])) / dt;
      if (s < 0)
        throw std::domain_error("build_curve: decreasing driving function");
      if (s == 0) zero = true;
      c.slopes(i, k) = s;
    }
    if (zero) ++c.zero_slope_cells;
  }

  c.prefix.reserve(cells + 1);
  c.prefix.push_back(Eigen::MatrixXd::Identity(d, d));
  for (int k = 0; k < cells; ++k) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    const double dt = c.grid[k + 1] - c.grid[k];
    for (int i = 0; i + 1 < d; ++i) a(i, i + 1) = dt * c.slopes(i, k);
    c.prefix.push_back(c.prefix.back() * nilpotent_exp(a));
  }

  if (c.zero_slope_cells == 0) {
    for (int k : {cells / 4, cells / 2, (3 * cells) / 4, cells}) {
      if (k < 1) continue;
      const PositivityResult res = totally_positive(make_unipotent(c.prefix[k]));
      if (!res.ok)
        throw PositivityViolationError(
            "build_curve: frame prefix not totally positive", res.margin,
            res.rows, res.cols);
    }
  }
  return c;
}

Eigen::MatrixXd curve_unipotent(const PositiveCurve& c, double t) {
  check_window(c, t, "curve_unipotent");
  const int k = cell_index(c, t);
  const int d = c.d;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  const double dt = t - c.grid[k];
  for (int i = 0; i + 1 < d; ++i) a(i, i + 1) = dt * c.slopes(i, k);
  return c.prefix[k] * nilpotent_exp(a);
}

Eigen::MatrixXd curve_transition(const PositiveCurve& c, double a, double b) {
  check_window(c, a, "curve_transition");
  check_window(c, b, "curve_transition");
  const int d = c.d;
  if (a > b)
    return curve_transition(c, b, a)
        .triangularView<Eigen::Upper>()
        .solve(Eigen::MatrixXd::Identity(d, d));
  // accumulate the cell exponentials spanning [a, b] so the accuracy depends
  // on the gap alone, not on where the pair sits inside the window
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(d, d);
  int k = cell_index(c, a);
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, c.grid[k + 1]);
    Eigen::MatrixXd arg = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) arg(i, i + 1) = (hi - lo) * c.slopes(i, k);
    out = out * nilpotent_exp(arg);
    lo = hi;
    ++k;
  }
  return out;
}

Flag eval_flag(const PositiveCurve& c, double t) {
  return make_flag(curve_unipotent(c, t) * antidiagonal(c.d));
}

Flag eval_flag_infinity(const PositiveCurve& c) {
  return standard_ascending(c.d);
}

double qs_constant(const PiecewiseMonotone& phi, const QsGrid& grid) {
  const std::vector<double> ts =
      grid.t_values.empty() ? dyadic_steps() : grid.t_values;
  double k = 1.0;
  for (int j = 0; j < grid.x_count; ++j) {
    const double x = grid.x_lo + (grid.x_hi - grid.x_lo) * j / (grid.x_count - 1);
    for (double t : ts) {
      const double num = phi(x + t) - phi(x);
      const double den = phi(x) - phi(x - t);
      if (!(num > 0) || !(den > 0)) continue;
      const double r = num / den;
      k = std::max({k, r, 1 / r});
    }
  }
  return k;
}

CurveQsResult curve_qs_constant(const PositiveCurve& c, const QsGrid& grid) {
  const std::vector<double> ts =
      grid.t_values.empty() ? dyadic_steps() : grid.t_values;
  const Flag finf = eval_flag_infinity(c);
  const Flag base = standard_descending(c.d);
  const Eigen::MatrixXd rev = antidiagonal(c.d);
  CurveQsResult res;
  for (int j = 0; j < grid.x_count; ++j) {
    const double x = grid.x_lo + (grid.x_hi - grid.x_lo) * j / (grid.x_count - 1);
    for (double t : ts) {
      if (x - t < c.window_lo || x + t > c.window_hi) {
        ++res.skipped;
        continue;
      }
      try {
        // work in the gauge of the middle parameter: the common frame change
        // fixes the flag at infinity and leaves every cross-ratio unchanged,
        // while the relative positions stay conditioned by the gap t alone,
        // not by the offset from the window start
        const PositiveQuadruple q = standard_quadruple(
            make_flag(curve_transition(c, x, x - t) * rev), base,
            make_flag(curve_transition(c, x, x + t) * rev), finf);
        for (int i = 1; i < c.d; ++i) {
          const double cr = cross_ratio_i(q, i);
          if (cr >= 0) throw std::domain_error("nonnegative cross-ratio");
          res.k = std::max({res.k, -cr, -1 / cr});
        }
      } catch (const std::domain_error&) {
        ++res.skipped;
      } catch (const PositivityViolationError&) {
        ++res.skipped;
      }
    }
  }
  return res;
}

NontransverseReport count_nontransverse(const PositiveCurve& c,
                                        const Eigen::MatrixXd& v, int samples) {
  const int d = c.d;
  const int k = static_cast<int>(v.cols());
  if (v.rows() != d || k < 1 || k >= d)
    throw std::domain_error("count_nontransverse: subspace dimension out of range");
  if (samples < 8)
    throw std::domain_error("count_nontransverse: too few samples");

  const Eigen::MatrixXd rev = antidiagonal(d);
  Eigen::MatrixXd vn = v;
  for (int j = 0; j < k; ++j) vn.col(j) /= vn.col(j).norm();

  const auto pairing = [&](double t) {
    Eigen::MatrixXd m(d, d);
    m.leftCols(k) = vn;
    Eigen::MatrixXd frame = (curve_unipotent(c, t) * rev).leftCols(d - k);
    for (int j = 0; j < d - k; ++j) frame.col(j) /= frame.col(j).norm();
    m.rightCols(d - k) = frame;
    return m.determinant();
  };

  std::vector<double> ts(samples), gs(samples);
  for (int i = 0; i < samples; ++i) {
    ts[i] = c.window_lo + (c.window_hi - c.window_lo) * i / (samples - 1);
    gs[i] = pairing(ts[i]);
  }

  NontransverseReport rep;
  const double spacing = (c.window_hi - c.window_lo) / (samples - 1);
  const auto known = [&](double t) {
    for (double loc : rep.locations)
      if (std::abs(loc - t) < spacing) return true;
    return false;
  };

  for (int i = 0; i + 1 < samples; ++i) {
    if (!(gs[i] * gs[i + 1] < 0)) continue;
    double lo = ts[i], hi = ts[i + 1], glo = gs[i];
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = pairing(mid);
      if (glo * gm <= 0)
        hi = mid;
      else
        lo = mid, glo = gm;
    }
    ++rep.count;
    rep.locations.push_back(0.5 * (lo + hi));
  }

  for (int i = 1; i + 1 < samples; ++i) {
    const double a = std::abs(gs[i]);
    if (a > 1e-3 || a >= std::abs(gs[i - 1]) || a > std::abs(gs[i + 1])) continue;
    double lo = ts[i - 1], hi = ts[i + 1];
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3;
      const double m2 = hi - (hi - lo) / 3;
      if (std::abs(pairing(m1)) < std::abs(pairing(m2)))
        hi = m2;
      else
        lo = m1;
    }
    const double t = 0.5 * (lo + hi);
    if (std::abs(pairing(t)) > 1e-9 || known(t)) continue;
    ++rep.count;
    ++rep.tangential;
    rep.locations.push_back(t);
  }

  std::sort(rep.locations.begin(), rep.locations.end());
  return rep;
}

FlipChart flip_chart(const PositiveCurve& c, int chart_samples) {
  const int d = c.d;
  if (!(c.window_lo < -1 && c.window_hi > 1))
    throw std::domain_error("flip_chart: window must contain [-1, 1] strictly");
  if (chart_samples < 9)
    throw std::domain_error("flip_chart: too few chart samples");

  const double u_neg = -1 / c.window_hi;  // data gap (u_neg, u_pos) around 0
  const double u_pos = -1 / c.window_lo;

  std::vector<double> us{-1.0, 0.0, 1.0};
  for (int j = 0; j < chart_samples; ++j) {
    const double u = -1 + 2.0 * j / (chart_samples - 1);
    if (u > u_neg && u < u_pos && u != 0) continue;
    us.push_back(u);
  }
  for (double t : c.grid)
    if (std::abs(t) >= 1) us.push_back(-1 / t);
  for (double& u : us)
    for (double anchor : {-1.0, 0.0, 1.0})
      if (std::abs(u - anchor) < 1e-10) u = anchor;
  us = sorted_dedup(std::move(us), 1e-10);

  const double t_mid = std::min(2.0, 0.5 * (1 + c.window_hi));
  const NormalizedTriple tri = normalize_triple(
      eval_flag(c, 1), eval_flag(c, t_mid), eval_flag(c, 0));
  const Eigen::MatrixXd h = tri.g;

  const int m = static_cast<int>(us.size());
  Eigen::MatrixXd psi(d - 1, m);
  for (int j = 0; j < m; ++j) {
    const Flag g = us[j] == 0 ? eval_flag_infinity(c) : eval_flag(c, -1 / us[j]);
    const Unipotent nj = big_cell_coordinates(make_flag(h * g.basis));
    for (int i = 0; i + 1 < d; ++i) psi(i, j) = nj.n(i, i + 1);
  }
  for (int i = 0; i + 1 < d; ++i)
    for (int j = 0; j + 1 < m; ++j)
      if (!(psi(i, j) < psi(i, j + 1)))
        throw std::domain_error(
            "flip_chart: extracted superdiagonal data not increasing");

  const int j0 =
      static_cast<int>(std::lower_bound(us.begin(), us.end(), 0.0) - us.begin());
  const int j1 =
      static_cast<int>(std::lower_bound(us.begin(), us.end(), 1.0) - us.begin());
  std::vector<PiecewiseMonotone> phis;
  Eigen::VectorXd scale(d - 1);
  for (int i = 0; i + 1 < d; ++i) {
    Eigen::VectorXd row = psi.row(i);
    std::vector<double> vals(row.data(), row.data() + m);
    phis.push_back(make_piecewise_monotone(us, std::move(vals)));
    scale(i) = 1 / (psi(i, j1) - psi(i, j0));
  }

  FlipChart flip;
  flip.flipped = build_curve(phis, -1, 1);

  // Affine renormalization of the extracted data rescales the superdiagonal,
  // which is conjugation by a torus element; fold it into the frame change.
  Eigen::VectorXd diag(d);
  diag(0) = 1;
  for (int i = 0; i + 1 < d; ++i) diag(i + 1) = diag(i) / scale(i);
  Eigen::MatrixXd trans = diag.asDiagonal() * h;
  trans /= std::pow(std::abs(trans.determinant()), 1.0 / d);
  flip.transition = trans;

  for (int j = 0; j + 1 < m; ++j) {
    const double u = 0.5 * (us[j] + us[j + 1]);
    if (u > u_neg && u < u_pos) continue;
    const Flag lhs = eval_flag(flip.flipped, u);
    const Flag rhs = make_flag(trans * eval_flag(c, -1 / u).basis);
    flip.overlap_error = std::max(flip.overlap_error, flag_distance(lhs, rhs));
  }
  return flip;
}

}  // namespace symharm
