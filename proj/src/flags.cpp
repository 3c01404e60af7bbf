#include "symharm/flags.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace symharm {
namespace {

void check_dims(const Flag& f1, const Flag& f2, const char* who) {
  if (f1.dim() != f2.dim())
    throw std::domain_error(std::string(who) + ": dimension mismatch");
}

// Orthonormal representative with positive diagonal of the triangular factor,
// so the representative depends only on the flag.
Eigen::MatrixXd canonical_basis(const Eigen::MatrixXd& basis) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int k = 0; k < basis.cols(); ++k)
    if (r(k, k) < 0) q.col(k) = -q.col(k);
  return q;
}

double minor_det(const Eigen::MatrixXd& a, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  const int k = static_cast<int>(rows.size());
  Eigen::MatrixXd sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = a(rows[i], cols[j]);
  return sub.determinant();
}

// All k-element subsets of {0, ..., d-1} in lexicographic order.
std::vector<std::vector<int>> subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == d - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Unit vector spanning the (one-dimensional) intersection of the two column
// spans, with a deterministic sign: its largest entry is positive.
Eigen::VectorXd span_intersection(const Eigen::MatrixXd& qa,
                                  const Eigen::MatrixXd& qb) {
  const int d = static_cast<int>(qa.rows());
  Eigen::MatrixXd stacked(2 * d, d);
  stacked.topRows(d) =
      Eigen::MatrixXd::Identity(d, d) - qa * qa.transpose();
  stacked.bottomRows(d) =
      Eigen::MatrixXd::Identity(d, d) - qb * qb.transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  Eigen::VectorXd w = svd.matrixV().col(d - 1);
  int arg = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(w(i)) > std::abs(w(arg))) arg = i;
  if (w(arg) < 0) w = -w;
  return w;
}

// Column reduction of an invertible matrix to pivots 1 on the antidiagonal
// (row d-k in column k, zeros below), by adding earlier columns to later
// ones. The result times the reversal permutation is unit upper-triangular.
Eigen::MatrixXd reduce_to_unipotent(Eigen::MatrixXd a, const char* who) {
  const int d = static_cast<int>(a.rows());
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < k; ++j) a.col(k) -= a(d - 1 - j, k) * a.col(j);
    const double pivot = a(d - 1 - k, k);
    if (std::abs(pivot) <= 1e-12 * std::max(1.0, a.col(k).norm()))
      throw std::domain_error(std::string(who) +
                              ": flags not transverse (vanishing pivot)");
    a.col(k) /= pivot;
  }
  Eigen::MatrixXd n(d, d);
  for (int k = 0; k < d; ++k) n.col(d - 1 - k) = a.col(k);
  // clean the exact part of the shape
  for (int i = 0; i < d; ++i) {
    n(i, i) = 1.0;
    for (int j = 0; j < i; ++j) n(i, j) = 0.0;
  }
  return n;
}

}  // namespace

Flag make_flag(const Eigen::MatrixXd& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 2 || basis.rows() > 6)
    throw std::domain_error("make_flag: need a square matrix, 2 <= d <= 6");
  Eigen::MatrixXd scaled = basis;
  for (int j = 0; j < scaled.cols(); ++j) {
    const double norm = scaled.col(j).norm();
    if (!(norm > 0) || !std::isfinite(norm))
      throw std::domain_error("make_flag: basis is numerically singular");
    scaled.col(j) /= norm;
  }
  Eigen::MatrixXd q = canonical_basis(scaled);
  // each column must leave a residual against the span of the previous ones;
  // the test is on the column-equilibrated basis so that scale drops out
  const Eigen::MatrixXd r = q.transpose() * scaled;
  for (int k = 0; k < r.rows(); ++k)
    if (std::abs(r(k, k)) <= 1e-12)
      throw std::domain_error("make_flag: basis is numerically singular");
  return {std::move(q)};
}

Flag standard_descending(int d) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) j(i, d - 1 - i) = 1.0;
  return {std::move(j)};
}

Flag standard_ascending(int d) { return {Eigen::MatrixXd::Identity(d, d)}; }

Unipotent make_unipotent(const Eigen::MatrixXd& n) {
  if (n.rows() != n.cols())
    throw std::domain_error("make_unipotent: need a square matrix");
  const int d = static_cast<int>(n.rows());
  Eigen::MatrixXd m = n;
  for (int i = 0; i < d; ++i) {
    if (std::abs(m(i, i) - 1.0) > 1e-9)
      throw std::domain_error("make_unipotent: diagonal must be 1");
    m(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      if (std::abs(m(i, j)) > 1e-9)
        throw std::domain_error("make_unipotent: lower part must vanish");
      m(i, j) = 0.0;
    }
  }
  return {std::move(m)};
}

TransverseResult transverse(const Flag& f1, const Flag& f2) {
  check_dims(f1, f2, "transverse");
  const int d = f1.dim();
  // relative position in orthonormal representatives; the level-k pairing is
  // the minor of the trailing k rows against the leading k columns
  const Eigen::MatrixXd m = f1.basis.transpose() * f2.basis;
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= d; ++k) {
    std::vector<int> rows(k), cols(k);
    for (int i = 0; i < k; ++i) {
      rows[i] = d - k + i;
      cols[i] = i;
    }
    margin = std::min(margin, std::abs(minor_det(m, rows, cols)));
  }
  return {margin > 1e-12, margin};
}

PositivityResult totally_positive(const Unipotent& n) {
  const int d = n.dim();
  if (d > 6)
    throw std::domain_error(
        "totally_positive: exhaustive enumeration supports d <= 6");
  PositivityResult best{true, std::numeric_limits<double>::infinity(), {}, {}};
  for (int k = 1; k <= d; ++k) {
    const auto rows_list = subsets(d, k);
    for (const auto& rows : rows_list) {
      for (const auto& cols : rows_list) {
        bool admissible = true;
        for (int l = 0; l < k; ++l)
          if (rows[l] > cols[l]) {
            admissible = false;
            break;
          }
        if (!admissible) continue;
        const double value = minor_det(n.n, rows, cols);
        if (value < best.margin) {
          best.margin = value;
          best.rows.assign(rows.begin(), rows.end());
          best.cols.assign(cols.begin(), cols.end());
          for (int& r : best.rows) ++r;  // report 1-based
          for (int& c : best.cols) ++c;
        }
      }
    }
  }
  best.ok = best.margin > 0;
  return best;
}

NormalizedTriple normalize_triple(const Flag& f1, const Flag& f2,
                                  const Flag& f3) {
  check_dims(f1, f2, "normalize_triple");
  check_dims(f1, f3, "normalize_triple");
  const int d = f1.dim();
  if (!transverse(f1, f2).ok || !transverse(f1, f3).ok ||
      !transverse(f2, f3).ok)
    throw std::domain_error("normalize_triple: flags not pairwise transverse");

  // Column k of w spans (subspace d-k of f1) meet (subspace k+1 of f3); its
  // inverse sends f3 to the ascending flag and f1 to the descending one.
  Eigen::MatrixXd w(d, d);
  for (int k = 0; k < d; ++k)
    w.col(k) = span_intersection(f1.basis.leftCols(d - k),
                                 f3.basis.leftCols(k + 1));
  const Eigen::MatrixXd g0 = w.inverse();

  const Eigen::MatrixXd n0 =
      reduce_to_unipotent(g0 * f2.basis, "normalize_triple");

  // kill the torus freedom: conjugating by diag(t) scales the superdiagonal
  // entry i by t_{i+1}/t_i, so t_{i+1} = t_i / n0_{i,i+1} makes them all 1
  Eigen::VectorXd t(d);
  t(0) = 1.0;
  for (int i = 0; i + 1 < d; ++i) {
    const double s = n0(i, i + 1);
    if (std::abs(s) <= 1e-12)
      throw PositivityViolationError(
          "normalize_triple: vanishing superdiagonal entry", s, {i + 1},
          {i + 2});
    t(i + 1) = t(i) / s;
  }
  Eigen::MatrixXd n1 = t.cwiseInverse().asDiagonal() * n0 * t.asDiagonal();
  for (int i = 0; i + 1 < d; ++i) n1(i, i + 1) = 1.0;

  Eigen::MatrixXd g = t.cwiseInverse().asDiagonal() * g0;
  g /= std::pow(std::abs(g.determinant()), 1.0 / d);
  return {std::move(g), {std::move(n1)}};
}

PositiveQuadruple standard_quadruple(const Flag& f1, const Flag& f2,
                                     const Flag& f3, const Flag& f4) {
  NormalizedTriple tri = normalize_triple(f2, f3, f4);
  Eigen::MatrixXd m =
      reduce_to_unipotent(tri.g * f1.basis, "standard_quadruple");
  return {{std::move(m)}, std::move(tri.n)};
}

PositivityResult quadruple_positive(const Flag& f1, const Flag& f2,
                                    const Flag& f3, const Flag& f4) {
  PositiveQuadruple q{{}, {}};
  try {
    q = standard_quadruple(f1, f2, f3, f4);
  } catch (const PositivityViolationError& e) {
    return {false, e.minor_value, e.rows, e.cols};
  }
  const PositivityResult rn = totally_positive(q.n);
  if (!rn.ok) return rn;
  const Eigen::MatrixXd minv = q.m.n.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(q.dim(), q.dim()));
  const PositivityResult rm = totally_positive({minv});
  return rm.margin < rn.margin ? rm : rn;
}

double cross_ratio_i(const PositiveQuadruple& q, int i) {
  const int d = q.dim();
  if (i < 1 || i > d - 1)
    throw std::domain_error("cross_ratio_i: index out of range");
  const double n = q.n.n(i - 1, i);
  if (std::abs(n) <= 1e-12)
    throw std::domain_error("cross_ratio_i: degenerate quadruple");
  return q.m.n(i - 1, i) / n;
}

double cross_ratio_log(const PositiveQuadruple& q, int i) {
  const double cr = cross_ratio_i(q, i);
  if (cr >= 0)
    throw std::domain_error("cross_ratio_log: cross-ratio is not negative");
  return std::log(-cr);
}

SpdPoint project_pd(const Flag& f1, const Flag& f2, const Flag& f3) {
  const NormalizedTriple tri = normalize_triple(f1, f2, f3);
  return congruence(tri.g.inverse(), spd_identity(f1.dim()));
}

Unipotent big_cell_coordinates(const Flag& f) {
  return make_unipotent(reduce_to_unipotent(f.basis, "big_cell_coordinates"));
}

double flag_distance(const Flag& a, const Flag& b) {
  check_dims(a, b, "flag_distance");
  const int d = a.dim();
  double sum = 0;
  for (int k = 1; k < d; ++k) {
    const Eigen::MatrixXd qa = a.basis.leftCols(k);
    const Eigen::MatrixXd qb = b.basis.leftCols(k);
    sum += (qa * qa.transpose() - qb * qb.transpose()).norm();
  }
  return sum;
}

}  // namespace symharm
