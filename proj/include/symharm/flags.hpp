#pragma once

#include <stdexcept>
#include <vector>

#include "symharm/spd.hpp"

namespace symharm {

// Full flag of R^d stored as an invertible matrix whose first k columns span
// the k-th subspace. Construction canonicalizes to an orthonormal basis with
// positive leading pivots, so equal flags have equal matrices.
struct Flag {
  Eigen::MatrixXd basis;
  int dim() const { return static_cast<int>(basis.rows()); }
};

// Unit upper-triangular matrix; the diagonal is exactly 1 and the strict
// lower part exactly 0.
struct Unipotent {
  Eigen::MatrixXd n;
  int dim() const { return static_cast<int>(n.rows()); }
};

// Quadruple in the standard position (m * descending, descending,
// n * descending, ascending).
struct PositiveQuadruple {
  Unipotent m;
  Unipotent n;
  int dim() const { return m.dim(); }
};

struct TransverseResult {
  bool ok;
  double margin;  // smallest pairing minor magnitude over all levels
};

struct PositivityResult {
  bool ok;
  double margin;           // smallest admissible minor
  std::vector<int> rows;   // 1-based location of that minor
  std::vector<int> cols;
};

struct NormalizedTriple {
  Eigen::MatrixXd g;  // |det g| = 1; maps the triple to standard position
  Unipotent n;        // totally positive with unit superdiagonal when the
                      // input triple is positive
};

// Raised when a triple that should be positive presents a vanishing
// superdiagonal entry, or a quadruple fails a required minor.
struct PositivityViolationError : std::runtime_error {
  double minor_value;
  std::vector<int> rows;
  std::vector<int> cols;
  PositivityViolationError(const std::string& what, double value,
                           std::vector<int> r, std::vector<int> c)
      : std::runtime_error(what),
        minor_value(value),
        rows(std::move(r)),
        cols(std::move(c)) {}
};

Flag make_flag(const Eigen::MatrixXd& basis);
Flag standard_descending(int d);  // spanned by e_d, e_{d-1}, ..., e_1
Flag standard_ascending(int d);   // spanned by e_1, e_2, ..., e_d

Unipotent make_unipotent(const Eigen::MatrixXd& n);

TransverseResult transverse(const Flag& f1, const Flag& f2);

// Exhaustive minor test for unit upper-triangular matrices, d <= 6. A minor
// with rows i_1<...<i_k and columns j_1<...<j_k is admissible when i_l <= j_l
// for every l; all other minors vanish identically.
PositivityResult totally_positive(const Unipotent& n);

NormalizedTriple normalize_triple(const Flag& f1, const Flag& f2,
                                  const Flag& f3);

// Standard-position form of four pairwise transverse flags given in cyclic
// order; positivity is not checked here.
PositiveQuadruple standard_quadruple(const Flag& f1, const Flag& f2,
                                     const Flag& f3, const Flag& f4);

PositivityResult quadruple_positive(const Flag& f1, const Flag& f2,
                                    const Flag& f3, const Flag& f4);

// CR_i = m_{i,i+1} / n_{i,i+1} (negative on positive quadruples); i is
// 1-based with 1 <= i <= d-1.
double cross_ratio_i(const PositiveQuadruple& q, int i);
double cross_ratio_log(const PositiveQuadruple& q, int i);

SpdPoint project_pd(const Flag& f1, const Flag& f2, const Flag& f3);

// Unipotent n with f = n * standard_descending; requires f transverse to
// standard_ascending.
Unipotent big_cell_coordinates(const Flag& f);

// Sum over levels k of the Frobenius distance between the orthogonal
// projectors onto the k-dimensional pieces; zero iff the flags are equal.
double flag_distance(const Flag& a, const Flag& b);

}  // namespace symharm
