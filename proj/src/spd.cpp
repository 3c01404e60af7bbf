#include "symharm/spd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace symharm {
namespace {

void check_square(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() < 2 || m.rows() != m.cols())
    throw std::domain_error(std::string(who) +
                            ": need a square matrix of size >= 2");
}

struct SymEig {
  Eigen::VectorXd w;  // ascending
  Eigen::MatrixXd q;
};

SymEig sym_eig(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::domain_error("sym_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

struct SqrtPair {
  Eigen::MatrixXd r;   // m^{1/2}
  Eigen::MatrixXd ri;  // m^{-1/2}
};

SqrtPair spd_sqrt_pair(const Eigen::MatrixXd& m, const char* who) {
  const SymEig e = sym_eig(m);
  if (!(e.w.minCoeff() > 0))
    throw std::domain_error(std::string(who) + ": not positive definite");
  const Eigen::VectorXd s = e.w.cwiseSqrt();
  SqrtPair out;
  out.r = e.q * s.asDiagonal() * e.q.transpose();
  out.ri = e.q * s.cwiseInverse().asDiagonal() * e.q.transpose();
  return out;
}

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& a, const char* who) {
  const SymEig e = sym_eig(a);
  if (!(e.w.minCoeff() > 0))
    throw std::domain_error(std::string(who) + ": not positive definite");
  return e.q * e.w.array().log().matrix().asDiagonal() * e.q.transpose();
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& a) {
  const SymEig e = sym_eig(a);
  return e.q * e.w.array().exp().matrix().asDiagonal() * e.q.transpose();
}

Eigen::MatrixXd renorm_det(const Eigen::MatrixXd& m) {
  const double det = m.determinant();
  if (!(det > 0))
    throw std::domain_error("renorm_det: nonpositive determinant");
  return m * std::pow(det, -1.0 / static_cast<double>(m.rows()));
}

// p = u diag(dv) u^T with u unit upper triangular, eliminating from the
// bottom-right corner; the pivots dv stay positive for positive definite p.
void udu_factor(const Eigen::MatrixXd& p, Eigen::MatrixXd& u,
                Eigen::VectorXd& dv) {
  const int d = static_cast<int>(p.rows());
  u = Eigen::MatrixXd::Identity(d, d);
  dv = Eigen::VectorXd::Zero(d);
  for (int j = d - 1; j >= 0; --j) {
    double acc = p(j, j);
    for (int k = j + 1; k < d; ++k) acc -= u(j, k) * u(j, k) * dv(k);
    if (!(acc > 0))
      throw std::domain_error("udu_factor: matrix not positive definite");
    dv(j) = acc;
    for (int i = j - 1; i >= 0; --i) {
      double s = p(i, j);
      for (int k = j + 1; k < d; ++k) s -= u(i, k) * u(j, k) * dv(k);
      u(i, j) = s / dv(j);
    }
  }
}

void check_ideal(const IdealPoint& eta, const SpdPoint& p, const char* who) {
  if (eta.dim() != p.dim())
    throw std::domain_error(std::string(who) + ": dimension mismatch");
}

// Log singular values by one-sided Jacobi on the columns; columns may carry
// wildly different scales, which this handles in extended precision.
std::array<long double, 6> jacobi_log_singular(
    std::array<std::array<long double, 6>, 6>& col, int d) {
  const long double tol = 1e-24L;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (int a = 0; a < d - 1; ++a)
      for (int b = a + 1; b < d; ++b) {
        long double paa = 0, pbb = 0, pab = 0;
        for (int i = 0; i < d; ++i) {
          paa += col[a][i] * col[a][i];
          pbb += col[b][i] * col[b][i];
          pab += col[a][i] * col[b][i];
        }
        if (pab == 0 || fabsl(pab) <= tol * sqrtl(paa) * sqrtl(pbb)) continue;
        rotated = true;
        const long double tau = (pbb - paa) / (2 * pab);
        const long double t =
            (tau >= 0 ? 1.0L : -1.0L) / (fabsl(tau) + sqrtl(1 + tau * tau));
        const long double c = 1 / sqrtl(1 + t * t), s = t * c;
        for (int i = 0; i < d; ++i) {
          const long double va = col[a][i], vb = col[b][i];
          col[a][i] = c * va - s * vb;
          col[b][i] = s * va + c * vb;
        }
      }
    if (!rotated) break;
  }
  std::array<long double, 6> out{};
  for (int a = 0; a < d; ++a) {
    long double scale = 0;
    for (int i = 0; i < d; ++i) scale = std::max(scale, fabsl(col[a][i]));
    long double nrm = 0;
    for (int i = 0; i < d; ++i) {
      const long double r = col[a][i] / scale;
      nrm += r * r;
    }
    out[a] = logl(scale) + 0.5L * logl(nrm);
  }
  return out;
}

// Isotonic regression onto non-increasing sequences (pool adjacent violators).
Eigen::VectorXd pav_descending(const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  std::vector<double> val;
  std::vector<int> cnt;
  val.reserve(n);
  cnt.reserve(n);
  for (int i = 0; i < n; ++i) {
    val.push_back(z(i));
    cnt.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] < val.back()) {
      const double merged =
          (val[val.size() - 2] * cnt[cnt.size() - 2] + val.back() * cnt.back()) /
          (cnt[cnt.size() - 2] + cnt.back());
      const int c = cnt[cnt.size() - 2] + cnt.back();
      val.pop_back();
      cnt.pop_back();
      val.back() = merged;
      cnt.back() = c;
    }
  }
  Eigen::VectorXd out(n);
  int pos = 0;
  for (size_t b = 0; b < val.size(); ++b)
    for (int k = 0; k < cnt[b]; ++k) out(pos++) = val[b];
  return out;
}

// Nearest point in the closed chamber cone (non-increasing, sum 0); the
// monotone cone is invariant under adding constants, so projecting is
// isotonic regression followed by centering.
Eigen::VectorXd chamber_project(const Eigen::VectorXd& z) {
  Eigen::VectorXd y = pav_descending(z);
  y.array() -= y.mean();
  return y;
}

// Extreme rays of the chamber cone, unit length: k leading ones, centered.
std::vector<Eigen::VectorXd> chamber_extreme_rays(int d) {
  std::vector<Eigen::VectorXd> rays;
  for (int k = 1; k < d; ++k) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < k; ++i) w(i) = 1.0;
    w.array() -= w.mean();
    rays.push_back(w / w.norm());
  }
  return rays;
}

std::vector<std::vector<int>> block_permutations(
    const std::vector<std::vector<int>>& blocks, int d) {
  std::vector<std::vector<int>> perms;
  std::vector<int> base(d);
  std::iota(base.begin(), base.end(), 0);
  perms.push_back(base);
  for (const auto& blk : blocks) {
    if (blk.size() < 2) continue;
    std::vector<int> order(blk.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<int>> grown;
    do {
      for (const auto& p : perms) {
        std::vector<int> q = p;
        for (size_t i = 0; i < blk.size(); ++i) q[blk[i]] = p[blk[order[i]]];
        grown.push_back(std::move(q));
      }
    } while (std::next_permutation(order.begin(), order.end()));
    perms = std::move(grown);
  }
  return perms;
}

}  // namespace

SpdPoint spd_identity(int d) {
  if (d < 2) throw std::domain_error("spd_identity: need dimension >= 2");
  return {Eigen::MatrixXd::Identity(d, d)};
}

SpdPoint make_spd(const Eigen::MatrixXd& m) {
  check_square(m, "make_spd");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-9 * scale)
    throw std::domain_error("make_spd: matrix is not symmetric");
  Eigen::MatrixXd s = symmetrize(m);
  const SymEig e = sym_eig(s);
  if (!(e.w.minCoeff() > 0))
    throw std::domain_error("make_spd: matrix is not positive definite");
  const double logdet = e.w.array().log().sum();
  s *= std::exp(-logdet / static_cast<double>(s.rows()));
  return {s};
}

SpdPoint congruence(const Eigen::MatrixXd& g, const SpdPoint& p) {
  check_square(g, "congruence");
  if (g.rows() != p.m.rows())
    throw std::domain_error("congruence: dimension mismatch");
  Eigen::MatrixXd r = symmetrize(g * p.m * g.transpose());
  const SymEig e = sym_eig(r);
  if (!(e.w.minCoeff() > 0))
    throw std::domain_error("congruence: transform is singular");
  const double logdet = e.w.array().log().sum();
  r *= std::exp(-logdet / static_cast<double>(r.rows()));
  return {r};
}

CartanVector fold_to_chamber(const Eigen::VectorXd& raw) {
  Eigen::VectorXd v = raw;
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  v.array() -= v.mean();
  return {v};
}

double root_functional(const CartanVector& w, int i) {
  if (i < 1 || i >= w.dim())
    throw std::domain_error("root_functional: index out of range");
  return kRootGapScale * (w.v(i - 1) - w.v(i));
}

CartanVector vector_distance(const SpdPoint& p, const SpdPoint& q) {
  if (p.dim() != q.dim())
    throw std::domain_error("vector_distance: dimension mismatch");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      q.m, p.m, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  const Eigen::VectorXd lam = es.eigenvalues();  // ascending
  if (!(lam.minCoeff() > 0))
    throw std::domain_error("vector_distance: inputs not positive definite");
  const int d = p.dim();
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = std::log(lam(d - 1 - i));
  v.array() -= v.mean();
  return {v};
}

double distance(const SpdPoint& p, const SpdPoint& q) {
  return kMetricScale * vector_distance(p, q).v.norm();
}

CartanVector vector_distance_factored(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
    throw std::domain_error("vector_distance_factored: dimension mismatch");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  const Eigen::MatrixXd rel = lu.solve(a);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rel);
  const Eigen::VectorXd sigma = svd.singularValues();
  if (!(sigma.minCoeff() > 0) || !std::isfinite(sigma.maxCoeff()))
    throw std::domain_error("vector_distance_factored: factor not invertible");
  const int n = int(sigma.size());
  Eigen::VectorXd logs(n);
  for (int i = 0; i < n; ++i) logs(i) = 2.0 * std::log(sigma(i));
  // the smallest singular value loses all relative accuracy once the spread
  // exceeds 1/eps; recover it from the determinant, which both LU
  // factorizations deliver with relative accuracy independent of the spread
  double logdet = -lu.matrixLU().diagonal().array().abs().log().sum();
  logdet += a.partialPivLu().matrixLU().diagonal().array().abs().log().sum();
  logs(n - 1) = 2.0 * logdet - logs.head(n - 1).sum();
  return fold_to_chamber(logs);
}

double distance_factored(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return kMetricScale * vector_distance_factored(a, b).v.norm();
}

SpdPoint geodesic(const SpdPoint& p, const SpdPoint& q, double t) {
  const SqrtPair sp = spd_sqrt_pair(p.m, "geodesic");
  const Eigen::MatrixXd a = symmetrize(sp.ri * q.m * sp.ri);
  const SymEig ea = sym_eig(a);
  if (!(ea.w.minCoeff() > 0))
    throw std::domain_error("geodesic: inputs not positive definite");
  const Eigen::VectorXd wt =
      (t * ea.w.array().log()).exp().matrix();
  const Eigen::MatrixXd mid = ea.q * wt.asDiagonal() * ea.q.transpose();
  return {renorm_det(symmetrize(sp.r * mid * sp.r))};
}

TangentSym log_map(const SpdPoint& base, const SpdPoint& q) {
  if (base.dim() != q.dim())
    throw std::domain_error("log_map: dimension mismatch");
  const SqrtPair sb = spd_sqrt_pair(base.m, "log_map");
  Eigen::MatrixXd s =
      symmetrize(sym_log(symmetrize(sb.ri * q.m * sb.ri), "log_map"));
  s -= (s.trace() / s.rows()) * Eigen::MatrixXd::Identity(s.rows(), s.cols());
  return {s, base};
}

SpdPoint exp_map(const TangentSym& x) {
  const SqrtPair sb = spd_sqrt_pair(x.base.m, "exp_map");
  const Eigen::MatrixXd e = sym_exp(symmetrize(x.s));
  return {renorm_det(symmetrize(sb.r * e * sb.r))};
}

double tangent_norm(const TangentSym& x) { return kMetricScale * x.s.norm(); }

double tangent_inner(const TangentSym& x, const TangentSym& y) {
  if (x.s.rows() != y.s.rows())
    throw std::domain_error("tangent_inner: dimension mismatch");
  return kMetricScale * kMetricScale * x.s.cwiseProduct(y.s).sum();
}

SpdPoint karcher_mean(const std::vector<SpdPoint>& points,
                      const std::vector<double>& weights, double tol,
                      int max_iter, const SpdPoint* init) {
  if (points.empty() || points.size() != weights.size())
    throw std::domain_error("karcher_mean: need matching points and weights");
  double wsum = 0;
  for (double w : weights) {
    if (w < 0) throw std::domain_error("karcher_mean: negative weight");
    wsum += w;
  }
  if (!(wsum > 0))
    throw std::domain_error("karcher_mean: weights must not all vanish");
  const int d = points[0].dim();
  SpdPoint h;
  if (init) {
    h = *init;
  } else {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (size_t i = 0; i < points.size(); ++i) acc += weights[i] * points[i].m;
    h = make_spd(acc / wsum);
  }
  std::vector<double> history;
  for (int it = 0; it < max_iter; ++it) {
    const SqrtPair sh = spd_sqrt_pair(h.m, "karcher_mean");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (size_t i = 0; i < points.size(); ++i) {
      if (weights[i] == 0) continue;
      const Eigen::MatrixXd a = symmetrize(sh.ri * points[i].m * sh.ri);
      s += weights[i] * sym_log(a, "karcher_mean");
    }
    s = symmetrize(s / wsum);
    const double residual = kMetricScale * s.norm();
    history.push_back(residual);
    if (residual <= tol) return h;
    h.m = renorm_det(symmetrize(sh.r * sym_exp(s) * sh.r));
  }
  throw ConvergenceError("karcher_mean: residual did not reach tolerance",
                         history);
}

Eigen::MatrixXd karcher_mean_factored(
    const std::vector<Eigen::MatrixXd>& factors,
    const std::vector<double>& weights, double tol, int max_iter,
    const Eigen::MatrixXd* init) {
  if (factors.empty() || factors.size() != weights.size())
    throw std::domain_error(
        "karcher_mean_factored: need matching factors and weights");
  double wsum = 0;
  for (double w : weights) {
    if (w < 0) throw std::domain_error("karcher_mean_factored: negative weight");
    wsum += w;
  }
  if (!(wsum > 0))
    throw std::domain_error(
        "karcher_mean_factored: weights must not all vanish");
  const int d = static_cast<int>(factors[0].rows());
  for (const Eigen::MatrixXd& f : factors)
    if (f.rows() != d || f.cols() != d)
      throw std::domain_error("karcher_mean_factored: dimension mismatch");
  Eigen::MatrixXd g = init ? *init : factors[0];
  std::vector<double> history;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(g);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (size_t i = 0; i < factors.size(); ++i) {
      if (weights[i] == 0) continue;
      const Eigen::MatrixXd b = lu.solve(factors[i]);
      s += weights[i] * sym_log(symmetrize(b * b.transpose()),
                                "karcher_mean_factored");
    }
    s = symmetrize(s / wsum);
    const double residual = kMetricScale * s.norm();
    history.push_back(residual);
    if (residual <= tol) return g;
    // moving the base by exp(s/2) on the right moves the point g g^T along
    // the geodesic with tangent s, without ever assembling the product
    g = g * sym_exp(0.5 * s);
    g *= std::pow(std::abs(g.determinant()), -1.0 / d);
  }
  throw ConvergenceError(
      "karcher_mean_factored: residual did not reach tolerance", history);
}

IdealPoint make_ideal(const Eigen::MatrixXd& frame,
                      const Eigen::VectorXd& type_raw) {
  check_square(frame, "make_ideal");
  const int d = static_cast<int>(frame.rows());
  if (type_raw.size() != d)
    throw std::domain_error("make_ideal: type length must match frame size");
  if ((frame.transpose() * frame - Eigen::MatrixXd::Identity(d, d)).norm() >
      1e-9)
    throw std::domain_error("make_ideal: frame is not orthogonal");
  // polish to an exactly orthogonal representative
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  Eigen::VectorXd v = type_raw;
  v.array() -= v.mean();
  for (int i = 0; i + 1 < d; ++i)
    if (v(i) < v(i + 1) - 1e-12)
      throw std::domain_error("make_ideal: type must be sorted non-increasing");
  const double nrm = v.norm();
  if (!(nrm > 0)) throw std::domain_error("make_ideal: type must be nonzero");
  v *= std::sqrt(2.0) / nrm;  // metric norm 1
  return {q, {v}};
}

IdealPoint opposite(const IdealPoint& eta) {
  const int d = eta.dim();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) j(i, d - 1 - i) = 1.0;
  return make_ideal(eta.frame * j, eta.type_vec.v.reverse() * -1.0);
}

SpdPoint ray_point(const IdealPoint& eta, double t) {
  const Eigen::VectorXd e = (t * eta.type_vec.v.array()).exp().matrix();
  return {symmetrize(eta.frame * e.asDiagonal() * eta.frame.transpose())};
}

double busemann(const IdealPoint& eta, const SpdPoint& p) {
  check_ideal(eta, p, "busemann");
  const Eigen::MatrixXd pf =
      symmetrize(eta.frame.transpose() * p.m * eta.frame);
  Eigen::MatrixXd u;
  Eigen::VectorXd dv;
  udu_factor(pf, u, dv);
  return -0.5 * eta.type_vec.v.dot(dv.array().log().matrix());
}

double busemann_factored(const IdealPoint& eta, const Eigen::MatrixXd& f) {
  const int d = eta.dim();
  if (f.rows() != d || f.cols() != d)
    throw std::domain_error("busemann_factored: dimension mismatch");
  // the pivots of the unit-triangular factorization of (Q^T f)(Q^T f)^T are
  // the squared diagonal of the triangular part of an RQ factorization of
  // Q^T f, obtained from a QR factorization after reversing rows and columns
  const Eigen::MatrixXd b = eta.frame.transpose() * f;
  Eigen::MatrixXd c(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c(i, j) = b(d - 1 - j, d - 1 - i);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double piv = std::abs(diag(d - 1 - i));
    if (!(piv > 0) || !std::isfinite(piv))
      throw std::domain_error("busemann_factored: factor not invertible");
    s += eta.type_vec.v(i) * std::log(piv);
  }
  return -s;
}

double busemann_truncated(const IdealPoint& eta, const SpdPoint& p,
                          double horizon) {
  check_ideal(eta, p, "busemann_truncated");
  if (!(horizon > 0))
    throw std::domain_error("busemann_truncated: horizon must be positive");
  const int d = eta.dim();
  const Eigen::MatrixXd pf =
      symmetrize(eta.frame.transpose() * p.m * eta.frame);
  // pf = L L^T in extended precision
  std::array<std::array<long double, 6>, 6> lo{};
  for (int j = 0; j < d; ++j) {
    long double acc = pf(j, j);
    for (int k = 0; k < j; ++k) acc -= lo[j][k] * lo[j][k];
    if (!(acc > 0))
      throw std::domain_error("busemann_truncated: not positive definite");
    lo[j][j] = sqrtl(acc);
    for (int i = j + 1; i < d; ++i) {
      long double s = pf(i, j);
      for (int k = 0; k < j; ++k) s -= lo[i][k] * lo[j][k];
      lo[i][j] = s / lo[j][j];
    }
  }
  // singular values of ray(horizon)^{-1/2} L, columns scaled to keep the
  // graded structure one-sided for the Jacobi sweep
  std::array<std::array<long double, 6>, 6> col{};
  for (int j = 0; j < d; ++j) {
    const long double f =
        expl(-0.5L * static_cast<long double>(horizon) *
             static_cast<long double>(eta.type_vec.v(j)));
    for (int i = 0; i < d; ++i) col[j][i] = lo[j][i] * f;  // column j = L^T e_j scaled
  }
  const auto lsv = jacobi_log_singular(col, d);
  long double ss = 0;
  for (int i = 0; i < d; ++i) {
    const long double l2 = 2 * lsv[i];
    ss += l2 * l2;
  }
  return static_cast<double>(static_cast<long double>(kMetricScale) *
                                 sqrtl(ss) -
                             static_cast<long double>(horizon));
}

double busemann_limit_estimate(const IdealPoint& eta, const SpdPoint& p,
                               double horizon) {
  const double b1 = busemann_truncated(eta, p, 0.25 * horizon);
  const double b2 = busemann_truncated(eta, p, 0.5 * horizon);
  const double b3 = busemann_truncated(eta, p, horizon);
  const double r1 = 2 * b2 - b1;
  const double r2 = 2 * b3 - b2;
  return (4 * r2 - r1) / 3;
}

namespace {

// log of a trailing minor of a e^{tv} a^T as a cancellation-free
// log-sum-exp over column subsets.
double log_trailing_minor(const Eigen::MatrixXd& a, const Eigen::VectorXd& tv,
                          int from) {
  const int d = static_cast<int>(a.rows());
  const int k = d - from;
  if (k == 0) return 0.0;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> terms;
  while (true) {
    Eigen::MatrixXd sub(k, k);
    double esum = 0;
    for (int c = 0; c < k; ++c) {
      esum += tv(idx[c]);
      for (int r = 0; r < k; ++r) sub(r, c) = a(from + r, idx[c]);
    }
    // minors of the orthogonal frame product that vanish exactly reappear as
    // roundoff; at large horizons such phantom terms would dominate, so drop
    // anything below the noise floor (true minors are at most 1)
    const double det = sub.determinant();
    if (std::abs(det) > 1e-10) terms.push_back(2 * std::log(std::abs(det)) + esum);
    // next k-subset of {0..d-1}
    int i = k - 1;
    while (i >= 0 && idx[i] == d - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (terms.empty())
    throw std::domain_error("log_trailing_minor: vanishing minor");
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// Busemann value at the ray point frame_a e^{tv} frame_a^T expressed in the
// frame of eta, stable for large t.
double busemann_at_ray(const IdealPoint& eta, const Eigen::MatrixXd& a,
                       const Eigen::VectorXd& tv) {
  const int d = static_cast<int>(a.rows());
  double acc = 0;
  double prev = 0;  // log trailing minor from index d (empty)
  for (int j = d - 1; j >= 0; --j) {
    const double cur = log_trailing_minor(a, tv, j);
    acc += eta.type_vec.v(j) * (cur - prev);
    prev = cur;
  }
  return -0.5 * acc;
}

}  // namespace

double slope(const IdealPoint& eta, const IdealPoint& xi) {
  if (eta.dim() != xi.dim())
    throw std::domain_error("slope: dimension mismatch");
  const Eigen::MatrixXd m = eta.frame.transpose() * xi.frame;
  const Eigen::MatrixXd s =
      symmetrize(m * xi.type_vec.v.asDiagonal() * m.transpose());
  Eigen::MatrixXd off = s;
  off.diagonal().setZero();
  if (off.norm() <= 1e-9) {
    // shared flat: minus the flat angle cosine of the two unit types
    return -0.5 * eta.type_vec.v.dot(s.diagonal());
  }
  const double t = 1000.0;
  const double bt = busemann_at_ray(eta, m, t * xi.type_vec.v);
  const double b0 = busemann_at_ray(eta, m, 0.0 * xi.type_vec.v);
  return (bt - b0) / t;
}

double separation(int d, const std::vector<int>& theta, double tol) {
  if (d < 2 || d > 6) throw std::domain_error("separation: need 2 <= d <= 6");
  if (theta.empty())
    throw std::domain_error("separation: theta must be non-empty");
  std::vector<bool> in_theta(d, false);
  for (int t : theta) {
    if (t < 1 || t > d - 1)
      throw std::domain_error("separation: gap index out of range");
    in_theta[t] = true;
  }
  // positions i, i+1 mix when gap i+1 is outside theta
  std::vector<std::vector<int>> blocks;
  blocks.push_back({0});
  for (int i = 1; i < d; ++i) {
    if (!in_theta[i])
      blocks.back().push_back(i);
    else
      blocks.push_back({i});
  }
  const auto perms = block_permutations(blocks, d);
  const auto rays = chamber_extreme_rays(d);

  double best = -2.0;
  for (const auto& perm : perms) {
    auto apply = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(d);
      for (int i = 0; i < d; ++i) y(perm[i]) = x(i);
      return y;
    };
    auto unapply = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(d);
      for (int i = 0; i < d; ++i) y(i) = x(perm[i]);
      return y;
    };
    // best unit vector of the permuted chamber against a fixed direction
    auto cone_argmax = [&](const Eigen::VectorXd& dir) {
      Eigen::VectorXd p = apply(chamber_project(unapply(dir)));
      double score = -2.0;
      Eigen::VectorXd bestx;
      if (p.norm() > 1e-13) {
        bestx = p / p.norm();
        score = bestx.dot(dir);
      }
      for (const auto& r : rays) {
        const Eigen::VectorXd c = apply(r);
        if (c.dot(dir) > score) {
          score = c.dot(dir);
          bestx = c;
        }
      }
      return bestx;
    };
    auto opp_argmax = [&](const Eigen::VectorXd& dir) {
      Eigen::VectorXd p = -chamber_project(-dir);
      double score = -2.0;
      Eigen::VectorXd besty;
      if (p.norm() > 1e-13) {
        besty = p / p.norm();
        score = besty.dot(dir);
      }
      for (const auto& r : rays) {
        if (-r.dot(dir) > score) {
          score = -r.dot(dir);
          besty = -r;
        }
      }
      return besty;
    };
    for (const auto& rx : rays)
      for (const auto& ry : rays) {
        Eigen::VectorXd x = apply(rx);
        Eigen::VectorXd y = -ry;
        double score = x.dot(y);
        for (int it = 0; it < 200; ++it) {
          x = cone_argmax(y);
          y = opp_argmax(x);
          const double next = x.dot(y);
          if (next <= score + tol * 1e-4) {
            score = std::max(score, next);
            break;
          }
          score = next;
        }
        best = std::max(best, score);
      }
  }
  return -best;
}

double weyl_cone_distance(const SpdPoint& p, const SpdPoint& base,
                          const SpdPoint& through, double tol) {
  const int d = p.dim();
  if (base.dim() != d || through.dim() != d)
    throw std::domain_error("weyl_cone_distance: dimension mismatch");
  const CartanVector w = vector_distance(base, through);
  for (int i = 1; i < d; ++i)
    if (root_functional(w, i) <= 1e-8)
      throw std::domain_error(
          "weyl_cone_distance: base-through pair is not regular");
  const SqrtPair sb = spd_sqrt_pair(base.m, "weyl_cone_distance");
  const SymEig ea = sym_eig(symmetrize(sb.ri * through.m * sb.ri));
  Eigen::MatrixXd u(d, d);  // eigenvectors reordered to descending values
  for (int i = 0; i < d; ++i) u.col(i) = ea.q.col(d - 1 - i);
  const Eigen::MatrixXd g = sb.r * u;
  const Eigen::MatrixXd fp = spd_sqrt_pair(p.m, "weyl_cone_distance").r;

  // factored distance so probe points far out on the cone stay usable
  auto sqdist = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd e = (0.5 * v).array().exp().matrix();
    const double dist = distance_factored(fp, g * e.asDiagonal());
    return dist * dist;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(d));
  starts.push_back(w.v);
  starts.push_back(0.5 * w.v);
  starts.push_back(2.0 * w.v);
  starts.push_back(chamber_project(vector_distance(base, p).v));
  Rng rng(17);
  while (starts.size() < 8) {
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r(i) = rng.normal();
    starts.push_back(chamber_project(w.v.norm() * r));
  }

  double best = std::numeric_limits<double>::infinity();
  const double h = 1e-6;
  for (const auto& s0 : starts) {
    Eigen::VectorXd v = chamber_project(s0);
    double fv = sqdist(v);
    double step = 1.0;
    for (int it = 0; it < 300; ++it) {
      Eigen::VectorXd grad(d);
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd vp = v, vm = v;
        vp(i) += h;
        vm(i) -= h;
        grad(i) = (sqdist(vp) - sqdist(vm)) / (2 * h);
      }
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        const Eigen::VectorXd cand = chamber_project(v - step * grad);
        const double fc = sqdist(cand);
        const double gain = fv - fc;
        if (gain > 1e-4 / std::max(step, 1e-12) * (cand - v).squaredNorm()) {
          const double move = (cand - v).norm();
          v = cand;
          fv = fc;
          moved = true;
          step = std::min(step * 2.0, 1e3);
          if (move <= 1e-3 * tol * std::max(1.0, v.norm())) it = 300;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    best = std::min(best, fv);
  }
  return std::sqrt(std::max(0.0, best));
}

std::pair<double, double> ptolemy_check(const SpdPoint& q1, const SpdPoint& q2,
                                        const SpdPoint& q3,
                                        const SpdPoint& q4) {
  const double dd = distance(q1, q2);
  const double ddp = distance(q3, q4);
  const double e = distance(q2, q3);
  const double ep = distance(q4, q1);
  const double f = distance(q1, q3);
  const double fp = distance(q2, q4);
  return {f * fp, dd * ddp + e * ep};
}

std::pair<double, double> quad_cr_bound_check(const SpdPoint& p1,
                                              const SpdPoint& p2,
                                              const SpdPoint& p3,
                                              const SpdPoint& p4) {
  const double dd = distance(p1, p3);
  if (!(dd > 0))
    throw std::domain_error("quad_cr_bound_check: first diagonal vanishes");
  const double ddp = distance(p2, p4);
  const double e = distance(p1, p2);
  const double ep = distance(p3, p4);
  const double f = distance(p2, p3);
  const double fp = distance(p1, p4);
  return {f - dd + fp - ddp, 2 * e * ep / dd};
}

double sectional_curvature_estimate(const SpdPoint& p, const TangentSym& x,
                                    const TangentSym& y, double eps) {
  const double nx = tangent_norm(x);
  if (!(nx > 1e-12))
    throw std::domain_error("sectional_curvature_estimate: degenerate plane");
  const Eigen::MatrixXd xs = x.s / nx;
  Eigen::MatrixXd ys =
      y.s - kMetricScale * kMetricScale * y.s.cwiseProduct(xs).sum() * xs;
  const double ny = kMetricScale * ys.norm();
  if (!(ny > 1e-12))
    throw std::domain_error("sectional_curvature_estimate: degenerate plane");
  ys /= ny;
  const SpdPoint a = exp_map({eps * xs, p});
  const SpdPoint b = exp_map({eps * ys, p});
  const double c = distance(a, b);
  return 3 * (2 * eps * eps - c * c) / (eps * eps * eps * eps);
}

Eigen::MatrixXd haar_orthogonal(Rng& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace symharm
