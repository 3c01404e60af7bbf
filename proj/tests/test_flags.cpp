#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "symharm/flags.hpp"
#include "symharm/hyp2.hpp"
#include "symharm/rng.hpp"

using namespace symharm;

namespace {

// exact exponential of a strictly upper-triangular matrix
Eigen::MatrixXd nilpotent_exp(const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(d, d);
  double factorial = 1.0;
  for (int j = 1; j < d; ++j) {
    power = power * a;
    factorial *= j;
    out += power / factorial;
  }
  return out;
}

Eigen::MatrixXd superdiagonal_exp(const Eigen::VectorXd& c) {
  const int d = static_cast<int>(c.size()) + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) a(i, i + 1) = c(i);
  return nilpotent_exp(a);
}

// product of three one-parameter-per-gap factors; strictly inside the
// positive cone for the sizes used here (checked by the tests themselves)
Unipotent random_tp(Rng& rng, int d) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Identity(d, d);
  for (int r = 0; r < 3; ++r) {
    Eigen::VectorXd c(d - 1);
    for (int i = 0; i + 1 < d; ++i) c(i) = rng.uniform(0.2, 1.2);
    n = n * superdiagonal_exp(c);
  }
  return make_unipotent(n);
}

// conjugate by the torus so every superdiagonal entry becomes 1
Unipotent torus_normalize(const Unipotent& n) {
  const int d = n.dim();
  Eigen::VectorXd t(d);
  t(0) = 1.0;
  for (int i = 0; i + 1 < d; ++i) t(i + 1) = t(i) / n.n(i, i + 1);
  Eigen::MatrixXd m = t.cwiseInverse().asDiagonal() * n.n * t.asDiagonal();
  for (int i = 0; i + 1 < d; ++i) m(i, i + 1) = 1.0;
  return make_unipotent(m);
}

Eigen::MatrixXd random_invertible(Rng& rng, int d) {
  Eigen::MatrixXd g(d, d);
  do {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  } while (std::abs(g.determinant()) < 0.1);
  return g;
}

// flag of the boundary point t of the hyperbolic plane (d = 2 chart)
Flag boundary_flag(double t) {
  Eigen::MatrixXd b(2, 2);
  if (std::isinf(t))
    b << 1, 0, 0, 1;
  else
    b << t, 1, 1, 0;
  return make_flag(b);
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("transversality of standard and unipotent flags") {
  for (int d = 2; d <= 6; ++d) {
    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const TransverseResult both = transverse(lo, hi);
    CHECK(both.ok);
    CHECK(both.margin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(transverse(lo, lo).ok);
    CHECK_FALSE(transverse(hi, hi).ok);
  }
  Rng rng(51);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Unipotent n = random_tp(rng, d);
    const Flag moved = make_flag(n.n * standard_descending(d).basis);
    CHECK(transverse(standard_ascending(d), moved).ok);
    CHECK(transverse(moved, standard_ascending(d)).ok);
    // a generic pair is transverse with visible margin
    const Flag f = make_flag(random_invertible(rng, d));
    const Flag g = make_flag(random_invertible(rng, d));
    CHECK(transverse(f, g).ok == transverse(g, f).ok);
  }
  CHECK_THROWS_AS(make_flag(Eigen::MatrixXd::Zero(3, 3)), std::domain_error);
}

TEST_CASE("total positivity by exhaustive minors") {
  {
    Eigen::MatrixXd n(2, 2);
    n << 1, 1, 0, 1;
    const PositivityResult r = totally_positive(make_unipotent(n));
    CHECK(r.ok);
    CHECK(r.margin == doctest::Approx(1.0));
  }
  {
    const Eigen::MatrixXd n = superdiagonal_exp(Eigen::VectorXd::Ones(2));
    CHECK(n(0, 2) == doctest::Approx(0.5));
    const PositivityResult r = totally_positive(make_unipotent(n));
    CHECK(r.ok);
    CHECK(r.margin == doctest::Approx(0.5));
  }
  {
    Eigen::MatrixXd n(3, 3);
    n << 1, 1, 1, 0, 1, 1, 0, 0, 1;
    const PositivityResult r = totally_positive(make_unipotent(n));
    CHECK_FALSE(r.ok);
    CHECK(std::abs(r.margin) <= 1e-15);
    CHECK(r.rows == std::vector<int>{1, 2});
    CHECK(r.cols == std::vector<int>{2, 3});
  }
  CHECK_THROWS_AS(totally_positive({Eigen::MatrixXd::Identity(7, 7)}),
                  std::domain_error);
  // closed under products and under one-parameter superdiagonal flows
  Rng rng(52);
  for (int k = 0; k < 30; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Unipotent a = random_tp(rng, d);
    const Unipotent b = random_tp(rng, d);
    CHECK(totally_positive(a).margin > 0);
    CHECK(totally_positive(make_unipotent(a.n * b.n)).margin > 0);
    Eigen::VectorXd c(d - 1);
    for (int i = 0; i + 1 < d; ++i) c(i) = rng.uniform(0.05, 2.0);
    CHECK(totally_positive(make_unipotent(superdiagonal_exp(c))).margin > 0);
  }
}

TEST_CASE("normalize_triple fixes the standard representative") {
  for (int d = 2; d <= 6; ++d) {
    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const Eigen::MatrixXd ne = superdiagonal_exp(Eigen::VectorXd::Ones(d - 1));
    const Flag mid = make_flag(ne * lo.basis);
    const NormalizedTriple tri = normalize_triple(lo, mid, hi);
    CHECK((tri.n.n - ne).norm() <= 1e-9 * ne.norm());
    CHECK(std::abs(std::abs(tri.g.determinant()) - 1.0) <= 1e-9);

    // torus-conjugated middle flag recovers the same normalized unipotent
    Eigen::VectorXd h(d);
    for (int i = 0; i < d; ++i) h(i) = std::exp(0.3 * (i - 0.5 * d));
    const Flag mid2 = make_flag(h.asDiagonal() * ne *
                                h.cwiseInverse().asDiagonal() * lo.basis);
    const NormalizedTriple tri2 = normalize_triple(lo, mid2, hi);
    CHECK((tri2.n.n - ne).norm() <= 1e-9 * ne.norm());
  }
  CHECK_THROWS_AS(
      normalize_triple(standard_descending(3), standard_descending(3),
                       standard_ascending(3)),
      std::domain_error);
  {
    // transverse middle flag with a vanishing superdiagonal entry
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(3, 3);
    u(0, 2) = 1.0;
    const Flag mid = make_flag(u * standard_descending(3).basis);
    CHECK_THROWS_AS(normalize_triple(standard_descending(3), mid,
                                     standard_ascending(3)),
                    PositivityViolationError);
  }
}

TEST_CASE("normalize_triple is a projective invariant") {
  Rng rng(53);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const Unipotent n = random_tp(rng, d);
    const Flag mid = make_flag(n.n * lo.basis);
    const NormalizedTriple base = normalize_triple(lo, mid, hi);

    const Eigen::MatrixXd a = random_invertible(rng, d);
    const NormalizedTriple moved =
        normalize_triple(make_flag(a * lo.basis), make_flag(a * mid.basis),
                         make_flag(a * hi.basis));
    CHECK((moved.n.n - base.n.n).norm() <=
          1e-9 * std::max(1.0, base.n.n.norm()));
  }
}

TEST_CASE("cross ratios reduce to the classical one in rank one") {
  Rng rng(54);
  for (int k = 0; k < 300; ++k) {
    const double a = -std::exp(rng.uniform(-2.0, 2.0));
    const double t = std::exp(rng.uniform(-2.0, 2.0));
    const PositiveQuadruple q = standard_quadruple(
        boundary_flag(a), boundary_flag(0.0), boundary_flag(t),
        boundary_flag(kInf));
    const double want = cross_ratio(a, 0.0, t, kInf);
    CHECK(cross_ratio_i(q, 1) == doctest::Approx(want).epsilon(1e-9));
    CHECK(cross_ratio_log(q, 1) ==
          doctest::Approx(std::log(-want)).epsilon(1e-9));
  }
}

TEST_CASE("cross ratios are negative, projective, and kill inverses") {
  Rng rng(55);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Unipotent n = random_tp(rng, d);
    const Unipotent u = random_tp(rng, d);
    const Eigen::MatrixXd minv_mat = u.n;  // m^{-1} totally positive
    const Eigen::MatrixXd m_mat =
        u.n.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(d, d));

    // inverse pair: m = n^{-1} gives CR_i = -1 exactly
    const Eigen::MatrixXd n_inv = n.n.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(d, d));
    const PositiveQuadruple sym{make_unipotent(n_inv), n};
    for (int i = 1; i < d; ++i) {
      CHECK(cross_ratio_i(sym, i) == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(cross_ratio_log(sym, i) == doctest::Approx(0.0).epsilon(1e-12));
    }

    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const Flag f1 = make_flag(m_mat * lo.basis);
    const Flag f3 = make_flag(n.n * lo.basis);
    const PositiveQuadruple q = standard_quadruple(f1, lo, f3, hi);
    const PositivityResult pos = quadruple_positive(f1, lo, f3, hi);
    CHECK(pos.ok);
    CHECK(pos.margin > 0);

    const Eigen::MatrixXd a = random_invertible(rng, d);
    const PositiveQuadruple qa = standard_quadruple(
        make_flag(a * f1.basis), make_flag(a * lo.basis),
        make_flag(a * f3.basis), make_flag(a * hi.basis));
    for (int i = 1; i < d; ++i) {
      const double cr = cross_ratio_i(q, i);
      CHECK(cr < 0);
      // the unnormalized entry ratio is already torus-invariant
      CHECK(cr == doctest::Approx(m_mat(i - 1, i) / n.n(i - 1, i))
                      .epsilon(1e-9));
      CHECK(cross_ratio_i(qa, i) == doctest::Approx(cr).epsilon(1e-9));
    }
  }
  // a quadruple with one clearly negative required minor is rejected
  {
    Eigen::MatrixXd bad(3, 3);
    bad << 1, 1, 2, 0, 1, 1, 0, 0, 1;  // minor rows {1,2} x cols {2,3} = -1
    const Eigen::MatrixXd m_mat =
        bad.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(3, 3));
    const Flag lo = standard_descending(3);
    const Flag hi = standard_ascending(3);
    Rng rng2(56);
    const Unipotent n = random_tp(rng2, 3);
    const PositivityResult r =
        quadruple_positive(make_flag(m_mat * lo.basis), lo,
                           make_flag(n.n * lo.basis), hi);
    CHECK_FALSE(r.ok);
    CHECK(r.margin <= -0.5);
  }
  {
    const PositiveQuadruple degenerate{
        make_unipotent(Eigen::MatrixXd::Identity(2, 2)),
        make_unipotent(Eigen::MatrixXd::Identity(2, 2))};
    CHECK_THROWS_AS(cross_ratio_i(degenerate, 1), std::domain_error);
    CHECK_THROWS_AS(cross_ratio_i(degenerate, 2), std::domain_error);
  }
}

TEST_CASE("projection of triples matches the hyperbolic foot point") {
  Rng rng(57);
  for (int k = 0; k < 300; ++k) {
    double t[3];
    do {
      for (double& v : t) v = std::tan(rng.uniform(-1.5, 1.5));
    } while (std::abs(t[0] - t[1]) < 1e-3 || std::abs(t[1] - t[2]) < 1e-3 ||
             std::abs(t[0] - t[2]) < 1e-3);
    const SpdPoint p =
        project_pd(boundary_flag(t[0]), boundary_flag(t[1]),
                   boundary_flag(t[2]));
    const HypPoint z = foot_point(make_ideal_triple(t[0], t[1], t[2]));
    Eigen::MatrixXd want(2, 2);
    want << (z.x * z.x + z.y * z.y) / z.y, z.x / z.y, z.x / z.y, 1.0 / z.y;
    CHECK((p.m - want).norm() <= 1e-8 * want.norm());
  }
  // triples with the point at infinity land on the imaginary axis
  for (double s : {0.25, 1.0, 4.0}) {
    const SpdPoint p = project_pd(boundary_flag(0.0), boundary_flag(s),
                                  boundary_flag(kInf));
    Eigen::MatrixXd want(2, 2);
    want << s, 0, 0, 1.0 / s;
    CHECK((p.m - want).norm() <= 1e-10 * want.norm());
  }
}

TEST_CASE("projection is equivariant and sits in the outer flat") {
  Rng rng(58);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const Unipotent n = random_tp(rng, d);
    const Flag mid = make_flag(n.n * lo.basis);

    const SpdPoint p = project_pd(lo, mid, hi);
    // the flat of the standard pair consists of diagonal matrices
    Eigen::MatrixXd off = p.m;
    off.diagonal().setZero();
    CHECK(off.norm() <= 1e-9 * p.m.norm());

    const Eigen::MatrixXd a = random_invertible(rng, d);
    const SpdPoint pa = project_pd(make_flag(a * lo.basis),
                                   make_flag(a * mid.basis),
                                   make_flag(a * hi.basis));
    const SpdPoint want = congruence(a, p);
    CHECK((pa.m - want.m).norm() <= 1e-8 * want.m.norm());

    // normalized triples project to the basepoint, torus conjugates to the
    // torus orbit of the basepoint
    const Unipotent nn = torus_normalize(n);
    const SpdPoint pn =
        project_pd(lo, make_flag(nn.n * lo.basis), hi);
    CHECK((pn.m - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-9);
    Eigen::VectorXd h(d);
    for (int i = 0; i < d; ++i) h(i) = std::exp(0.4 * rng.normal());
    const SpdPoint ph = project_pd(
        lo, make_flag(h.asDiagonal() * nn.n * h.cwiseInverse().asDiagonal() *
                      lo.basis),
        hi);
    const SpdPoint wanth = congruence(Eigen::MatrixXd(h.asDiagonal()),
                                      spd_identity(d));
    CHECK((ph.m - wanth.m).norm() <= 1e-9 * wanth.m.norm());
  }
}

TEST_CASE("log cross-ratios measure the flat displacement of projections") {
  Rng rng(59);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + rng.uniform_int(5);
    const Flag lo = standard_descending(d);
    const Flag hi = standard_ascending(d);
    const Unipotent n = torus_normalize(random_tp(rng, d));
    const Eigen::MatrixXd m_mat =
        random_tp(rng, d).n.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(d, d));

    const SpdPoint pn = project_pd(lo, make_flag(n.n * lo.basis), hi);
    const SpdPoint pm = project_pd(lo, make_flag(m_mat * lo.basis), hi);
    const Eigen::VectorXd w =
        pm.m.diagonal().array().log() - pn.m.diagonal().array().log();

    const PositiveQuadruple q{make_unipotent(m_mat), n};
    for (int i = 1; i < d; ++i) {
      CHECK(0.5 * (w(i - 1) - w(i)) ==
            doctest::Approx(cross_ratio_log(q, i)).epsilon(1e-9));
    }
  }
}
