#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "symharm/embedding.hpp"
#include "symharm/rng.hpp"

using namespace symharm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fact(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binom(int n, int k) { return fact(n) / (fact(k) * fact(n - k)); }

// image of a fractional-linear map under the symmetric-power action on
// binary forms, scaled so the superdiagonal of the nilpotent generator is one
Eigen::MatrixXd principal_rep(const Mobius& g, int dim) {
  const int n = dim - 1;
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k <= n; ++k)
    for (int i = 0; i <= n - k; ++i)
      for (int j = 0; j <= k; ++j)
        sym(i + j, k) += binom(n - k, i) * std::pow(g.a, n - k - i) *
                         std::pow(g.c, i) * binom(k, j) *
                         std::pow(g.b, k - j) * std::pow(g.d, j);
  Eigen::MatrixXd r(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r(i, j) = sym(i, j) * fact(i) / fact(j);
  return r;
}

// the same action conjugated into the frame the embedding uses, where
// rotations of the half plane act by orthogonal matrices
Eigen::MatrixXd based_rep(const Mobius& g, int dim) {
  const int n = dim - 1;
  Eigen::VectorXd b(dim);
  for (int j = 0; j < dim; ++j) b(j) = std::sqrt(fact(j) / fact(n - j));
  return b.cwiseInverse().asDiagonal() * principal_rep(g, dim) *
         b.asDiagonal();
}

PiecewiseMonotone identity_pl() {
  return make_piecewise_monotone({0.0, 1.0}, {0.0, 1.0});
}

std::vector<PiecewiseMonotone> identity_family(int d) {
  return std::vector<PiecewiseMonotone>(d - 1, identity_pl());
}

EmbeddingHandle veronese(int d, double w,
                         SectionKind kind = SectionKind::kUpper) {
  return make_embedding(build_curve(identity_family(d), -w, w), kind);
}

PiecewiseMonotone random_pl(Rng& rng, double lo, double hi, int knots) {
  std::vector<double> bs{lo, hi};
  const double gap = 0.05 * (hi - lo);
  while (static_cast<int>(bs.size()) < knots) {
    const double b = rng.uniform(lo, hi);
    bool far = true;
    for (double o : bs)
      if (std::abs(o - b) < gap) far = false;
    if (far) bs.push_back(b);
  }
  std::sort(bs.begin(), bs.end());
  std::vector<double> vs(bs.size());
  vs[0] = 0;
  for (size_t i = 1; i < bs.size(); ++i)
    vs[i] = vs[i - 1] + (bs[i] - bs[i - 1]) * std::exp(0.6 * rng.normal());
  return make_piecewise_monotone(bs, vs);
}

std::vector<PiecewiseMonotone> random_family(Rng& rng, int d, double lo,
                                             double hi, int knots) {
  std::vector<PiecewiseMonotone> phis;
  for (int i = 0; i + 1 < d; ++i) phis.push_back(random_pl(rng, lo, hi, knots));
  return phis;
}

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / want.norm();
}

// points of the hyperbolic circle of radius r about i
std::vector<HypPoint> circle_about_i(double r, int n) {
  std::vector<HypPoint> out;
  out.reserve(n);
  for (int j = 0; j < n; ++j) {
    const double half = 3.14159265358979323846 * j / n;
    const Mobius rot{std::cos(half), std::sin(half), -std::sin(half),
                     std::cos(half)};
    out.push_back(rot.apply({0.0, std::exp(r)}));
  }
  return out;
}

}  // namespace

TEST_CASE("rank-one embedding reproduces the half-plane model") {
  EmbeddingHandle e = veronese(2, 64.0);
  Rng rng(41);
  for (int rep = 0; rep < 200; ++rep) {
    const HypPoint z{rng.uniform(-8.0, 8.0), std::exp(rng.uniform(-2.5, 2.5))};
    Eigen::MatrixXd want(2, 2);
    want << (z.x * z.x + z.y * z.y) / z.y, z.x / z.y, z.x / z.y, 1.0 / z.y;
    CHECK(rel_err(evaluate(e, z).m, want) <= 1e-11);
  }
  for (int rep = 0; rep < 200; ++rep) {
    const HypPoint a{rng.uniform(-6.0, 6.0), std::exp(rng.uniform(-2.0, 2.0))};
    const HypPoint b{rng.uniform(-6.0, 6.0), std::exp(rng.uniform(-2.0, 2.0))};
    CHECK(pair_distance(e, a, b) ==
          doctest::Approx(hyp_distance(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("identity boundary data lands on the basepoint") {
  for (int d = 2; d <= 6; ++d) {
    EmbeddingHandle e = veronese(d, 16.0);
    const Eigen::MatrixXd p = evaluate(e, {0.0, 1.0}).m;
    CHECK((p - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-12);
  }
}

TEST_CASE("power curves match the symmetric-power closed form") {
  Rng rng(17);
  for (int d : {3, 4, 5}) {
    EmbeddingHandle e = veronese(d, 64.0);
    for (int rep = 0; rep < 60; ++rep) {
      const HypPoint z{rng.uniform(-2.0, 2.0), std::exp(rng.uniform(-0.8, 0.9))};
      const Eigen::MatrixXd r = based_rep(upper_triangular_at(z), d);
      const SpdPoint want = make_spd(r * r.transpose());
      CHECK(rel_err(evaluate(e, z).m, want.m) <= 1e-9);
    }
  }
}

TEST_CASE("fractional linear maps act exactly in the based frame") {
  // the nilpotent generator convention is pinned by its own series
  const Eigen::MatrixXd u = principal_rep({1.0, 0.7, 0.0, 1.0}, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double want = j >= i ? std::pow(0.7, j - i) / fact(j - i) : 0.0;
      CHECK(u(i, j) == doctest::Approx(want).epsilon(1e-13));
    }

  const std::vector<HypPoint> zs{{0.0, 1.0}, {0.6, 0.5}, {-1.1, 2.2}};
  const Mobius rot{std::cos(0.6), std::sin(0.6), -std::sin(0.6),
                   std::cos(0.6)};
  for (int d = 2; d <= 5; ++d) {
    EmbeddingHandle e = veronese(d, 64.0);
    for (const Mobius& g :
         {Mobius{1.3, 0.7, 0.0, 1.0 / 1.3}, rot,
          Mobius{1.3, 0.7, 0.0, 1.0 / 1.3}.compose(rot)}) {
      for (const HypPoint& z : zs) {
        const SpdPoint lhs = evaluate(e, g.apply(z));
        const SpdPoint rhs = congruence(based_rep(g, d), evaluate(e, z));
        CHECK(rel_err(lhs.m, rhs.m) <= 1e-9);
      }
    }
    // rotations about i fix the basepoint, which is what makes the image of
    // the model curve a totally geodesic half plane
    const Eigen::MatrixXd r = based_rep(rot, d);
    CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(d, d)).norm() <=
          1e-12);
  }
}

TEST_CASE("constants on the rank-one identity embedding are exact") {
  EmbeddingHandle e = veronese(2, 6.0e4);
  const ConstantsEstimate est = estimate_constants(e, 5, 400);
  CHECK(est.pairs_used == 400);
  CHECK(est.pairs_skipped == 0);
  CHECK(est.l_hat == doctest::Approx(20.0 / 21.0).epsilon(1e-9));
  CHECK(est.m_hat == doctest::Approx(19.0 / 20.0).epsilon(1e-9));
  CHECK(est.clamped == 19);  // separations below one clamp to zero
  CHECK(est.seed == 5);
}

TEST_CASE("power-curve constants sit near one and revalidate on a fresh seed") {
  EmbeddingHandle e = veronese(3, 6.0e4);
  const ConstantsEstimate est = estimate_constants(e, 7, 400);
  CHECK(est.pairs_used == 400);
  CHECK(est.pairs_skipped == 0);
  CHECK(std::abs(est.m_hat - 1.0) <= 0.05);
  CHECK(est.l_hat >= 1.8);
  CHECK(est.l_hat <= 2.25);

  const ConstantsEstimate fresh = estimate_constants(e, 11, 400);
  CHECK(std::abs(fresh.m_hat - 1.0) <= 0.05);
  CHECK(fresh.l_hat <= 1.05 * est.l_hat);
  CHECK(est.l_hat <= 1.05 * fresh.l_hat);
}

TEST_CASE("section choice shifts a power curve by a constant") {
  EmbeddingHandle up = veronese(3, 600.0, SectionKind::kUpper);
  EmbeddingHandle sym = veronese(3, 600.0, SectionKind::kSymmetric);

  // seen from the first section the other one is a fixed change of triple,
  // so the gap is the distance moved by one fractional-linear map
  const Mobius w{std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0,
                 1.0 / std::sqrt(2.0)};
  const Eigen::MatrixXd r = based_rep(w, 3);
  const double want = distance(make_spd(r * r.transpose()),
                               make_spd(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(want >= 1.2);
  CHECK(want <= 2.7);

  double lo = kInf, hi4 = 0.0, hi6 = 0.0;
  for (double rad : {0.7, 2.0, 3.5, 4.0, 5.0, 6.0}) {
    for (const HypPoint& z : circle_about_i(rad, 40)) {
      const double c = cross_distance(up, sym, z);
      lo = std::min(lo, c);
      if (rad <= 4.0) hi4 = std::max(hi4, c);
      hi6 = std::max(hi6, c);
      CHECK(c == doctest::Approx(want).epsilon(1e-7));
    }
  }
  CHECK(hi6 <= 1.05 * hi4 + 1e-12);
  CHECK(hi4 <= hi6 + 1e-12);
  CHECK(lo >= 0.0);
}

TEST_CASE("section choice stays uniformly close on generic curves") {
  Rng rng(3);
  const PositiveCurve c = build_curve(random_family(rng, 3, -600.0, 600.0, 5),
                                      -600.0, 600.0);
  EmbeddingHandle up = make_embedding(c, SectionKind::kUpper);
  EmbeddingHandle sym = make_embedding(c, SectionKind::kSymmetric);
  double hi4 = 0.0, hi6 = 0.0;
  for (double rad : {0.5, 1.0, 2.0, 3.0, 4.0, 4.7, 5.4, 6.0}) {
    const int n = std::max(12, int(8.0 * std::sinh(rad)));
    for (const HypPoint& z : circle_about_i(rad, std::min(n, 240))) {
      const double cd = cross_distance(up, sym, z);
      if (rad <= 4.0) hi4 = std::max(hi4, cd);
      hi6 = std::max(hi6, cd);
    }
  }
  CHECK(hi6 <= 1.05 * hi4);
  CHECK(hi4 <= hi6 + 1e-12);
}

TEST_CASE("vertical geodesics map into flats, generic ones stay in a cone") {
  EmbeddingHandle e2 = veronese(2, 64.0);
  CHECK(morse_defect(e2, 0.0, kInf) <= 1e-5);
  CHECK(morse_defect(e2, -2.0, 3.0) <= 1e-5);

  EmbeddingHandle e3 = veronese(3, 64.0);
  CHECK(morse_defect(e3, 0.0, kInf) <= 1e-5);
  const double generic = morse_defect(e3, -2.0, 3.0);
  CHECK(generic >= 0.0);
  CHECK(generic <= 2.0);

  Rng rng(9);
  const PositiveCurve c =
      build_curve(random_family(rng, 3, -64.0, 64.0, 5), -64.0, 64.0);
  EmbeddingHandle ep = make_embedding(c);
  const double perturbed = morse_defect(ep, -2.0, 3.0);
  CHECK(std::isfinite(perturbed));
  CHECK(perturbed <= 4.0);
}

TEST_CASE("values do not depend on how wide the window is") {
  const std::vector<HypPoint> zs{{0.3, 0.9}, {-0.8, 1.7}, {1.2, 0.6}};
  EmbeddingHandle narrow3 = veronese(3, 4.0);
  EmbeddingHandle wide3 = veronese(3, 64.0);
  for (const HypPoint& z : zs)
    CHECK(rel_err(evaluate(narrow3, z).m, evaluate(wide3, z).m) <= 1e-10);

  Rng rng(23);
  const auto phis = random_family(rng, 4, -8.0, 8.0, 5);
  EmbeddingHandle a = make_embedding(build_curve(phis, -8.0, 8.0));
  EmbeddingHandle b = make_embedding(build_curve(phis, -32.0, 32.0));
  for (const HypPoint& z : zs)
    CHECK(rel_err(evaluate(a, z).m, evaluate(b, z).m) <= 1e-9);
}

TEST_CASE("the flipped chart covers points the window cannot reach") {
  EmbeddingHandle narrow = veronese(3, 4.0);
  EmbeddingHandle wide = veronese(3, 64.0);
  const HypPoint far{1.0, 30.0};  // section parameter 31 escapes the window
  CHECK(narrow.flip.has_value());
  CHECK(rel_err(evaluate(narrow, far).m, evaluate(wide, far).m) <= 1e-7);

  EmbeddingHandle tiny =
      make_embedding(build_curve(identity_family(3), -0.5, 0.5));
  CHECK(!tiny.flip.has_value());
  CHECK_THROWS_AS(evaluate(tiny, {0.0, 3.0}), std::range_error);
}

TEST_CASE("post-composition by an isometry moves values and nothing else") {
  Rng rng(31);
  EmbeddingHandle e = veronese(3, 64.0);
  Eigen::MatrixXd g = haar_orthogonal(rng, 3);
  g.col(0) *= 1.7;
  g.col(2) *= 0.4;
  EmbeddingHandle moved = compose_isometry(e, g);

  const HypPoint z{0.4, 1.3};
  CHECK(rel_err(evaluate(moved, z).m, congruence(g, evaluate(e, z)).m) <=
        1e-10);

  const HypPoint a{-1.0, 0.7}, b{2.0, 2.4};
  CHECK(pair_distance(moved, a, b) ==
        doctest::Approx(pair_distance(e, a, b)).epsilon(1e-9));
  CHECK(morse_defect(moved, -2.0, 3.0) ==
        doctest::Approx(morse_defect(e, -2.0, 3.0)).epsilon(1e-6));

  const ConstantsEstimate base = estimate_constants(e, 7, 60, 0.1, 8.0);
  const ConstantsEstimate after = estimate_constants(moved, 7, 60, 0.1, 8.0);
  CHECK(after.l_hat == doctest::Approx(base.l_hat).epsilon(1e-8));
  CHECK(after.m_hat == doctest::Approx(base.m_hat).epsilon(1e-8));

  CHECK_THROWS_AS(compose_isometry(e, Eigen::MatrixXd::Zero(3, 3)),
                  std::domain_error);
  CHECK_THROWS_AS(compose_isometry(e, Eigen::MatrixXd::Identity(4, 4)),
                  std::domain_error);
}

TEST_CASE("cached evaluation agrees with direct evaluation") {
  EmbeddingHandle e = veronese(4, 64.0);
  const HypPoint z1{0.2, 1.1}, z2{-0.9, 0.8};
  const SpdPoint direct1 = evaluate(e, z1);
  const SpdPoint direct2 = evaluate(e, z2);
  CHECK((evaluate_cached(e, 10, z1).m - direct1.m).norm() <= 1e-14);
  CHECK((evaluate_cached(e, 11, z2).m - direct2.m).norm() <= 1e-14);
  CHECK((evaluate_cached(e, 10, z1).m - direct1.m).norm() <= 1e-14);
  CHECK(e.factor_cache.size() == 2);
}

TEST_CASE("csv dump writes one labelled row per point") {
  EmbeddingHandle e = veronese(3, 64.0);
  std::ostringstream out;
  dump_embedding_csv(e, {{0, {0.0, 1.0}}, {7, {0.5, 2.0}}}, out);
  std::istringstream in(out.str());
  std::string header, row0, row7, extra;
  CHECK(std::getline(in, header));
  CHECK(std::getline(in, row0));
  CHECK(std::getline(in, row7));
  CHECK(!std::getline(in, extra));
  CHECK(header == "vertex,x,y,m00,m01,m02,m10,m11,m12,m20,m21,m22");
  CHECK(row0.substr(0, 6) == "0,0,1,");
  CHECK(row7.substr(0, 8) == "7,0.5,2,");
}

TEST_CASE("degenerate inputs are rejected") {
  EmbeddingHandle e = veronese(3, 8.0);
  CHECK_THROWS_AS(evaluate(e, {0.0, -1.0}), std::domain_error);
  CHECK_THROWS_AS(evaluate(e, {0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(estimate_constants(e, 1, 1), std::domain_error);
  CHECK_THROWS_AS(estimate_constants(e, 1, 10, -1.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(morse_defect(e, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(morse_defect(e, kInf, kInf), std::domain_error);
  CHECK_THROWS_AS(morse_defect(e, 0.0, 1.0, 2), std::domain_error);
}
