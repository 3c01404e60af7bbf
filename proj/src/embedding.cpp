#include "symharm/embedding.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace symharm {

namespace {

Eigen::MatrixXd antidiagonal(int d) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) j(i, d - 1 - i) = 1.0;
  return j;
}

bool in_window(const PositiveCurve& c, double t) {
  return t >= c.window_lo && t <= c.window_hi;
}

// Basis whose column spans realize the boundary flag at t, taken in the
// frame of the reference parameter so the gauge does not depend on where
// the window happens to start. The flag at infinity is exact.
Eigen::MatrixXd basis_at(const EmbeddingHandle& e, double t) {
  const PositiveCurve& c = e.curve;
  const int d = c.d;
  if (is_infinite_boundary(t)) return Eigen::MatrixXd::Identity(d, d);
  const double ref = in_window(c, 0.0) ? 0.0 : c.window_lo;
  if (in_window(c, t)) return curve_transition(c, ref, t) * antidiagonal(d);
  if (e.flip && std::abs(t) >= 1.0)
    return e.flip_gauge * curve_unipotent(e.flip->flipped, -1.0 / t) *
           antidiagonal(d);
  throw std::range_error(
      "embedding: boundary parameter outside every available chart");
}

Mobius rotation_about_i(double half_angle) {
  return {std::cos(half_angle), std::sin(half_angle), -std::sin(half_angle),
          std::cos(half_angle)};
}

}  // namespace

EmbeddingHandle make_embedding(PositiveCurve curve, SectionKind kind,
                               int flip_samples) {
  EmbeddingHandle e;
  e.curve = std::move(curve);
  e.kind = kind;
  const int d = e.curve.d;
  // the rotation-invariant diagonal of the unit-superdiagonal frame:
  // entry j is (n-j)!/j! with n = d-1, which already has determinant one
  Eigen::VectorXd lam(d);
  for (int j = 0; j < d; ++j)
    lam(j) = std::exp(std::lgamma(double(j + 1)) - std::lgamma(double(d - j)));
  e.base_root = lam.cwiseSqrt().asDiagonal();
  e.post = lam.cwiseSqrt().cwiseInverse().asDiagonal();
  try {
    e.flip = flip_chart(e.curve, flip_samples);
    const double ref = in_window(e.curve, 0.0) ? 0.0 : e.curve.window_lo;
    const Eigen::MatrixXd back =
        e.flip->transition * curve_unipotent(e.curve, ref);
    e.flip_gauge =
        back.partialPivLu().solve(Eigen::MatrixXd::Identity(d, d));
  } catch (const std::runtime_error&) {
    e.flip.reset();
  } catch (const std::domain_error&) {
    e.flip.reset();
  }
  return e;
}

EmbeddingHandle compose_isometry(const EmbeddingHandle& e,
                                 const Eigen::MatrixXd& g) {
  const int d = e.curve.d;
  if (g.rows() != d || g.cols() != d)
    throw std::domain_error("compose_isometry: dimension mismatch");
  const double det = std::abs(g.determinant());
  if (!(det > 1e-12) || !std::isfinite(det))
    throw std::domain_error("compose_isometry: map not invertible");
  EmbeddingHandle out = e;
  out.post = (g / std::pow(det, 1.0 / d)) * e.post;
  out.factor_cache.clear();
  return out;
}

Eigen::MatrixXd embedding_factor(const EmbeddingHandle& e, const HypPoint& z) {
  if (!(z.y > 0) || !std::isfinite(z.x) || !std::isfinite(z.y))
    throw std::domain_error("embedding_factor: point not in the upper half plane");
  const IdealTriple s =
      e.kind == SectionKind::kSymmetric ? section_symmetric(z) : section(z);
  const int d = e.curve.d;
  const Eigen::MatrixXd b1 = basis_at(e, s.t1);
  const Eigen::MatrixXd b2 = basis_at(e, s.t2);
  const Eigen::MatrixXd b3 = basis_at(e, s.t3);
  // gauge of the first parameter: seen from there the first flag is exactly
  // standard and the other two stay conditioned by the parameter gaps, not
  // by the offset from the reference frame
  const Eigen::MatrixXd gauge = b1 * antidiagonal(d);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(gauge);
  const NormalizedTriple tri =
      normalize_triple(make_flag(lu.solve(b1)), make_flag(lu.solve(b2)),
                       make_flag(lu.solve(b3)));
  return e.post * gauge *
         tri.g.partialPivLu().solve(Eigen::MatrixXd::Identity(d, d)) *
         e.base_root;
}

SpdPoint evaluate(const EmbeddingHandle& e, const HypPoint& z) {
  const Eigen::MatrixXd f = embedding_factor(e, z);
  return make_spd(f * f.transpose());
}

SpdPoint evaluate_cached(EmbeddingHandle& e, long long vertex_id,
                         const HypPoint& z) {
  auto it = e.factor_cache.find(vertex_id);
  if (it == e.factor_cache.end())
    it = e.factor_cache.emplace(vertex_id, embedding_factor(e, z)).first;
  return make_spd(it->second * it->second.transpose());
}

CartanVector pair_vector_distance(const EmbeddingHandle& e, const HypPoint& a,
                                  const HypPoint& b) {
  return vector_distance_factored(embedding_factor(e, a),
                                  embedding_factor(e, b));
}

double pair_distance(const EmbeddingHandle& e, const HypPoint& a,
                     const HypPoint& b) {
  return kMetricScale * pair_vector_distance(e, a, b).v.norm();
}

double cross_distance(const EmbeddingHandle& e1, const EmbeddingHandle& e2,
                      const HypPoint& z) {
  if (e1.curve.d != e2.curve.d)
    throw std::domain_error("cross_distance: dimension mismatch");
  return distance_factored(embedding_factor(e1, z), embedding_factor(e2, z));
}

ConstantsEstimate estimate_constants(const EmbeddingHandle& e,
                                     std::uint64_t seed, int pairs,
                                     double dist_lo, double dist_hi) {
  if (pairs < 2 || !(dist_lo > 0) || !(dist_hi > dist_lo))
    throw std::domain_error(
        "estimate_constants: need pairs >= 2 and 0 < dist_lo < dist_hi");
  Rng rng(derive_seed(seed, "constants-pairs"));
  ConstantsEstimate out;
  out.seed = seed;
  const int d = e.curve.d;
  for (int j = 0; j < pairs; ++j) {
    const double delta =
        dist_lo + (dist_hi - dist_lo) * double(j) / double(pairs - 1);
    const Mobius rot =
        rotation_about_i(rng.uniform(0.0, std::numbers::pi_v<double>));
    const HypPoint x = rot.apply({0.0, std::exp(delta / 2)});
    const HypPoint y = rot.apply({0.0, std::exp(-delta / 2)});
    Eigen::MatrixXd fx, fy;
    try {
      fx = embedding_factor(e, x);
      fy = embedding_factor(e, y);
    } catch (const std::range_error&) {
      ++out.pairs_skipped;
      continue;
    }
    const CartanVector vd = vector_distance_factored(fx, fy);
    out.l_hat = std::max(out.l_hat, kMetricScale * vd.v.norm() / (delta + 1.0));
    for (int i = 1; i < d; ++i) {
      const double ratio = (delta - 1.0) / root_functional(vd, i);
      if (std::isfinite(ratio) && ratio > 0)
        out.m_hat = std::max(out.m_hat, ratio);
      else
        ++out.clamped;
    }
    ++out.pairs_used;
  }
  return out;
}

double morse_defect(const EmbeddingHandle& e, double a, double b, int samples,
                    double span) {
  if (samples < 3 || !(span > 0))
    throw std::domain_error("morse_defect: need samples >= 3 and span > 0");
  const bool a_inf = is_infinite_boundary(a);
  const bool b_inf = is_infinite_boundary(b);
  if ((a_inf && b_inf) || (!a_inf && !b_inf && a == b))
    throw std::domain_error("morse_defect: endpoints must be distinct");
  Mobius to_pair{1.0, a, 0.0, 1.0};  // (0, inf) -> (a, b)
  if (a_inf)
    to_pair = {b, 1.0, 1.0, 0.0};
  else if (!b_inf)
    to_pair = {b, a, 1.0, 1.0};
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(samples);
  for (int j = 0; j < samples; ++j) {
    const double s = -span + 2.0 * span * double(j) / double(samples - 1);
    factors.push_back(embedding_factor(e, to_pair.apply({0.0, std::exp(s)})));
  }
  // seen from the middle sample every point stays moderately conditioned,
  // and the cone distance is unchanged by the common frame change
  const Eigen::PartialPivLU<Eigen::MatrixXd> mid(factors[samples / 2]);
  std::vector<SpdPoint> along;
  along.reserve(samples);
  for (const Eigen::MatrixXd& f : factors) {
    const Eigen::MatrixXd m = mid.solve(f);
    along.push_back(make_spd(m * m.transpose()));
  }
  double worst = 0.0;
  for (int j = 1; j + 1 < samples; ++j)
    worst = std::max(worst,
                     weyl_cone_distance(along[j], along.front(), along.back()));
  return worst;
}

void dump_embedding_csv(EmbeddingHandle& e,
                        const std::vector<std::pair<long long, HypPoint>>& pts,
                        std::ostream& out) {
  const int d = e.dim();
  out << "vertex,x,y";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out << ",m" << i << j;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& [id, z] : pts) {
    const SpdPoint p = evaluate_cached(e, id, z);
    out << id << ',' << z.x << ',' << z.y;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out << ',' << p.m(i, j);
    out << '\n';
  }
}

}  // namespace symharm
