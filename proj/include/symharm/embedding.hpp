#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "symharm/flags.hpp"
#include "symharm/hyp2.hpp"
#include "symharm/positive_curve.hpp"
#include "symharm/spd.hpp"

namespace symharm {

// Which deterministic right inverse of the foot point carries a half-plane
// point to a boundary triple.
enum class SectionKind { kUpper, kSymmetric };

// The map from the half plane into the positive definite model assembled
// from a boundary curve: boundary triple, flags along the curve, barycenter
// of the normalized triple. Evaluation is pure; the factor cache is filled
// under a single-writer contract and is keyed by mesh vertex id.
struct EmbeddingHandle {
  PositiveCurve curve;
  SectionKind kind = SectionKind::kUpper;
  Eigen::MatrixXd post;          // isometry applied after projection
  // Square root of the flat point assigned to the normalized triple frame.
  // This diagonal makes rotations about i act as isometries of the image of
  // the model curve, so that image is a totally geodesic half plane; the
  // default post undoes it at i, keeping the value there the identity.
  Eigen::MatrixXd base_root;
  std::optional<FlipChart> flip; // second chart for parameters past the window
  Eigen::MatrixXd flip_gauge;    // frame change from flipped coordinates back
  std::unordered_map<long long, Eigen::MatrixXd> factor_cache;
  int dim() const { return curve.d; }
};

// Builds the second chart eagerly when the window permits; evaluation far
// outside the window then stays available instead of raising a range error.
EmbeddingHandle make_embedding(PositiveCurve curve,
                               SectionKind kind = SectionKind::kUpper,
                               int flip_samples = 513);

// Post-composes with the isometry q -> g q g^T; constants and distances are
// unchanged up to roundoff.
EmbeddingHandle compose_isometry(const EmbeddingHandle& e,
                                 const Eigen::MatrixXd& g);

// Matrix a with f(z) = a a^T up to determinant normalization. Throws a range
// error when a section parameter falls outside every available chart.
Eigen::MatrixXd embedding_factor(const EmbeddingHandle& e, const HypPoint& z);

SpdPoint evaluate(const EmbeddingHandle& e, const HypPoint& z);
SpdPoint evaluate_cached(EmbeddingHandle& e, long long vertex_id,
                         const HypPoint& z);

// Distance in the target between images of two domain points, computed from
// the factors so far-apart pairs keep relative accuracy.
CartanVector pair_vector_distance(const EmbeddingHandle& e, const HypPoint& a,
                                  const HypPoint& b);
double pair_distance(const EmbeddingHandle& e, const HypPoint& a,
                     const HypPoint& b);
// Distance between the images of the same point under two embeddings.
double cross_distance(const EmbeddingHandle& e1, const EmbeddingHandle& e2,
                      const HypPoint& z);

struct ConstantsEstimate {
  double l_hat = 0.0;  // sup of d_Y / (d_X + 1)
  double m_hat = 0.0;  // sup over root gaps of (d_X - 1) / gap, clamped at 0
  int pairs_used = 0;
  int pairs_skipped = 0;  // section parameters escaped the charts
  int clamped = 0;        // nonpositive ratios counted into the zero clamp
  std::uint64_t seed = 0;
};

// Sampled estimates, never proven bounds. Separations run through a
// deterministic grid over [dist_lo, dist_hi] so the sup is attained at the
// endpoint; directions at each separation are seeded uniform rotations.
ConstantsEstimate estimate_constants(const EmbeddingHandle& e,
                                     std::uint64_t seed, int pairs,
                                     double dist_lo = 0.1,
                                     double dist_hi = 20.0);

// Max over interior samples of the geodesic (a, b) of the distance from the
// image to the Weyl cone spanned by the images of the two end samples; the
// ends sit at arclength +-span from the top of the geodesic.
double morse_defect(const EmbeddingHandle& e, double a, double b,
                    int samples = 33, double span = 4.0);

// One row per point: vertex id, domain coordinates, row-major matrix entries.
void dump_embedding_csv(EmbeddingHandle& e,
                        const std::vector<std::pair<long long, HypPoint>>& pts,
                        std::ostream& out);

}  // namespace symharm
