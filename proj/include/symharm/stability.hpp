#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "symharm/hyp2.hpp"
#include "symharm/spd.hpp"

namespace symharm {

using MapEvaluator = std::function<SpdPoint(const HypPoint&)>;

// Circle average of the horofunction toward eta pulled back through f,
// centered at the value over x: the quantity whose positivity at every
// boundary direction certifies growth of the map at scale r.
double stability_integral(const MapEvaluator& f, const HypPoint& x, double r,
                          const IdealPoint& eta, int quadrature);

struct StabilityCell {
  HypPoint x;
  double r = 0.0;
  double min_s = 0.0;        // smallest circle average over the eta samples
  IdealPoint argmin;         // direction attaining it
  double ratio = 0.0;        // min_s / r
  double quad_gap = 0.0;     // change of min_s under quadrature doubling
};

struct StabilityOptions {
  double r = 8.0;
  int x_count = 3;           // ball centers: i plus seeded nearby points
  int eta_frames = 8;        // seeded orthogonal frames
  int eta_types = 24;        // lattice points on the chamber type sphere
  int refine_restarts = 64;  // local search around the running argmin
  double refine_decay = 0.92;
  int quadrature = 64;
  double m_hat = 1.0;        // measured root-gap constant of the map
  std::uint64_t seed = 1;
};

struct StabilityReport {
  std::vector<StabilityCell> cells;
  double inf_s = 0.0;
  double inf_ratio = 0.0;
  double threshold = 0.0;    // chamber separation of the target over m_hat
  bool pass = false;         // inf_s >= 1 at the tested scale
  int eta_count = 0;         // directions scored per cell, refinement included
  std::uint64_t seed = 0;
};

// Scores every sampled direction at every sampled center and keeps the
// minimum; evidence with recorded seeds and counts, never a proof.
StabilityReport certify(const MapEvaluator& f, int d,
                        const StabilityOptions& opt = {});

struct DriftStage {
  double r = 0.0;
  double min_s = 0.0;
  double ratio = 0.0;
};

struct DriftReport {
  std::vector<DriftStage> stages;
  double inf_ratio = 0.0;    // over the largest tested radius
  double reference = 0.0;    // 1 / (m_hat * (d - 1))
  int eta_count = 0;
  std::uint64_t seed = 0;
};

// Growth rate of the circle averages across increasing radii, the sampled
// analog of the linear drift of the map.
DriftReport drift_proxy(const MapEvaluator& f, int d,
                        const std::vector<double>& radii,
                        const StabilityOptions& opt = {});

}  // namespace symharm
