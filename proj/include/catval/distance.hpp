#pragma once

// Distances between categorical distributions on a shared support, and the
// statistics-based distance between a posterior family and the ground-truth
// Binomial: DT(spec, q) = E_{c~q}[ d(posterior(. | c), q) ], computed by
// exact enumeration over the k+1 outcomes rather than sampling.

#include <iosfwd>
#include <string>
#include <vector>

#include "catval/distribution.hpp"

namespace catval {

// W1 on a shared support: sum over gaps of |cumA - cumB| * (z_{j+1} - z_j).
// Throws std::invalid_argument when the supports differ.
double wasserstein1(const CategoricalDistribution& a, const CategoricalDistribution& b);

// KL(a || b) with the 0*log(0/.) = 0 convention. Absolute-continuity
// violations (a_j > 0 where b_j = 0) return +infinity rather than clamping.
double kl_divergence(const CategoricalDistribution& a, const CategoricalDistribution& b);

enum class DistanceMetric { wasserstein, kl };

// Exact enumeration: q = Bin(k, p); sum over c of q(c) * metric(posterior(c), q).
// Outcomes with q(c) = 0 contribute nothing. Returns +infinity when the KL
// metric hits an absolute-continuity violation at any weighted outcome.
double statistics_distance(const PosteriorSpec& spec, int k, double p, DistanceMetric metric);

struct SweepRow {
  std::string spec_name;
  double p = 0.0;
  double distance = 0.0;
};

// Rows for every spec x every p in {0, step, 2*step, ..., 1}, spec-major then
// ascending p. Output order is fixed regardless of thread count.
std::vector<SweepRow> distance_sweep(const std::vector<PosteriorSpec>& specs, int k,
                                     double grid_step,
                                     DistanceMetric metric = DistanceMetric::wasserstein,
                                     int threads = 1);

// CSV with header "spec,p,distance"; p in 6-decimal fixed point, distance to
// 9 significant digits.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace catval
