#include "catval/distance.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "catval/parallel.hpp"

namespace catval {
namespace {

void require_shared_support(const CategoricalDistribution& a, const CategoricalDistribution& b) {
  if (!(a.support == b.support))
    throw std::invalid_argument("distance: distributions must share an identical support");
}

}  // namespace

double wasserstein1(const CategoricalDistribution& a, const CategoricalDistribution& b) {
  validate(a);
  validate(b);
  require_shared_support(a, b);
  const auto& z = a.support.locations;
  double cum_a = 0.0, cum_b = 0.0, dist = 0.0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    cum_a += a.probs[j];
    cum_b += b.probs[j];
    dist += std::fabs(cum_a - cum_b) * (z[j + 1] - z[j]);
  }
  return dist;
}

double kl_divergence(const CategoricalDistribution& a, const CategoricalDistribution& b) {
  validate(a);
  validate(b);
  require_shared_support(a, b);
  double sum = 0.0;
  for (std::size_t j = 0; j < a.probs.size(); ++j) {
    if (a.probs[j] <= 0.0) continue;
    if (b.probs[j] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += a.probs[j] * std::log(a.probs[j] / b.probs[j]);
  }
  return sum;
}

double statistics_distance(const PosteriorSpec& spec, int k, double p, DistanceMetric metric) {
  const CategoricalDistribution q = binomial_pmf(k, p);
  double total = 0.0;
  for (int c = 0; c <= k; ++c) {
    if (q.probs[c] == 0.0) continue;
    const CategoricalDistribution post = make_posterior(spec, c, k);
    const double d = metric == DistanceMetric::wasserstein ? wasserstein1(post, q)
                                                           : kl_divergence(post, q);
    if (std::isinf(d)) return d;
    total += q.probs[c] * d;
  }
  return total;
}

std::vector<SweepRow> distance_sweep(const std::vector<PosteriorSpec>& specs, int k,
                                     double grid_step, DistanceMetric metric, int threads) {
  if (!(grid_step > 0.0 && grid_step < 1.0))
    throw std::invalid_argument("distance_sweep: grid step must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("distance_sweep: k must be at least 1");

  std::vector<double> grid;
  for (int i = 0; i * grid_step < 1.0 - 1e-12; ++i) grid.push_back(i * grid_step);
  grid.push_back(1.0);

  std::vector<SweepRow> rows(specs.size() * grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const std::size_t si = idx / grid.size();
    const std::size_t pi = idx % grid.size();
    rows[idx] = {posterior_name(specs[si]), grid[pi],
                 statistics_distance(specs[si], k, grid[pi], metric)};
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "spec,p,distance\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.9g", row.p, row.distance);
    out << row.spec_name << ',' << buf << '\n';
  }
}

}  // namespace catval
