#pragma once

// Categorical value distributions on a fixed axis of Dirac-delta locations:
// support construction, Binomial ground truth, posterior families conditioned
// on a Monte Carlo sample count, and expectations. All types are immutable
// values and all operations are pure, so everything here is thread-safe.

#include <optional>
#include <string>
#include <vector>

namespace catval {

enum class SupportKind { equidistant, cosine, symmetric_equidistant };

// Ordered, strictly increasing value-axis locations z_1..z_m.
//   equidistant:            z_i = (i-1)/(m-1)
//   cosine:                 z_i = 1 - cos(pi*(i-1)/(m-1))
//   symmetric_equidistant:  z_i = -1 + 2*(i-1)/(m-1)
struct Support {
  std::vector<double> locations;
  SupportKind kind = SupportKind::equidistant;

  int size() const { return static_cast<int>(locations.size()); }
  bool operator==(const Support&) const = default;
};

// Probability mass probs[i] at support.locations[i].
struct CategoricalDistribution {
  Support support;
  std::vector<double> probs;
};

enum class PosteriorKind { one_hot, gauss_dynamic, gauss_static };

// Family of posterior distributions assigned to an observed count c out of k.
//   one_hot:       point mass at c/k
//   gauss_dynamic: truncated normal, mu = c/k, sigma = sqrt(mu*(1-mu)/k)
//   gauss_static:  truncated normal, mu = c/k, fixed sigma
// static_sigma applies to gauss_static only; when unset it defaults to
// 2/(3k), i.e. three standard deviations spanning two bin widths.
struct PosteriorSpec {
  PosteriorKind kind = PosteriorKind::one_hot;
  std::optional<double> static_sigma;
};

// Builds an m-location support. normalize_cosine halves the cosine layout so
// it spans [0, 1] instead of the printed [0, 2] range; it has no effect on
// the other kinds.
Support make_support(int m, SupportKind kind, bool normalize_cosine = false);

// Bin(k, p) as a categorical distribution over the equidistant support with
// m = k+1 locations.
CategoricalDistribution binomial_pmf(int k, double p);

// Posterior over the equidistant support with m = k+1 locations. Gaussian
// bins use normal-CDF increments over midpoint edges; the outermost bins
// absorb the tails beyond [0, 1]. A degenerate sigma of zero falls back to
// the point mass.
CategoricalDistribution make_posterior(const PosteriorSpec& spec, int c, int k);

// Sum of p_i * z_i.
double expectation(const CategoricalDistribution& dist);

// Standard normal CDF, absolute error below 1e-9.
double std_normal_cdf(double x);

// Throws std::invalid_argument unless probs has the support's length, is
// nonnegative, and sums to 1 within 1e-9.
void validate(const CategoricalDistribution& dist);

// Name round-trips: "one-hot", "gauss-dynamic", "gauss-static",
// "equidistant", "cosine", "symmetric-equidistant".
std::string posterior_name(const PosteriorSpec& spec);
PosteriorSpec parse_posterior(const std::string& name);
std::string support_kind_name(SupportKind kind);
SupportKind parse_support_kind(const std::string& name);

}  // namespace catval
