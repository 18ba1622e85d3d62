#include "catval/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace catval {
namespace {

// Rational Chebyshev approximation to erf/erfc after W. J. Cody (1969),
// evaluated in three ranges. Relative error is below 1e-15 everywhere, well
// inside the 1e-9 budget for std_normal_cdf, and the result depends on
// nothing but these coefficients.
double erfc_cody(double x);

double erf_cody(double x) {
  const double ax = std::fabs(x);
  if (ax <= 0.46875) {
    static const double a[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                                3.77485237685302021e+02, 3.20937758913846947e+03,
                                1.85777706184603153e-01};
    static const double b[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                                1.28261652607737228e+03, 2.84423683343917062e+03};
    const double z = ax > 1.11e-16 ? x * x : 0.0;
    double num = a[4] * z;
    double den = z;
    for (int i = 0; i < 3; ++i) {
      num = (num + a[i]) * z;
      den = (den + b[i]) * z;
    }
    return x * (num + a[3]) / (den + b[3]);
  }
  const double r = 1.0 - erfc_cody(ax);
  return x < 0.0 ? -r : r;
}

double erfc_cody(double x) {
  const double ax = std::fabs(x);
  if (ax <= 0.46875) return 1.0 - erf_cody(x);

  double result;
  if (ax <= 4.0) {
    static const double c[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                                6.61191906371416295e+01, 2.98635138197400131e+02,
                                8.81952221241769090e+02, 1.71204761263407058e+03,
                                2.05107837782607147e+03, 1.23033935479799725e+03,
                                2.15311535474403846e-08};
    static const double d[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                                5.37181101862009858e+02, 1.62138957456669019e+03,
                                3.29079923573345963e+03, 4.36261909014324716e+03,
                                3.43936767414372164e+03, 1.23033935480374942e+03};
    double num = c[8] * ax;
    double den = ax;
    for (int i = 0; i < 7; ++i) {
      num = (num + c[i]) * ax;
      den = (den + d[i]) * ax;
    }
    result = (num + c[7]) / (den + d[7]);
  } else if (ax < 26.6) {
    static const double p[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                                1.25781726111229246e-01, 1.60837851487422766e-02,
                                6.58749161529837803e-04, 1.63153871373020978e-02};
    static const double q[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                                5.27905102951428412e-01, 6.05183413124413191e-02,
                                2.33520497626869185e-03};
    const double z = 1.0 / (ax * ax);
    double num = p[5] * z;
    double den = z;
    for (int i = 0; i < 4; ++i) {
      num = (num + p[i]) * z;
      den = (den + q[i]) * z;
    }
    result = z * (num + p[4]) / (den + q[4]);
    result = (5.6418958354775628695e-01 - result) / ax;
  } else {
    result = 0.0;
  }

  // exp(-x^2) split to keep the argument of each exp small and exact.
  const double ysq = std::floor(ax * 16.0) / 16.0;
  const double del = (ax - ysq) * (ax + ysq);
  result *= std::exp(-ysq * ysq) * std::exp(-del);

  return x < 0.0 ? 2.0 - result : result;
}

}  // namespace

Support make_support(int m, SupportKind kind, bool normalize_cosine) {
  if (m < 2) throw std::invalid_argument("make_support: m must be at least 2");
  Support s;
  s.kind = kind;
  s.locations.resize(m);
  for (int i = 0; i < m; ++i) {
    const double f = static_cast<double>(i) / (m - 1);
    switch (kind) {
      case SupportKind::equidistant:
        s.locations[i] = f;
        break;
      case SupportKind::cosine: {
        double z = 1.0 - std::cos(std::numbers::pi * f);
        s.locations[i] = normalize_cosine ? 0.5 * z : z;
        break;
      }
      case SupportKind::symmetric_equidistant:
        s.locations[i] = -1.0 + 2.0 * f;
        break;
    }
  }
  return s;
}

CategoricalDistribution binomial_pmf(int k, double p) {
  if (k < 1) throw std::invalid_argument("binomial_pmf: k must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_pmf: p must lie in [0, 1]");
  CategoricalDistribution dist;
  dist.support = make_support(k + 1, SupportKind::equidistant);
  dist.probs.resize(k + 1);
  double coeff = 1.0;  // C(k, c), exact in double at desk-scale k
  for (int c = 0; c <= k; ++c) {
    dist.probs[c] = coeff * std::pow(p, c) * std::pow(1.0 - p, k - c);
    coeff = coeff * (k - c) / (c + 1);
  }
  return dist;
}

CategoricalDistribution make_posterior(const PosteriorSpec& spec, int c, int k) {
  if (k < 1) throw std::invalid_argument("make_posterior: k must be at least 1");
  if (c < 0 || c > k) throw std::invalid_argument("make_posterior: c must lie in [0, k]");
  if (spec.kind == PosteriorKind::gauss_static && spec.static_sigma && *spec.static_sigma <= 0.0)
    throw std::invalid_argument("make_posterior: static sigma must be positive");

  CategoricalDistribution dist;
  dist.support = make_support(k + 1, SupportKind::equidistant);
  dist.probs.assign(k + 1, 0.0);

  const double mu = static_cast<double>(c) / k;
  double sigma = 0.0;
  switch (spec.kind) {
    case PosteriorKind::one_hot:
      sigma = 0.0;
      break;
    case PosteriorKind::gauss_dynamic:
      sigma = std::sqrt(mu * (1.0 - mu) / k);
      break;
    case PosteriorKind::gauss_static:
      sigma = spec.static_sigma.value_or(2.0 / (3.0 * k));
      break;
  }
  if (sigma == 0.0) {  // point mass; also the sigma->0 limit at c in {0, k}
    dist.probs[c] = 1.0;
    return dist;
  }

  // Normal-CDF increments over midpoint bin edges; the outermost bins absorb
  // the tails beyond [0, 1], so the mass sums to 1 without renormalization
  // and the posterior mean stays pinned near mu at the axis edges.
  const auto& z = dist.support.locations;
  const int m = k + 1;
  for (int j = 0; j < m; ++j) {
    const double cdf_hi =
        j == m - 1 ? 1.0 : std_normal_cdf((0.5 * (z[j] + z[j + 1]) - mu) / sigma);
    const double cdf_lo = j == 0 ? 0.0 : std_normal_cdf((0.5 * (z[j - 1] + z[j]) - mu) / sigma);
    dist.probs[j] = std::max(cdf_hi - cdf_lo, 0.0);
  }
  return dist;
}

double expectation(const CategoricalDistribution& dist) {
  validate(dist);
  double sum = 0.0;
  for (int i = 0; i < dist.support.size(); ++i) sum += dist.probs[i] * dist.support.locations[i];
  return sum;
}

double std_normal_cdf(double x) { return 0.5 * erfc_cody(-x * std::numbers::sqrt2 / 2.0); }

void validate(const CategoricalDistribution& dist) {
  if (static_cast<int>(dist.probs.size()) != dist.support.size())
    throw std::invalid_argument("distribution: probs length must equal support length");
  if (dist.support.size() < 2)
    throw std::invalid_argument("distribution: support must hold at least 2 locations");
  double sum = 0.0;
  for (double p : dist.probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("distribution: negative probability mass");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("distribution: probabilities must sum to 1");
}

std::string posterior_name(const PosteriorSpec& spec) {
  switch (spec.kind) {
    case PosteriorKind::one_hot: return "one-hot";
    case PosteriorKind::gauss_dynamic: return "gauss-dynamic";
    case PosteriorKind::gauss_static: return "gauss-static";
  }
  throw std::invalid_argument("posterior_name: unknown kind");
}

PosteriorSpec parse_posterior(const std::string& name) {
  if (name == "one-hot") return {PosteriorKind::one_hot, std::nullopt};
  if (name == "gauss-dynamic") return {PosteriorKind::gauss_dynamic, std::nullopt};
  if (name == "gauss-static") return {PosteriorKind::gauss_static, std::nullopt};
  throw std::invalid_argument("parse_posterior: unknown posterior '" + name + "'");
}

std::string support_kind_name(SupportKind kind) {
  switch (kind) {
    case SupportKind::equidistant: return "equidistant";
    case SupportKind::cosine: return "cosine";
    case SupportKind::symmetric_equidistant: return "symmetric-equidistant";
  }
  throw std::invalid_argument("support_kind_name: unknown kind");
}

SupportKind parse_support_kind(const std::string& name) {
  if (name == "equidistant") return SupportKind::equidistant;
  if (name == "cosine") return SupportKind::cosine;
  if (name == "symmetric-equidistant") return SupportKind::symmetric_equidistant;
  throw std::invalid_argument("parse_support_kind: unknown kind '" + name + "'");
}

}  // namespace catval
