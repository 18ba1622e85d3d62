#pragma once

// Shared helpers for the test suites: an independent normal CDF built on
// std::erf, a regularized incomplete gamma for chi-square p-values, and small
// statistics utilities. These deliberately avoid the library's own code paths
// so they can serve as oracles.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace testutil {

// Reference normal CDF through the C library's erf, independent of the
// library's rational approximation.
inline double phi_ref(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Regularized incomplete gamma functions (series / continued fraction),
// accurate to ~1e-12 for the small degrees of freedom used here.
inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Q(a, x) = upper regularized incomplete gamma; chi-square p-value is
// Q(df/2, stat/2).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

// Chi-square goodness-of-fit p-value for observed counts against expected
// counts. Bins with expected counts below `min_expected` are pooled into
// their left neighbor, standard practice for sparse tails.
inline double chi_square_pvalue(std::vector<double> observed, std::vector<double> expected,
                                double min_expected = 5.0) {
  std::vector<double> obs, exp;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!exp.empty() && (expected[i] < min_expected || exp.back() < min_expected)) {
      exp.back() += expected[i];
      obs.back() += observed[i];
    } else {
      exp.push_back(expected[i]);
      obs.push_back(observed[i]);
    }
  }
  if (exp.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double diff = obs[i] - exp[i];
    stat += diff * diff / exp[i];
  }
  const double df = static_cast<double>(exp.size() - 1);
  return gamma_q(df / 2.0, stat / 2.0);
}

struct MeanStd {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MeanStd mean_and_se(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace testutil
