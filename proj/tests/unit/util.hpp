#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mcmcperf/glm.hpp"
#include "mcmcperf/rng.hpp"
#include "mcmcperf/simd/dispatch.hpp"

namespace testutil {

inline double rel_err(double a, double b, double floor = 0.0) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor, 1e-300});
}

inline std::vector<mcmcperf::simd::Level> levels() {
  std::vector<mcmcperf::simd::Level> out{mcmcperf::simd::Level::Scalar};
  if (mcmcperf::simd::supported(mcmcperf::simd::Level::Avx2)) out.push_back(mcmcperf::simd::Level::Avx2);
  return out;
}

// Covariates N(0, s^2), beta U(-b, b) drawn from a stream of the library's
// own generator; responses Bernoulli(1/2) so the instance is not tied to beta.
struct Instance {
  mcmcperf::glm::DesignMatrix data;
  std::vector<double> beta;
};

inline Instance random_instance(std::size_t n, std::size_t k, std::uint64_t seed, double xs = 1.0,
                                double bs = 1.0) {
  using namespace mcmcperf;
  rng::DeviateBuffer z(rng::DeviateKind::StdNormal, seed, 11);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, seed, 12);
  std::vector<double> x(n * k), y(n), beta(k);
  for (auto& v : x) v = xs * z.next();
  for (auto& v : y) v = u.next() < 0.5 ? 1.0 : 0.0;
  for (auto& v : beta) v = bs * (2.0 * u.next() - 1.0);
  return {glm::DesignMatrix(n, k, std::move(x), std::move(y)), std::move(beta)};
}

// Plain double loop, no kernels.
inline double naive_loglike(const mcmcperf::glm::DesignMatrix& d, const std::vector<double>& beta) {
  double f = 0.0;
  for (std::size_t n = 0; n < d.n_rows(); ++n) {
    double t = 0.0;
    for (std::size_t k = 0; k < d.n_cols(); ++k) t += d.at(n, k) * beta[k];
    const double sp = t >= 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    f -= (1.0 - d.y()[n]) * t + sp;
  }
  return f;
}

}  // namespace testutil
