#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcmcperf/sampler.hpp"
#include "util.hpp"

using namespace mcmcperf;
using sampler::ChainConfig;
using sampler::GaussianPrior;

TEST_SUITE("sampler") {

TEST_CASE("coordinate log posterior equals a full recompute") {
  const auto inst = testutil::random_instance(500, 4, 3);
  GaussianPrior prior{{0.1, -0.2, 0.3, 0.0}, {1.0, 2.0, 0.5, 3.0}};
  glm::GlmWorkspace ws(inst.data, inst.beta);
  for (std::size_t k = 0; k < 4; ++k) {
    for (double d : {-1.3, 0.0, 0.01, 2.2}) {
      auto b = inst.beta;
      b[k] += d;
      const double full = sampler::log_posterior_full(inst.data, b, prior);
      CHECK(testutil::rel_err(sampler::log_posterior_coord(ws, inst.data, prior, k, d), full) < 1e-8);
    }
  }
  const auto flat = GaussianPrior::isotropic(4, 0.0, 1e6);
  CHECK(sampler::log_posterior_coord(ws, inst.data, flat, 0, 0.0) ==
        doctest::Approx(glm::loglike(inst.data, inst.beta, {})).epsilon(1e-10));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(GaussianPrior::isotropic(2, 0.0, 0.0), InputError);
  GaussianPrior p{{0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(p.validate(2), InputError);
  ChainConfig c;
  c.n_iter = 5;
  c.n_burnin = 5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.n_burnin = 0;
  c.slice_width = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK_THROWS_AS(glm::DesignMatrix(0, 1, {}, {}), InputError);
}

TEST_CASE("standard normal target") {
  // One row with x = 0 makes the likelihood constant; the prior is the target.
  glm::DesignMatrix d(1, 1, {0.0}, {1.0});
  const auto prior = GaussianPrior::isotropic(1, 0.0, 1.0);
  ChainConfig cfg;
  cfg.n_iter = 100000;
  cfg.seed = 12;
  const auto out = sampler::run_chain(d, prior, cfg);
  const double m = out.mean()[0], sd = out.sd()[0];
  CHECK(std::fabs(m) < 0.05);
  CHECK(sd * sd > 0.9);
  CHECK(sd * sd < 1.1);

  // Quantiles against the normal CDF.
  std::vector<double> x;
  for (std::size_t i = 0; i < out.n_draws(); ++i) x.push_back(out.draw(i)[0]);
  std::sort(x.begin(), x.end());
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const double v = x[static_cast<std::size_t>(q * static_cast<double>(x.size()))];
    CHECK(0.5 * std::erfc(-v / std::sqrt(2.0)) == doctest::Approx(q).epsilon(0.02 / q));
  }
}

TEST_CASE("very narrow target stays near the mode") {
  glm::DesignMatrix d(1, 1, {0.0}, {1.0});
  GaussianPrior prior{{3.0}, {1e-6}};
  glm::GlmWorkspace ws(d, std::vector<double>{3.0});
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, 1, 1);
  ChainConfig cfg;
  cfg.slice_width = 0.5;
  for (int i = 0; i < 100; ++i) {
    const double x = sampler::slice_sample_coord(ws, d, prior, 0, u, cfg);
    CHECK(std::fabs(x - 3.0) < cfg.slice_width);
  }
}

TEST_CASE("stepping-out limit raises") {
  glm::DesignMatrix d(1, 1, {0.0}, {1.0});
  const auto prior = GaussianPrior::isotropic(1, 0.0, 1e4);
  glm::GlmWorkspace ws(d, std::vector<double>{0.0});
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, 1, 1);
  ChainConfig cfg;
  cfg.slice_width = 1e-3;
  cfg.slice_max_steps = 5;
  CHECK_THROWS_AS(sampler::slice_sample_coord(ws, d, prior, 0, u, cfg), SamplerError);
}

TEST_CASE("determinism and retained draws") {
  const auto syn = glm::synthetic_glm(300, 3, 8);
  const auto prior = GaussianPrior::isotropic(3, 0.0, 5.0);
  ChainConfig cfg;
  cfg.n_iter = 51;
  cfg.n_burnin = 50;
  const auto one = sampler::run_chain(syn.data, prior, cfg);
  CHECK(one.n_draws() == 1);
  cfg.n_iter = 200;
  cfg.n_burnin = 20;
  const auto a = sampler::run_chain(syn.data, prior, cfg);
  const auto b = sampler::run_chain(syn.data, prior, cfg);
  CHECK(a.n_draws() == 180);
  CHECK(a.draws == b.draws);
  CHECK(a.accept_evals == b.accept_evals);
  CHECK(a.accept_evals > 200 * 3 * 3);
  for (double v : a.draws) CHECK(std::isfinite(v));
}

TEST_CASE("diff-update and full-recompute chains agree") {
  const auto syn = glm::synthetic_glm(2000, 4, 9);
  const auto prior = GaussianPrior::isotropic(4, 0.0, 5.0);
  ChainConfig cfg;
  cfg.n_iter = 300;
  cfg.n_burnin = 0;
  const auto fast = sampler::run_chain(syn.data, prior, cfg);
  cfg.use_diff_update = false;
  const auto slow = sampler::run_chain(syn.data, prior, cfg);
  REQUIRE(fast.draws.size() == slow.draws.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < fast.draws.size(); ++i) worst = std::max(worst, std::fabs(fast.draws[i] - slow.draws[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("draws do not depend on the execution plan") {
  const auto syn = glm::synthetic_glm(3000, 3, 10);
  const auto prior = GaussianPrior::isotropic(3, 0.0, 5.0);
  ChainConfig cfg;
  cfg.n_iter = 200;
  const auto ref = sampler::run_chain(syn.data, prior, cfg, {glm::Strategy::Plf, 1, 1, 1});
  for (glm::ExecPlan p : {glm::ExecPlan{glm::Strategy::Som, 4, 1, 2}, glm::ExecPlan{glm::Strategy::PlfChunked, 3, 4, 2},
                          glm::ExecPlan{glm::Strategy::Sharded, 4, 2, 2}}) {
    const auto out = sampler::run_chain(syn.data, prior, cfg, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.draws.size(); ++i) worst = std::max(worst, std::fabs(ref.draws[i] - out.draws[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("posterior concentrates around the generating coefficients") {
  const std::vector<double> beta_true{0.8, -0.5, 0.3};
  const auto syn = glm::synthetic_glm(3000, beta_true, 11);
  ChainConfig cfg;
  cfg.n_iter = 2500;
  cfg.n_burnin = 500;
  const auto out = sampler::run_chain(syn.data, GaussianPrior::isotropic(3, 0.0, 10.0), cfg);
  const auto m = out.mean(), sd = out.sd();
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::fabs(m[k] - beta_true[k]) < 3.0 * sd[k]);
}

TEST_CASE("draws csv") {
  sampler::ChainOutput out;
  out.n_cols = 2;
  out.draws = {1.5, -2.0, 0.25, 3.0};
  std::ostringstream os;
  sampler::write_draws_csv(os, out);
  CHECK(os.str() == "0,1\n1.5,-2\n0.25,3\n");
}

}  // TEST_SUITE
