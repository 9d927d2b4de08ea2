#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "../support/oracles.hpp"
#include "brace/gibbs_sampler.hpp"
#include "brace/random.hpp"

using namespace brace;

namespace {

Dataset random_dataset(Index n, Index p, const Vector& beta, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = draw_standard_normal(rng);
  Vector y = X * beta;
  for (Index i = 0; i < n; ++i) y[i] += noise * draw_standard_normal(rng);
  Dataset d = center(X, y);
  for (Index j = 0; j < p; ++j) d.feature_names.push_back("x" + std::to_string(j));
  return d;
}

Labels canonical_nonzero(Labels z) {
  std::map<int, int> m;
  for (int& l : z) {
    if (l == 0) continue;
    auto [it, ins] = m.try_emplace(l, static_cast<int>(m.size()) + 1);
    l = it->second;
  }
  return z;
}

int distinct(const Labels& z) { return static_cast<int>(std::set<int>(z.begin(), z.end()).size()); }

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

TEST_CASE("default hyperparameters") {
  const Hyperparams hp = Hyperparams::defaults_for(100);
  const double a = 1.0 / std::pow(0.75 * std::log(100.0), 2);
  CHECK(hp.a_alpha == doctest::Approx(a));
  CHECK(hp.b_alpha == doctest::Approx(a / 10.0));
  CHECK(hp.a_sigma == 0.001);
  CHECK(hp.b_gamma == 0.001);
  CHECK(hp.alpha0 == 2.0);
  Hyperparams bad = hp;
  bad.b_sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  CHECK(parse_strategy("column-sums") == MarginalStrategy::kColumnSums);
  CHECK_THROWS_AS(parse_strategy("fast"), InvalidInput);
}

TEST_CASE("chain configuration validation") {
  ChainConfig c;
  c.n_iter = 5000;
  c.burn_in = 6000;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.burn_in = 4999;
  c.validate();
  CHECK(c.stored_samples() == 1);
  c.burn_in = 3000;
  c.thin = 7;
  CHECK(c.stored_samples() == 286);
}

TEST_CASE("initial state") {
  const Dataset d = random_dataset(20, 10, Vector::LinSpaced(10, -1, 1), 0.3, 1);
  ChainConfig cfg;
  cfg.init_clusters = 2;
  GibbsSampler two(d, cfg, Hyperparams::defaults_for(10));
  two.init_state();
  CHECK(distinct(two.state().z) == 3);
  const auto f = cluster_frequencies(two.state().z);
  Vector fv(f.K());
  for (Index k = 0; k < f.K(); ++k) fv[k] = f.f[k];
  CHECK(std::abs(fv.dot(two.state().theta)) < 1e-10);
  CHECK(two.state().gamma2 == 1.0);
  CHECK(two.state().alpha == doctest::Approx(Hyperparams::defaults_for(10).a_alpha /
                                             Hyperparams::defaults_for(10).b_alpha));

  cfg.init_clusters = 1;
  GibbsSampler one(d, cfg, Hyperparams::defaults_for(10));
  one.init_state();
  CHECK(distinct(one.state().z) == 2);
  CHECK(one.state().theta.cwiseAbs().maxCoeff() == 0.0);

  cfg.init_clusters = 11;
  GibbsSampler many(d, cfg, Hyperparams::defaults_for(10));
  CHECK_THROWS_AS(many.init_state(), InvalidInput);
}

TEST_CASE("single feature: both candidates score as the null model") {
  const Dataset d = random_dataset(10, 1, Vector::Ones(1), 1.0, 2);
  ChainConfig cfg;
  cfg.init_clusters = 1;
  GibbsSampler s(d, cfg, Hyperparams::defaults_for(2));
  s.init_state();
  const Vector lp = s.label_log_probabilities(0);
  REQUIRE(lp.size() == 2);
  CHECK(std::exp(lp[0]) == doctest::Approx(0.5));
  CHECK(std::exp(lp[1]) == doctest::Approx(0.5));
}

TEST_CASE("spike weight p/(p+1) when every other feature is spiked") {
  // With X = 0 every candidate marginal equals the null model, leaving the prior.
  const Index p = 6;
  Dataset d;
  d.X = Matrix::Zero(8, p);
  d.y = Vector::LinSpaced(8, -1, 1);
  d.x_means = Vector::Zero(p);
  ChainConfig cfg;
  GibbsSampler s(d, cfg, Hyperparams::defaults_for(p));
  GibbsState st;
  st.z = Labels(p, 0);
  st.theta = Vector();
  st.sigma2 = 1.0;
  st.gamma2 = 2.0;
  st.alpha = 0.7;
  s.set_state(st);
  const Vector lp = s.label_log_probabilities(3);
  REQUIRE(lp.size() == 2);
  CHECK(std::exp(lp[0]) == doctest::Approx(double(p) / (p + 1)));
}

TEST_CASE("label sweep reproduces the enumerated posterior for every strategy") {
  const Index p = 4;
  Vector beta(p);
  beta << 1.0, 1.0, -2.0, 0.0;
  const Dataset d = random_dataset(12, p, beta, 0.7, 5);
  const Hyperparams hp = Hyperparams::defaults_for(p);
  const double s2 = 0.6, g2 = 1.5, al = 0.8;

  const auto parts = [&] {
    std::vector<Labels> out;
    for (const Labels& rg : oracle::set_partitions(static_cast<int>(p))) {
      // Each block may be the spike; enumerate which block (if any) is label 0.
      const int blocks = *std::max_element(rg.begin(), rg.end()) + 1;
      for (int spike = -1; spike < blocks; ++spike) {
        Labels z(rg.size());
        for (std::size_t j = 0; j < rg.size(); ++j) {
          z[j] = rg[j] == spike ? 0 : rg[j] + 1;
        }
        out.push_back(canonical_nonzero(compact_labels(z)));
      }
    }
    return out;
  }();
  std::vector<double> weight;
  double total = 0.0;
  for (const Labels& z : parts) {
    const auto f = cluster_frequencies(z);
    const double a0 = hp.alpha0 / 2;
    double lp = lbeta(f.p0 + a0, f.p_z + a0) - lbeta(a0, a0);
    lp += f.K() * std::log(al) + std::lgamma(al) - std::lgamma(al + f.p_z);
    for (int size : f.f) lp += std::lgamma(size);
    lp += log_marginal_y(d.y, d.X, z, s2, g2);
    weight.push_back(std::exp(lp));
    total += weight.back();
  }

  for (auto strategy : {MarginalStrategy::kGram, MarginalStrategy::kColumnSums, MarginalStrategy::kRebuild}) {
    ChainConfig cfg;
    cfg.seed = 9;
    cfg.strategy = strategy;
    GibbsSampler g(d, cfg, hp);
    g.set_state({Labels(p, 1), Vector::Zero(1), s2, g2, al});
    std::map<Labels, double> freq;
    const int N = 60000;
    for (int t = 0; t < N; ++t) {
      g.update_labels();
      freq[canonical_nonzero(g.state().z)] += 1.0 / N;
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const double e = weight[i] / total;
      const double se = std::sqrt(e * (1 - e) * 20.0 / N);
      CHECK(std::abs(freq[parts[i]] - e) < 5.0 * se + 1e-4);
    }
  }
}

TEST_CASE("strategies give the same label probabilities at a shared state") {
  Vector beta = Vector::Zero(30);
  beta.head(6) << 2, 2, 2, -3, -3, 0;
  const Dataset d = random_dataset(25, 30, beta, 0.5, 8);
  const Hyperparams hp = Hyperparams::defaults_for(30);
  Labels z(30);
  for (Index j = 0; j < 30; ++j) z[j] = static_cast<int>(j % 5);
  const GibbsState st{z, Vector::Zero(4), 0.9, 1.1, 1.3};
  std::vector<Vector> results;
  for (auto strategy : {MarginalStrategy::kGram, MarginalStrategy::kColumnSums, MarginalStrategy::kRebuild}) {
    ChainConfig cfg;
    cfg.strategy = strategy;
    GibbsSampler g(d, cfg, hp);
    g.set_state(st);
    results.push_back(g.label_log_probabilities(7));
  }
  CHECK((results[0] - results[1]).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((results[0] - results[2]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("incremental aggregates stay equal to a rebuild") {
  Vector beta = Vector::Zero(40);
  beta.head(8) << 1.5, 1.5, 1.5, -1, -1, -1, -1.5, 0;
  const Dataset d = random_dataset(40, 40, beta, 0.8, 10);
  for (auto strategy : {MarginalStrategy::kGram, MarginalStrategy::kColumnSums}) {
    ChainConfig cfg;
    cfg.strategy = strategy;
    cfg.seed = 3;
    GibbsSampler g(d, cfg, Hyperparams::defaults_for(40));
    g.init_state();
    for (int it = 0; it < 15; ++it) {
      g.sweep();
      const auto rebuilt = aggregates_from_design(d.X, d.y, g.state().z);
      CHECK(rebuilt.sizes == g.aggregates().sizes);
      CHECK((rebuilt.gram - g.aggregates().gram).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((rebuilt.xty - g.aggregates().xty).cwiseAbs().maxCoeff() < 1e-9);
      const auto f = cluster_frequencies(g.state().z);
      CHECK(f.p0 + f.p_z == 40);
      for (int size : f.f) CHECK(size > 0);
    }
  }
}

TEST_CASE("theta update: K = 1 is zero, constraint holds, flat-prior limit is constrained GLS") {
  Vector beta = Vector::Zero(6);
  beta << 2, 2, -1, -1, -2, 0;
  const Dataset d = random_dataset(60, 6, beta, 0.5, 12);
  ChainConfig cfg;
  cfg.seed = 4;
  GibbsSampler g(d, cfg, Hyperparams::defaults_for(6));
  g.set_state({Labels{1, 1, 0, 1, 0, 0}, Vector::Zero(1), 1.0, 1.0, 1.0});
  g.update_theta();
  CHECK(g.state().theta.size() == 1);
  CHECK(g.state().theta[0] == 0.0);

  const Labels z{1, 1, 2, 2, 3, 0};
  const double s2 = 0.25;
  g.set_state({z, Vector::Zero(3), s2, 1e10, 1.0});
  const auto agg = aggregates_from_design(d.X, d.y, z);
  Matrix kkt = Matrix::Zero(4, 4);
  kkt.topLeftCorner(3, 3) = agg.gram;
  kkt(3, 0) = kkt(0, 3) = 2;
  kkt(3, 1) = kkt(1, 3) = 2;
  kkt(3, 2) = kkt(2, 3) = 1;
  Vector rhs = Vector::Zero(4);
  rhs.head(3) = agg.xty;
  const Vector gls = kkt.lu().solve(rhs).head(3);
  Vector mean = Vector::Zero(3);
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    g.update_theta();
    const Vector& t = g.state().theta;
    CHECK(std::abs(2 * t[0] + 2 * t[1] + t[2]) < 1e-10);
    mean += t;
  }
  mean /= N;
  CHECK((mean - gls).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("variance full conditionals") {
  const Hyperparams hp = Hyperparams::defaults_for(50);
  Rng rng(77);
  const int N = 20000;
  std::vector<double> prior, noresid;
  for (int i = 0; i < N; ++i) {
    prior.push_back(draw_gamma2(0.0, 1, hp, rng));
    noresid.push_back(draw_sigma2(0.0, 30, hp, rng));
  }
  // theta = 0, K = 1: gamma2 follows its prior exactly. With shape 1e-3 about
  // half the mass lies beyond the largest representable draw, which the gamma
  // floor clamps to 1 / DBL_MIN; compare the clamped mass to that tail.
  const double clamp = 1.0 / std::numeric_limits<double>::min();
  const auto prior_cdf = [&](double x) { return boost::math::gamma_q(hp.a_gamma, hp.b_gamma / x); };
  std::vector<double> sorted = prior;
  std::sort(sorted.begin(), sorted.end());
  const auto censored = std::count_if(prior.begin(), prior.end(), [&](double v) { return v >= clamp; });
  const double tail = 1.0 - prior_cdf(clamp * (1 - 1e-12));
  CHECK(std::abs(censored / double(N) - tail) < 5.0 * std::sqrt(tail * (1 - tail) / N));
  double d1 = 0.0;
  for (std::size_t i = 0; i + censored < sorted.size(); ++i) {
    const double F = prior_cdf(sorted[i]);
    d1 = std::max({d1, F - double(i) / N, double(i + 1) / N - F});
  }
  CHECK(oracle::ks_p_value(d1, N) > 0.001);
  const double d2 = oracle::ks_statistic(
      noresid, [&](double x) { return boost::math::gamma_q(hp.a_sigma + 15.0, hp.b_sigma / x); });
  CHECK(oracle::ks_p_value(d2, N) > 0.001);

  // Monte-Carlo mean against b / (a - 1).
  const double a = hp.a_sigma + 50.0, b = hp.b_sigma + 40.0;
  double sum = 0.0, sq = 0.0;
  const int M = 100000;
  for (int i = 0; i < M; ++i) {
    const double v = draw_sigma2(80.0, 100, hp, rng);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / M;
  const double se = std::sqrt((sq / M - mean * mean) / M);
  CHECK(std::abs(mean - b / (a - 1.0)) < 3.0 * se);
}

TEST_CASE("concentration update") {
  Hyperparams hp = Hyperparams::defaults_for(100);
  Rng rng(5);
  // p_z = 0: prior draws, Gamma(a, b).
  std::vector<double> prior;
  for (int i = 0; i < 20000; ++i) prior.push_back(draw_concentration(3.0, 0, 0, hp, rng));
  const double d = oracle::ks_statistic(
      prior, [&](double x) { return boost::math::gamma_p(hp.a_alpha, hp.b_alpha * x); });
  CHECK(oracle::ks_p_value(d, prior.size()) > 0.001);
  double alpha = 1.0;
  for (int i = 0; i < 1000; ++i) {
    alpha = draw_concentration(alpha, 5, 40, hp, rng);
    CHECK(alpha > 0.0);
  }
}

TEST_CASE("chain output: constraint, spike semantics, thinning, determinism") {
  Vector beta = Vector::Zero(20);
  beta.head(6) << 1.5, 1.5, 1.5, -2, -2, -0.5;
  const Dataset d = random_dataset(50, 20, beta, 0.5, 31);
  ChainConfig cfg;
  cfg.n_iter = 60;
  cfg.burn_in = 20;
  cfg.thin = 3;
  cfg.seed = 123;
  const Hyperparams hp = Hyperparams::defaults_for(20);
  const ChainTrace a = run_chain(d, cfg, hp);
  CHECK(a.size() == cfg.stored_samples());
  CHECK(a.iteration.front() == 21);
  CHECK(a.iteration[1] == 24);
  for (Index s = 0; s < a.size(); ++s) {
    CHECK(std::abs(a.beta.row(s).sum()) <= 1e-8);
    for (Index j = 0; j < 20; ++j) {
      if (a.z(s, j) == 0) CHECK(a.beta(s, j) == 0.0);
    }
  }
  const ChainTrace b = run_chain(d, cfg, hp);
  CHECK(a.beta == b.beta);
  CHECK(a.z == b.z);
  CHECK(a.sigma2 == b.sigma2);
  CHECK(a.alpha == b.alpha);

  ChainConfig one = cfg;
  one.n_iter = 21;
  one.thin = 1;
  CHECK(run_chain(d, one, hp).size() == 1);

  ChainConfig par = cfg;
  par.parallel_min_clusters = 1;
  const ChainTrace c = run_chain(d, par, hp);
  CHECK(a.beta == c.beta);
  CHECK(a.z == c.z);
}

TEST_CASE("state dump is JSON with the labels") {
  const Dataset d = random_dataset(10, 5, Vector::Zero(5), 1.0, 1);
  GibbsSampler g(d, ChainConfig{}, Hyperparams::defaults_for(5));
  g.init_state();
  const std::string dump = g.dump_state();
  CHECK(dump.find("\"z\"") != std::string::npos);
  CHECK(dump.find("sigma2") != std::string::npos);
}

TEST_CASE("posterior concentrates on the true two-cluster partition") {
  Vector beta(4);
  beta << 2.0, 2.0, -2.0, -2.0;
  int hits = 0;
  for (int run = 0; run < 20; ++run) {
    const Dataset d = random_dataset(50, 4, beta, 0.3, 1000 + run);
    ChainConfig cfg;
    cfg.n_iter = 400;
    cfg.burn_in = 100;
    cfg.init_clusters = 1;
    cfg.seed = 50 + run;
    const ChainTrace t = run_chain(d, cfg, Hyperparams::defaults_for(4));
    std::map<Labels, int> counts;
    for (Index s = 0; s < t.size(); ++s) {
      Labels z(4);
      for (Index j = 0; j < 4; ++j) z[j] = t.z(s, j);
      ++counts[canonical_nonzero(z)];
    }
    const auto mode = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& l, const auto& r) { return l.second < r.second; });
    hits += mode->first == Labels{1, 1, 2, 2};
  }
  CHECK(hits >= 18);
}
