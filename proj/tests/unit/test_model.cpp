#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "smilecal/error.hpp"
#include "smilecal/model.hpp"

using namespace smilecal;

namespace {

TenorStructure small_tenor(std::size_t m) {
  TenorStructure t;
  for (std::size_t i = 0; i <= m; ++i) t.times.push_back(0.5 + 0.5 * static_cast<double>(i));
  double p = 0.99;
  t.discounts.push_back(p);
  for (std::size_t i = 0; i < m; ++i) {
    const double f = 0.02 + 0.002 * static_cast<double>(i);
    t.accruals.push_back(0.5);
    t.forwards.push_back(f);
    p /= 1.0 + 0.5 * f;
    t.discounts.push_back(p);
  }
  return t;
}

HaganParams hagan_params(std::size_t m) {
  HaganParams h;
  for (std::size_t i = 0; i < m; ++i) {
    h.phi.push_back(-0.5 + 0.1 * static_cast<double>(i));
    h.nu.push_back(0.4 + 0.05 * static_cast<double>(i));
    h.alpha.push_back(0.08 + 0.01 * static_cast<double>(i));
  }
  h.corr = {0.814904, 3.378797, 0.975928, 3.777324, 0.013940};
  return h;
}

RebonatoParams rebonato_params(std::size_t m) {
  RebonatoParams r;
  for (std::size_t i = 0; i < m; ++i) {
    r.phi.push_back(-0.3);
    r.kappa.push_back(0.0021 + 0.0001 * static_cast<double>(i));
  }
  r.g = {3.7789, 44.7668, 0.3076, 25.3412};
  r.h = {0.0010, 19.5812, 6.2339, 0.5533};
  r.corr = {0.650997, 3.617546, 0.999, 0.380984, 0.001};
  return r;
}

MMParams mm_params(std::size_t m) {
  MMParams p;
  for (std::size_t i = 0; i < m; ++i) {
    p.phi.push_back(-0.2 - 0.05 * static_cast<double>(i));
    p.alpha.push_back(0.1 + 0.005 * static_cast<double>(i));
  }
  p.nu = 0.6;
  p.corr = {0.779175, 2.722489, 1.0, 0.0, 0.0};
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("model names") {
  CHECK(parse_model_kind("hagan") == ModelKind::hagan);
  CHECK(parse_model_kind("mercurio-morini") == ModelKind::mm);
  CHECK(model_name(parse_model_kind("rebonato")) == "rebonato");
  CHECK_THROWS_AS(parse_model_kind("sabr"), ConfigError);
}

TEST_CASE("parametric correlations") {
  const CorrelationParams p{0.814904, 3.378797, 0.975928, 3.777324, 0.013940};
  CHECK(corr_rho(1.0, 1.5, p) == doctest::Approx(0.849078375518937).epsilon(1e-13));
  CHECK(corr_rho(2.0, 2.0, p) == 1.0);
  CHECK(corr_theta(1.0, 3.0, p) == doctest::Approx(0.975928 + 0.024072 * std::exp(-2.0 * 3.777324)).epsilon(1e-14));
  CHECK(corr_phi(1.0, 3.0, -0.49, -0.25, p) == doctest::Approx(-0.35 * std::exp(-2.0 * 0.013940)).epsilon(1e-14));
  CHECK(corr_phi(3.0, 1.0, -0.49, -0.25, p) == doctest::Approx(-0.35 * std::exp(-2.0 * 0.013940)).epsilon(1e-14));
  CHECK(corr_phi(1.0, 1.0, 0.3, 0.3, p) == doctest::Approx(0.3));

  const CorrelationParams far{0.6, 1e6, 0.9, 1e6, 0.0};
  CHECK(corr_rho(1.0, 2.0, far) == doctest::Approx(0.6));
  CHECK(corr_theta(1.0, 2.0, far) == doctest::Approx(0.9));
}

TEST_CASE("assembled matrix, one and two forwards") {
  HaganParams h = hagan_params(1);
  ModelParams one = h;
  const auto p1 = assemble_correlation(one, small_tenor(1));
  REQUIRE(p1.rows() == 2);
  CHECK(p1(0, 0) == 1.0);
  CHECK(p1(1, 1) == 1.0);
  CHECK(p1(0, 1) == doctest::Approx(-0.5));
  CHECK(p1(1, 0) == doctest::Approx(-0.5));

  const auto t2 = small_tenor(2);
  ModelParams two = hagan_params(2);
  const auto& c = correlation_of(two);
  const auto p2 = assemble_correlation(two, t2);
  REQUIRE(p2.rows() == 4);
  const double r = c.eta1 + (1.0 - c.eta1) * std::exp(-c.lambda1 * 0.5);
  const double th = c.eta2 + (1.0 - c.eta2) * std::exp(-c.lambda2 * 0.5);
  const double cross = -std::sqrt(0.5 * 0.4) * std::exp(-c.lambda3 * 0.5);
  CHECK(p2(0, 1) == doctest::Approx(r).epsilon(1e-14));
  CHECK(p2(2, 3) == doctest::Approx(th).epsilon(1e-14));
  CHECK(p2(0, 2) == doctest::Approx(-0.5));
  CHECK(p2(1, 3) == doctest::Approx(-0.4));
  CHECK(p2(0, 3) == doctest::Approx(cross).epsilon(1e-14));
  CHECK(p2(1, 2) == doctest::Approx(cross).epsilon(1e-14));
  CHECK((p2 - p2.transpose()).norm() == 0.0);

  ModelParams mm = mm_params(2);
  const auto pm = assemble_correlation(mm, t2);
  REQUIRE(pm.rows() == 3);
  CHECK(pm(0, 2) == doctest::Approx(-0.2));
  CHECK(pm(2, 1) == doctest::Approx(-0.25));
}

TEST_CASE("factorization and repair") {
  const auto id = factorize_correlation(Eigen::MatrixXd::Identity(5, 5));
  CHECK_FALSE(id.repaired);
  CHECK((id.lower - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);

  Eigen::MatrixXd two(2, 2);
  two << 1.0, 0.6, 0.6, 1.0;
  const auto f2 = factorize_correlation(two);
  CHECK(f2.lower(1, 0) == doctest::Approx(0.6));
  CHECK(f2.lower(1, 1) == doctest::Approx(0.8));

  Eigen::MatrixXd bad(3, 3);
  bad << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
  const auto fb = factorize_correlation(bad);
  CHECK(fb.repaired);
  CHECK(fb.min_eigenvalue < 0.0);
  CHECK((fb.lower * fb.lower.transpose() - fb.matrix).norm() < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(fb.matrix(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fb.matrix);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);

  Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
  nan(0, 1) = nan(1, 0) = std::nan("");
  CHECK_THROWS_AS(factorize_correlation(nan), DomainError);
}

TEST_CASE("calibrated Hagan correlation matrix factorizes") {
  ModelParams h = hagan_params(13);
  const auto p = assemble_correlation(h, testdata::tenor());
  const auto f = factorize_correlation(p);
  CHECK((f.lower * f.lower.transpose() - f.matrix).norm() < 1e-12);
}

TEST_CASE("spot-measure drifts match a direct sum") {
  const auto tenor = small_tenor(5);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.005, 0.05);
  for (ModelParams model : {ModelParams{hagan_params(5)}, ModelParams{rebonato_params(5)}, ModelParams{mm_params(5)}}) {
    MarketState s = initial_state(model, tenor);
    for (auto& f : s.forwards) f = u(gen);
    for (auto& v : s.vols) v *= 1.0 + u(gen);
    for (double t : {0.0, 0.7, 1.6}) {
      s.t = t;
      const auto d = drifts(s, model, tenor);
      const std::size_t h = first_unfixed_index(t, tenor);
      const auto& c = correlation_of(model);
      for (std::size_t i = 0; i < 5; ++i) {
        if (i < h) {
          CHECK(d.forward[i] == 0.0);
          continue;
        }
        auto level = [&](std::size_t j) {
          if (const auto* m = std::get_if<HaganParams>(&model)) return s.vols[j];
          if (const auto* m = std::get_if<MMParams>(&model)) return m->alpha[j] * s.vols[0];
          const auto& r = std::get<RebonatoParams>(model);
          return s.vols[j] * r.g(tenor.times[j] - t);
        };
        double sum_f = 0.0;
        double sum_v = 0.0;
        for (std::size_t j = h; j <= i; ++j) {
          const double cj = tenor.accruals[j] * level(j) * std::pow(s.forwards[j], 0.5) / (1.0 + tenor.accruals[j] * s.forwards[j]);
          sum_f += corr_rho(tenor.times[i], tenor.times[j], c) * cj;
          if (!std::holds_alternative<MMParams>(model)) {
            const auto& phi = std::holds_alternative<HaganParams>(model) ? std::get<HaganParams>(model).phi
                                                                          : std::get<RebonatoParams>(model).phi;
            sum_v += corr_phi(tenor.times[i], tenor.times[j], phi[i], phi[j], c) * cj;
          }
        }
        CHECK(d.forward[i] == doctest::Approx(level(i) * std::sqrt(s.forwards[i]) * sum_f).epsilon(1e-13));
        if (const auto* m = std::get_if<HaganParams>(&model)) {
          CHECK(d.vol[i] == doctest::Approx(m->nu[i] * s.vols[i] * sum_v).epsilon(1e-13));
        } else if (const auto* r = std::get_if<RebonatoParams>(&model)) {
          CHECK(d.vol[i] == doctest::Approx(s.vols[i] * r->h(tenor.times[i] - t) * sum_v).epsilon(1e-13));
        }
      }
    }
  }
}

TEST_CASE("M&M with zero vol-of-vol reduces to a displaced-free CEV LMM drift") {
  const auto tenor = small_tenor(4);
  MMParams p = mm_params(4);
  p.nu = 0.0;
  ModelParams model = p;
  const auto s = initial_state(model, tenor);
  const auto d = drifts(s, model, tenor);
  // Independent LMM: sigma_i F^beta with sigma_i = alpha_i.
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      sum += corr_rho(tenor.times[i], tenor.times[j], p.corr) * 0.5 * p.alpha[j] * std::sqrt(tenor.forwards[j]) /
             (1.0 + 0.5 * tenor.forwards[j]);
    }
    CHECK(d.forward[i] == doctest::Approx(p.alpha[i] * std::sqrt(tenor.forwards[i]) * sum).epsilon(1e-14));
  }
  // And the common factor does not move.
  std::vector<double> z(5, 1.3);
  CHECK(simulate_step(s, model, tenor, 0.01, z).vols[0] == 1.0);
}

TEST_CASE("first unfixed index") {
  const auto tenor = small_tenor(4);  // resets 0.5, 1.0, 1.5, 2.0
  CHECK(first_unfixed_index(0.0, tenor) == 0);
  CHECK(first_unfixed_index(0.4999, tenor) == 0);
  CHECK(first_unfixed_index(0.5, tenor) == 1);
  CHECK(first_unfixed_index(1.99, tenor) == 3);
  CHECK_THROWS_AS(first_unfixed_index(2.0, tenor), DomainError);
  std::size_t prev = 0;
  for (double t = 0.0; t < 2.0; t += 0.013) {
    const std::size_t h = first_unfixed_index(t, tenor);
    CHECK(h >= prev);
    prev = h;
  }
}

TEST_CASE("one Euler step by hand") {
  const auto tenor = small_tenor(2);
  HaganParams h = hagan_params(2);
  ModelParams model = h;
  const auto s = initial_state(model, tenor);
  const std::vector<double> z{0.3, -1.1, 0.7, 0.2};
  const double dt = 0.01;
  const auto d = drifts(s, model, tenor);
  const auto next = simulate_step(s, model, tenor, dt, z);
  for (std::size_t i = 0; i < 2; ++i) {
    const double f = s.forwards[i];
    CHECK(next.forwards[i] == doctest::Approx(f + d.forward[i] * dt + h.alpha[i] * std::sqrt(f) * 0.1 * z[i]).epsilon(1e-14));
    const double v = h.alpha[i];
    const double expected = v * std::exp((d.vol[i] / v - 0.5 * h.nu[i] * h.nu[i]) * dt + h.nu[i] * 0.1 * z[2 + i]);
    CHECK(next.vols[i] == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(next.t == doctest::Approx(dt));
  CHECK_THROWS_AS(simulate_step(s, model, tenor, dt, std::vector<double>(3, 0.0)), DomainError);
}

TEST_CASE("negative forwards are floored inside the diffusion") {
  const auto tenor = small_tenor(1);
  ModelParams model = hagan_params(1);
  MarketState s = initial_state(model, tenor);
  s.forwards[0] = -0.001;
  const auto next = simulate_step(s, model, tenor, 0.01, std::vector<double>{2.0, 0.0});
  CHECK(next.forwards[0] == -0.001);
}

TEST_CASE("validation") {
  HaganParams h = hagan_params(3);
  CHECK_NOTHROW(validate(ModelParams{h}, 3));
  CHECK_THROWS_AS(validate(ModelParams{h}, 4), DomainError);
  h.phi[1] = 1.5;
  CHECK_THROWS_AS(validate(ModelParams{h}, 3), DomainError);
  MMParams m = mm_params(2);
  m.corr.lambda1 = -1.0;
  CHECK_THROWS_AS(validate(ModelParams{m}, 2), DomainError);
}

}
