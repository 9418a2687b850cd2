#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <utility>
#include <vector>

#include "mixfilt/mean_mixture.hpp"
#include "mixfilt/oracle.hpp"
#include "mixfilt/rng.hpp"
#include "support.hpp"

using namespace mixfilt;

namespace {

MeanMixtureModel single_component() { return MeanMixtureModel({{1.0, 1.0, 1.0}}); }

MeanMixtureModel random_model(Rng& rng) {
  const int J = 1 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<MeanMixtureComponent> comps(J);
  double total = 0;
  for (auto& c : comps) {
    c.c = -2.0 + 4.0 * rng.uniform();
    c.sigma = 0.3 + 2.2 * rng.uniform();
    c.v = 0.1 + rng.uniform();
    total += c.v;
  }
  double partial = 0.0;
  for (int j = 0; j + 1 < J; ++j) {
    comps[j].v /= total;
    partial += comps[j].v;
  }
  comps[J - 1].v = 1.0 - partial;
  return MeanMixtureModel(std::move(comps));
}

}  // namespace

TEST_CASE("model construction and validation") {
  const auto sym = symmetric_model();
  CHECK(sym.size() == 2);
  CHECK(sym[0].c == -1.0);
  CHECK(sym[1].c == 1.0);
  CHECK(sym[0].v + sym[1].v == 1.0);
  CHECK(is_symmetric_model(sym));

  const auto cl = clutter_model(0.5);
  CHECK(cl[1].sigma * cl[1].sigma == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(cl[0].c == 1.0);
  CHECK(cl[1].c == 0.0);
  CHECK_FALSE(is_symmetric_model(cl));

  CHECK_THROWS_AS(clutter_model(0.0), std::invalid_argument);
  CHECK_THROWS_AS(clutter_model(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MeanMixtureModel({}), std::invalid_argument);
  CHECK_THROWS_AS(MeanMixtureModel({{1.0, -1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MeanMixtureModel({{1.0, 1.0, 0.9}}), std::invalid_argument);
}

TEST_CASE("log_density closed cases") {
  CHECK(log_density(single_component(), 0.0, 0.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

  const auto sym = symmetric_model();
  for (double x : {0.0, 0.7, -1.3, 4.0}) {
    CHECK(log_density(sym, 1.4, x) == doctest::Approx(log_density(sym, -1.4, x)).epsilon(1e-14));
  }

  // Independent high-precision summation for the clutter density.
  const auto cl = clutter_model(0.5);
  const double mu = 1.0, x = 0.3;
  const long double pi = 3.14159265358979323846L;
  const long double direct =
      0.5L * std::exp(-0.5L * (x - mu) * (x - mu)) / std::sqrt(2.0L * pi) +
      0.5L * std::exp(-static_cast<long double>(x * x) / 20.0L) / std::sqrt(20.0L * pi);
  CHECK(log_density(cl, mu, x) ==
        doctest::Approx(static_cast<double>(std::log(direct))).epsilon(1e-13));
}

TEST_CASE("component posteriors") {
  SUBCASE("single component is the conjugate update") {
    const auto post = component_posteriors(single_component(), {0.3, 2.0}, 1.1);
    REQUIRE(post.size() == 1);
    CHECK(post[0].w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(post[0].m == doctest::Approx((0.3 / 2.0 + 1.1) / (1.0 / 2.0 + 1.0)).epsilon(1e-14));
    CHECK(post[0].s2 == doctest::Approx(1.0 / (1.0 / 2.0 + 1.0)).epsilon(1e-14));
  }

  SUBCASE("symmetric model at x = 0 splits evenly") {
    const double a = 0.8, b = 0.6;
    const auto post = component_posteriors(symmetric_model(), {a, b}, 0.0);
    CHECK(post[0].w == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(post[1].w == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(post[0].m == doctest::Approx(a / (1.0 + b)).epsilon(1e-14));
    CHECK(post[1].m == doctest::Approx(a / (1.0 + b)).epsilon(1e-14));
  }

  SUBCASE("clutter background component carries nothing about mu") {
    const double a = -0.4, b = 1.7;
    const auto post = component_posteriors(clutter_model(0.3), {a, b}, 2.2);
    CHECK(post[1].m == a);
    CHECK(post[1].s2 == b);
  }

  SUBCASE("responsibilities sum to one") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      const auto model = random_model(rng);
      const auto post =
          component_posteriors(model, {rng.normal(), 0.1 + rng.uniform()}, 3.0 * rng.normal());
      double total = 0;
      for (const auto& cp : post) {
        total += cp.w;
        CHECK(cp.s2 > 0.0);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("adf_update exact cases") {
  SUBCASE("conjugate single-component update") {
    const auto next = adf_update(single_component(), {0.0, 1.0}, 2.0);
    CHECK(next.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(next.b == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("symmetric model at x = 0") {
    const double a = 1.2, b = 0.8;
    const auto next = adf_update(symmetric_model(), {a, b}, 0.0);
    CHECK(next.a == doctest::Approx(a / (1.0 + b)).epsilon(1e-12));
    CHECK(next.b == doctest::Approx(b / (1.0 + b)).epsilon(1e-12));
  }

  SUBCASE("degenerate prior is a fixed point up to O(b)") {
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
      const auto model = random_model(rng);
      const double a = rng.normal();
      const double x = 2.0 * rng.normal();
      const double b = 1e-8;
      const auto next = adf_update(model, {a, b}, x);
      CHECK(std::fabs(next.a - a) < 50.0 * b);
      CHECK(std::fabs(next.b - b) < 50.0 * b * b);
    }
  }
}

TEST_CASE("adf_update matches the grid-quadrature posterior moments") {
  Rng rng(42);
  for (int i = 0; i < 20; ++i) {
    const auto model = random_model(rng);
    const GaussianState state{rng.normal(), 0.05 + 2.0 * rng.uniform()};
    const double x = 3.0 * rng.normal();
    const auto exact = adf_update(model, state, x);
    const std::vector<double> data{x};
    const auto grid = oracle::grid_mu_posterior(model, state, data);
    CHECK(std::fabs(exact.a - grid.mean) <= 1e-8 * std::max(1.0, std::fabs(grid.mean)));
    CHECK(std::fabs(exact.b - grid.variance) <= 1e-8 * std::max(1.0, grid.variance));
  }
}

TEST_CASE("asymptotic mean increment") {
  SUBCASE("balanced evidence vanishes") {
    CHECK(asymptotic_mean_increment(symmetric_model(), {0.0, 0.7}, 0.0) == 0.0);
  }

  SUBCASE("symmetric display, including its centering term") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const double a = 3.0 * rng.normal(), b = 0.1 + rng.uniform(), x = 3.0 * rng.normal();
      const double general = asymptotic_mean_increment(symmetric_model(), {a, b}, x);
      CHECK(std::fabs(general - testsupport::symmetric_mean_increment_display(a, b, x)) <= 1e-12);
    }
  }

  SUBCASE("clutter display") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      const double v = 0.1 + 0.8 * rng.uniform();
      const double a = 3.0 * rng.normal(), b = 0.1 + rng.uniform(), x = 3.0 * rng.normal();
      const double general = asymptotic_mean_increment(clutter_model(v), {a, b}, x);
      CHECK(std::fabs(general - testsupport::clutter_mean_increment_display(v, a, b, x)) <= 1e-12);
    }
  }
}

TEST_CASE("asymptotic precision increment and observed information displays") {
  SUBCASE("single component has unit information") {
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
      const double a = 3.0 * rng.normal(), x = 3.0 * rng.normal();
      CHECK(asymptotic_precision_increment(single_component(), {a, 0.5}, x) ==
            doctest::Approx(1.0).epsilon(1e-14));
      CHECK(observed_information(single_component(), a, x) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  SUBCASE("symmetric displays to 1e-12") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      const double c = 3.0 * rng.normal(), x = 3.0 * rng.normal();
      CHECK(std::fabs(asymptotic_precision_increment(symmetric_model(), {c, 0.4}, x) -
                      testsupport::symmetric_precision_increment_display(c, x)) <= 1e-12);
      CHECK(std::fabs(observed_information(symmetric_model(), c, x) -
                      testsupport::symmetric_precision_increment_display(c, x)) <= 1e-12);
    }
  }

  SUBCASE("clutter displays to 1e-12") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
      const double v = 0.1 + 0.8 * rng.uniform();
      const double c = 3.0 * rng.normal(), x = 3.0 * rng.normal();
      CHECK(std::fabs(asymptotic_precision_increment(clutter_model(v), {c, 0.4}, x) -
                      testsupport::clutter_precision_increment_display(v, c, x)) <= 1e-12);
      CHECK(std::fabs(observed_information(clutter_model(v), c, x) -
                      testsupport::clutter_precision_increment_display(v, c, x)) <= 1e-12);
    }
  }

  SUBCASE("precision increment at a = mu0 equals observed information at mu0") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
      const auto model = random_model(rng);
      const double mu0 = 2.0 * rng.normal(), x = 3.0 * rng.normal();
      CHECK(asymptotic_precision_increment(model, {mu0, 0.3}, x) ==
            observed_information(model, mu0, x));
    }
  }

  SUBCASE("symmetric observed information at the origin is 1 - x^2") {
    for (double x : {0.0, 0.5, 1.0, 2.5}) {
      CHECK(observed_information(symmetric_model(), 0.0, x) ==
            doctest::Approx(1.0 - x * x).epsilon(1e-12));
    }
  }
}

TEST_CASE("score") {
  CHECK(score(symmetric_model(), 0.0, 0.0) == 0.0);
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const double mu = 2.0 * rng.normal(), x = 3.0 * rng.normal();
    CHECK(score(single_component(), mu, x) == doctest::Approx(x - mu).epsilon(1e-13));
  }
}

TEST_CASE("score and observed information match log-density differences") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto model = random_model(rng);
    const double mu = 2.0 * rng.normal(), x = 3.0 * rng.normal();
    const auto ld = [&](long double m) { return testsupport::log_density_ld(model, m, x); };

    const double fd_score = testsupport::stencil_derivative(ld, mu);
    CHECK(std::fabs(score(model, mu, x) - fd_score) <=
          1e-6 * std::max(1.0, std::fabs(fd_score)));

    const double fd_info = -testsupport::stencil_second_derivative(ld, mu);
    CHECK(std::fabs(observed_information(model, mu, x) - fd_info) <=
          1e-6 * std::max(1.0, std::fabs(fd_info)));
  }
}

TEST_CASE("complete-data precision") {
  Rng rng(13);
  SUBCASE("symmetric model always sees unit complete-data information") {
    for (int i = 0; i < 50; ++i) {
      const double a = 3.0 * rng.normal(), x = 3.0 * rng.normal();
      CHECK(complete_data_precision(symmetric_model(), {a, 0.5}, x) ==
            doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  SUBCASE("clutter model's value is the signal responsibility") {
    for (int i = 0; i < 50; ++i) {
      const double v = 0.1 + 0.8 * rng.uniform();
      const double a = 2.0 * rng.normal(), x = 3.0 * rng.normal();
      const double t1 = (1.0 - v) * std::exp(-0.5 * (x - a) * (x - a));
      const double t2 = v / std::sqrt(10.0) * std::exp(-x * x / 20.0);
      CHECK(complete_data_precision(clutter_model(v), {a, 0.5}, x) ==
            doctest::Approx(t1 / (t1 + t2)).epsilon(1e-12));
    }
  }

  SUBCASE("never below the exact-match precision increment") {
    for (int i = 0; i < 300; ++i) {
      const auto model = random_model(rng);
      const GaussianState state{2.0 * rng.normal(), 0.05 + 2.0 * rng.uniform()};
      const double x = 3.0 * rng.normal();
      CHECK(complete_data_precision(model, state, x) >=
            asymptotic_precision_increment(model, state, x) - 1e-12);
    }
  }
}

TEST_CASE("asymptotic expansion error shrinks roughly linearly in b") {
  const std::vector<std::pair<MeanMixtureModel, std::pair<double, double>>> cases{
      {symmetric_model(), {0.3, 0.7}},
      {symmetric_model(), {-0.5, 1.2}},
      {clutter_model(0.5), {1.0, -0.4}},
      {clutter_model(0.2), {0.6, 1.9}},
  };
  for (const auto& [model, ax] : cases) {
    const auto [a, x] = ax;
    double prev_prec = 0, prev_mean = 0;
    for (double b : {0.1, 0.01, 0.001}) {
      const auto next = adf_update(model, {a, b}, x);
      const double e_prec = std::fabs((1.0 / next.b - 1.0 / b) -
                                      asymptotic_precision_increment(model, {a, b}, x));
      const double e_mean =
          std::fabs((next.a - a) - asymptotic_mean_increment(model, {a, b}, x)) / b;
      if (b < 0.1) {
        CHECK(e_prec < 0.4 * prev_prec);
        CHECK(e_mean < 0.4 * prev_mean);
      }
      prev_prec = e_prec;
      prev_mean = e_mean;
    }
  }
}

TEST_CASE("symmetric quasi-Bayes recursion") {
  const auto sym = symmetric_model();

  SUBCASE("balanced evidence keeps the origin; gain is 1/(count+1)") {
    const auto next = quasi_bayes_update(sym, {{0.0, 1.0}, 0}, 0.0);
    CHECK(next.state.a == 0.0);
    CHECK(next.state.b == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(next.n == 1);
  }

  SUBCASE("variance depends only on the observation count") {
    CountedGaussianState s{{0.3, 1.0}, 0};
    Rng rng(14);
    for (int k = 1; k <= 12; ++k) {
      s = quasi_bayes_update(sym, s, rng.normal());
      CHECK(s.state.b == doctest::Approx(1.0 / (k + 1.0)).epsilon(1e-15));
      CHECK(s.n == k);
    }
  }

  SUBCASE("one-sided evidence reduces to the signed stochastic approximation") {
    const double a = 0.8, x = 25.0;
    const auto next = quasi_bayes_update(sym, {{a, 1.0}, 4}, x);
    // w -> 0, so A -> a + (x - a)/(n + 2).
    CHECK(next.state.a == doctest::Approx(a + (x - a) / 6.0).epsilon(1e-12));
  }

  SUBCASE("rejects non-symmetric models") {
    CHECK_THROWS_AS(quasi_bayes_update(clutter_model(0.5), {{0.0, 1.0}, 0}, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("confirmed-data recursion") {
  SUBCASE("direct substitution") {
    const auto next = confirmed_update({{0.0, 1.0}, 0}, 1.5, 2);
    CHECK(next.state.a == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(next.state.b == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("label-sign symmetry") {
    const CountedGaussianState s{{0.4, 0.3}, 3};
    CHECK(confirmed_update(s, 1.7, 1).state.a == confirmed_update(s, -1.7, 2).state.a);
  }

  SUBCASE("variance is 1/(count+1) regardless of data") {
    CountedGaussianState s{{0.0, 1.0}, 0};
    Rng rng(15);
    for (int k = 1; k <= 10; ++k) {
      s = confirmed_update(s, 5.0 * rng.normal(), k % 2 == 0 ? 1 : 2);
      CHECK(s.state.b == doctest::Approx(1.0 / (k + 1.0)).epsilon(1e-15));
    }
  }

  SUBCASE("invalid label") {
    CHECK_THROWS_AS(confirmed_update({{0.0, 1.0}, 0}, 1.0, 3), std::invalid_argument);
  }
}

TEST_CASE("recursive ADF concentrates near the truth" * doctest::timeout(300)) {
  // The symmetric likelihood cannot tell mu from -mu, so distance is taken to
  // the nearest of the two.
  const auto sym = symmetric_model();
  const double mu = 1.0;
  const long n = 20000;
  int hits = 0;
  const int replicates = 50;
  for (int r = 0; r < replicates; ++r) {
    Rng rng = Rng::substream(2024, r);
    GaussianState state{0.5, 1.0};
    for (long i = 0; i < n; ++i) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double x = sign * mu + rng.normal();
      state = adf_update(sym, state, x);
    }
    const double dist = std::min(std::fabs(state.a - mu), std::fabs(state.a + mu));
    if (dist < 5.0 * std::sqrt(state.b)) ++hits;
  }
  CHECK(hits >= 48);
}
