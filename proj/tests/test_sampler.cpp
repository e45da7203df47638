#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "dme/sampler.hpp"
#include "dme/spectra.hpp"
#include "oracle.hpp"

using namespace dme;

namespace {

std::vector<double> draws(std::size_t count, RngStream rng, double (*f)(RngStream&)) {
    std::vector<double> x(count);
    for (double& v : x) v = f(rng);
    return x;
}

double beta_1_b_cdf(double x, double b) { return 1.0 - std::pow(1.0 - x, b); }

}  // namespace

TEST_CASE("exp_sample is the inverse-CDF transform of the uniform") {
    RngStream a(3, 0), b(3, 0);
    for (int i = 0; i < 100; ++i) CHECK(exp_sample(a) == -std::log(b.uniform()));
    CHECK(-std::log(std::exp(-1.0)) == doctest::Approx(1.0));
}

TEST_CASE("exp_sample moments") {
    const auto x = draws(1000000, RngStream(42, 0), exp_sample);
    CHECK(std::abs(oracle::mean(x) - 1.0) < 0.005);
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    CHECK(std::abs(oracle::mean(sq) - 2.0) < 0.02);
}

TEST_CASE("gamma_sample") {
    SUBCASE("shape 1 is Exp(1)") {
        RngStream rng(11, 0);
        std::vector<double> x(100000);
        for (double& v : x) v = gamma_sample(1.0, rng);
        CHECK(oracle::ks_one_sample(x, [](double t) { return 1.0 - std::exp(-t); }) < 0.01);
    }
    SUBCASE("shape 2 mean") {
        RngStream rng(12, 0);
        std::vector<double> x(1000000);
        for (double& v : x) v = gamma_sample(2.0, rng);
        CHECK(std::abs(oracle::mean(x) - 2.0) < 0.01);
    }
    SUBCASE("shape 0.5 mean") {
        RngStream rng(13, 0);
        std::vector<double> x(1000000);
        for (double& v : x) v = gamma_sample(0.5, rng);
        CHECK(std::abs(oracle::mean(x) - 0.5) < 0.01);
        // Gamma(1/2) is chi^2_1 / 2.
        CHECK(oracle::ks_one_sample(x, [](double t) { return std::erf(std::sqrt(t)); }) < 0.003);
    }
    SUBCASE("invalid shape") {
        RngStream rng(1, 1);
        CHECK_THROWS_AS(gamma_sample(0.0, rng), ParameterError);
        CHECK_THROWS_AS(gamma_sample(-1.0, rng), ParameterError);
    }
}

TEST_CASE("beta_sample") {
    SUBCASE("Beta(1, 9) mean") {
        RngStream rng(21, 0);
        std::vector<double> x(100000);
        for (double& v : x) v = beta_sample(1.0, 9.0, rng);
        CHECK(std::abs(oracle::mean(x) - 0.1) < 0.005);
    }
    SUBCASE("Beta(1, 1) is uniform") {
        RngStream rng(22, 0);
        std::vector<double> x(100000);
        for (double& v : x) v = beta_sample(1.0, 1.0, rng);
        CHECK(oracle::ks_one_sample(x, [](double t) { return t; }) < 0.01);
    }
    SUBCASE("Beta(2, 3) mean") {
        RngStream rng(23, 0);
        std::vector<double> x(1000000);
        for (double& v : x) v = beta_sample(2.0, 3.0, rng);
        CHECK(std::abs(oracle::mean(x) - 0.4) < 0.003);
    }
    SUBCASE("invalid parameters") {
        RngStream rng(1, 1);
        CHECK_THROWS_AS(beta_sample(0.0, 1.0, rng), ParameterError);
        CHECK_THROWS_AS(beta_sample(1.0, -2.0, rng), ParameterError);
    }
}

TEST_CASE("dirichlet_sample") {
    SUBCASE("n = 1") {
        RngStream rng(1, 0);
        const auto p = dirichlet_sample(DirichletParams({3.5}), rng);
        REQUIRE(p.size() == 1);
        CHECK(p[0] == 1.0);
    }
    SUBCASE("a = (1, 1) first coordinate mean") {
        RngStream rng(31, 0);
        std::vector<double> x(100000);
        for (double& v : x) v = dirichlet_sample(DirichletParams::flat(2), rng)[0];
        CHECK(std::abs(oracle::mean(x) - 0.5) < 0.01);
    }
    SUBCASE("flat n = 100 coordinate variance") {
        const double n = 100.0;
        RngStream rng(32, 0);
        std::vector<double> x(10000);
        for (double& v : x) v = dirichlet_sample(DirichletParams::flat(100), rng)[17];
        const double target = (n - 1.0) / (n * n * (n + 1.0));
        CHECK(std::abs(oracle::variance(x) / target - 1.0) < 0.15);
    }
    SUBCASE("invalid parameters") {
        CHECK_THROWS_AS(DirichletParams({1.0, 0.0}), ParameterError);
        CHECK_THROWS_AS(DirichletParams({}), ParameterError);
    }
}

TEST_CASE("stick-breaking matches the Dirichlet law coordinatewise") {
    const std::vector<double> a{2.0, 1.0, 3.0};
    const std::size_t draws_count = 10000;
    RngStream direct_rng(41, 0), stick_rng(41, 1);
    std::vector<std::vector<double>> direct(3), stick(3);
    for (std::size_t r = 0; r < draws_count; ++r) {
        const auto p = dirichlet_sample(DirichletParams(a), direct_rng);
        const double y = beta_sample(a[0], a[1] + a[2], stick_rng);
        const auto x = dirichlet_sample(DirichletParams({a[1], a[2]}), stick_rng);
        const double q[3] = {y, (1.0 - y) * x[0], (1.0 - y) * x[1]};
        for (int i = 0; i < 3; ++i) {
            direct[i].push_back(p[i]);
            stick[i].push_back(q[i]);
        }
    }
    for (int i = 0; i < 3; ++i) CHECK(oracle::ks_two_sample(direct[i], stick[i]) < 0.02);
}

TEST_CASE("sample_dme basics") {
    CHECK_THROWS_AS(sample_dme(0, RngStream(0, 0)), ParameterError);
    const auto one = sample_dme(1, RngStream(0, 0));
    CHECK(one(0, 0) == 1.0);

    const RngStream rng(5, 5);
    const auto m = sample_dme(30, rng);
    CHECK(m.max_row_sum_error() <= 1e-12);
    CHECK(sample_dme(30, rng).matrix() == m.matrix());
    // Row i does not depend on how many rows are drawn.
    const auto row = sample_dme_row(30, 12, rng);
    for (std::size_t j = 0; j < 30; ++j) CHECK(row[j] == m(12, j));
    for (double x : m.matrix().data()) CHECK(x > 0.0);
}

TEST_CASE("sample_dme covariances at n = 100") {
    const double n = 100.0;
    const std::size_t reps = 10000;
    std::vector<double> m11(reps), m12(reps), m21(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const RngStream rng(51, r);
        const auto row0 = sample_dme_row(100, 0, rng);
        const auto row1 = sample_dme_row(100, 1, rng);
        m11[r] = row0[0];
        m12[r] = row0[1];
        m21[r] = row1[0];
    }
    const double same_row = oracle::covariance(m11, m12);
    const double target = -1.0 / (n * n * (n + 1.0));
    CHECK(std::abs(same_row - target) <= 3.0 * oracle::covariance_se(m11, m12));
    CHECK(same_row < 0.0);
    CHECK(std::abs(oracle::covariance(m11, m21)) <= 3.0 * oracle::covariance_se(m11, m21));
}

TEST_CASE("exchangeability of entries") {
    const std::size_t reps = 10000;
    std::vector<double> a(reps), b(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto m = sample_dme(10, RngStream(61, r));
        a[r] = m(0, 0);
        b[r] = m(3, 7);
    }
    CHECK(oracle::ks_two_sample(a, b) < 0.02);
}

TEST_CASE("sample_dme_recursive") {
    CHECK_THROWS_AS(sample_dme_recursive(0, RngStream(0, 0)), ParameterError);
    CHECK(sample_dme_recursive(1, RngStream(0, 0))(0, 0) == 1.0);

    const std::size_t reps = 10000;
    const std::size_t n = 50;
    std::vector<double> direct(reps), recursive(reps);
    std::vector<double> entry_sum(n * n, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto rec = sample_dme_recursive(n, RngStream(71, r));
        CHECK(rec.max_row_sum_error() <= 1e-12);
        recursive[r] = rec(0, 0);
        for (std::size_t k = 0; k < n * n; ++k) entry_sum[k] += rec.matrix().data()[k];
        direct[r] = sample_dme_row(n, 0, RngStream(72, r))[0];
    }
    double worst = 0.0;
    for (double s : entry_sum) worst = std::max(worst, std::abs(s / reps - 0.02));
    CHECK(worst < 0.002);
    CHECK(oracle::ks_two_sample(direct, recursive) < 0.02);
}

TEST_CASE("extend") {
    const auto one = MarkovMatrix::identity(1);
    const std::vector<double> y{0.3};
    const auto e = extend_with(one, y, SimplexVector({0.2, 0.8}));
    CHECK(e(0, 0) == doctest::Approx(0.3));
    CHECK(e(0, 1) == doctest::Approx(0.7));
    CHECK(e(1, 0) == doctest::Approx(0.2));
    CHECK(e(1, 1) == doctest::Approx(0.8));

    RngStream rng(81, 0);
    for (int r = 0; r < 1000; ++r) {
        const auto base = sample_dme(1 + r % 7, RngStream(82, r));
        const auto grown = extend(base, rng);
        REQUIRE(grown.n() == base.n() + 1);
        CHECK(grown.max_row_sum_error() <= 1e-12);
    }

    SUBCASE("49 -> 50 variance matches direct sampling") {
        const std::size_t reps = 10000;
        std::vector<double> grown(reps), direct(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            RngStream step(83, r);
            grown[r] = extend(sample_dme(49, RngStream(84, r)), step)(0, 0);
            direct[r] = sample_dme_row(50, 0, RngStream(85, r))[0];
        }
        const double target = oracle::variance(direct);
        CHECK(std::abs(oracle::variance(grown) / target - 1.0) < 0.15);
        const double n = 50.0;
        CHECK(std::abs(oracle::variance(grown) / ((n - 1.0) / (n * n * (n + 1.0))) - 1.0) < 0.15);
    }

    CHECK_THROWS_AS(extend_with(one, std::vector<double>{1.5}, SimplexVector({0.5, 0.5})),
                    ParameterError);
    CHECK_THROWS_AS(MarkovMatrix(Matrix(2, 2, 0.7)), InvariantError);
}

TEST_CASE("dirichlet_aggregate") {
    const SimplexVector p({0.2, 0.3, 0.5});
    const auto agg = dirichlet_aggregate(p, {{0, 1}, {2}});
    REQUIRE(agg.size() == 2);
    CHECK(agg[0] == doctest::Approx(0.5));
    CHECK(agg[1] == doctest::Approx(0.5));

    const auto same = dirichlet_aggregate(p, {{0}, {1}, {2}});
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == p[i]);

    CHECK_THROWS_AS(dirichlet_aggregate(p, {{0, 1}, {1, 2}}), ParameterError);
    CHECK_THROWS_AS(dirichlet_aggregate(p, {{0, 1}}), ParameterError);
    CHECK_THROWS_AS(dirichlet_aggregate(p, {{0, 1}, {}, {2}}), ParameterError);
    CHECK_THROWS_AS(dirichlet_aggregate(p, {{0, 1}, {3}}), ParameterError);

    RngStream rng(91, 0);
    std::vector<double> x(100000);
    for (double& v : x) v = dirichlet_aggregate(dirichlet_sample(DirichletParams::flat(4), rng), {{0, 1}, {2, 3}})[0];
    // Beta(2, 2) CDF.
    CHECK(oracle::ks_one_sample(x, [](double t) { return t * t * (3.0 - 2.0 * t); }) < 0.01);
}

TEST_CASE("translations") {
    const auto m = sample_dme(6, RngStream(101, 0));
    CHECK(left_translate(MarkovMatrix::identity(6), m).matrix() == m.matrix());
    CHECK(right_translate(m, MarkovMatrix::identity(6)).matrix() == m.matrix());

    const std::vector<std::size_t> swap{1, 0, 2, 3, 4, 5};
    const auto swapped = left_translate(MarkovMatrix::permutation(swap), m);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(swapped(0, j) == m(1, j));
        CHECK(swapped(1, j) == m(0, j));
        CHECK(swapped(4, j) == m(4, j));
    }

    const auto avg = left_translate(MarkovMatrix::wedderburn(6), m);
    CHECK(avg.max_row_sum_error() <= 1e-12);
    for (std::size_t j = 0; j < 6; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < 6; ++i) col += m(i, j);
        for (std::size_t i = 0; i < 6; ++i) CHECK(avg(i, j) == doctest::Approx(col / 6.0));
    }
    CHECK_THROWS_AS(left_translate(MarkovMatrix::identity(5), m), ParameterError);
}

TEST_CASE("matrix_power") {
    CHECK_THROWS_AS(matrix_power(MarkovMatrix::identity(3), 0), ParameterError);
    const auto m = sample_dme(20, RngStream(111, 0));
    CHECK(matrix_power(m, 1).matrix() == m.matrix());

    Matrix equal_rows(4, 4);
    const double row[4] = {0.1, 0.2, 0.3, 0.4};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) equal_rows(i, j) = row[j];
    const MarkovMatrix e(equal_rows);
    for (unsigned k : {2u, 3u, 7u, 64u}) {
        const auto p = matrix_power(e, k);
        for (std::size_t i = 0; i < 16; ++i) CHECK(p.matrix().data()[i] == doctest::Approx(equal_rows.data()[i]).epsilon(1e-14));
    }

    const auto p64 = matrix_power(m, 64);
    const auto pi = perron_vector(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) worst = std::max(worst, std::abs(p64(i, j) - pi[j]));
    CHECK(worst < 1e-8);
    CHECK(p64.max_row_sum_error() <= 1e-10 * 64);
}

TEST_CASE("row_moment") {
    const auto m = sample_dme(40, RngStream(121, 0));
    for (std::size_t i = 0; i < 40; ++i) CHECK(row_moment(m, i, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(row_moment(m, 40, 2), ParameterError);
    CHECK_THROWS_AS(row_moment(m, 0, 0), ParameterError);

    const auto row = sample_dme_row(5000, 0, RngStream(122, 0));
    CHECK(std::abs(row_moment(row, 2) - 2.0) < 0.1);
    CHECK(std::abs(row_moment(row, 3) - 6.0) < 0.6);
}
