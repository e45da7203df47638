#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dme/esd.hpp"
#include "dme/sampler.hpp"
#include "oracle.hpp"

using namespace dme;

TEST_CASE("Esd containers") {
    const Esd1D e({3.0, 1.0, 2.0});
    CHECK(e[0] == 1.0);
    CHECK(e[2] == 3.0);
    CHECK_THROWS_AS(Esd1D({1.0, std::nan("")}), InvariantError);
    CHECK_THROWS_AS(Esd2D({Complex(std::numeric_limits<double>::infinity(), 0.0)}), InvariantError);
    CHECK_THROWS_AS(Histogram({0.0, 0.0}, {1}), InvariantError);
    CHECK_THROWS_AS(Histogram({0.0, 1.0}, {1, 2}), InvariantError);
}

TEST_CASE("one-sample KS") {
    const auto q = ReferenceLaw::quarter_circle(1.0);
    std::vector<double> strat(1000);
    for (std::size_t i = 0; i < 1000; ++i) strat[i] = quantile(q, (i + 0.5) / 1000.0);
    CHECK(ks_distance(Esd1D(strat), q) <= 5e-4 + 1e-12);

    CHECK(ks_distance(Esd1D(std::vector<double>(50, 0.0)), q) == 1.0);
    CHECK_THROWS_AS(ks_distance(Esd1D(), q), ParameterError);

    // Invariance under reordering and agreement with the oracle.
    RngStream rng(601, 0);
    std::vector<double> x(500);
    for (double& v : x) v = law_sample(q, rng);
    const double d = ks_distance(Esd1D(x), q);
    std::reverse(x.begin(), x.end());
    CHECK(ks_distance(Esd1D(x), q) == d);
    CHECK(d == doctest::Approx(oracle::ks_one_sample(x, [&](double t) { return cdf(q, t); })).epsilon(1e-14));

    // Replacing one point moves the statistic by at most 1/n.
    for (int t = 0; t < 50; ++t) {
        auto y = x;
        y[static_cast<std::size_t>(t) * 7 % y.size()] = 2.0 * rng.uniform();
        CHECK(std::abs(ks_distance(Esd1D(y), q) - d) <= 1.0 / x.size() + 1e-15);
    }
}

TEST_CASE("two-sample KS") {
    CHECK(two_sample_ks(Esd1D({1, 2, 3}), Esd1D({1, 2, 3})) == 0.0);
    CHECK(two_sample_ks(Esd1D({0, 0}), Esd1D({1, 1, 1})) == 1.0);
    CHECK(two_sample_ks(Esd1D({1, 2}), Esd1D({2, 3})) == doctest::Approx(0.5));
    RngStream rng(602, 0);
    std::vector<double> a(300), b(200);
    for (double& v : a) v = std::floor(10 * rng.uniform());
    for (double& v : b) v = std::floor(10 * rng.uniform());
    CHECK(two_sample_ks(Esd1D(a), Esd1D(b)) == doctest::Approx(oracle::ks_two_sample(a, b)).epsilon(1e-14));
}

TEST_CASE("Wasserstein distances") {
    const Esd1D e({0.3, -1.0, 2.5, 0.0});
    for (unsigned k : {1u, 2u, 3u}) CHECK(wasserstein(e, e, k) == 0.0);

    const Esd1D zero({0.0}), c({1.75});
    for (unsigned k : {1u, 2u, 5u}) CHECK(wasserstein(zero, c, k) == doctest::Approx(1.75));

    // Unequal sizes: {0, 1} vs {0, 0.5, 1}: quantiles differ on (1/3,1/2) by 0.5 and on (1/2,2/3) by 0.5.
    CHECK(wasserstein(Esd1D({0.0, 1.0}), Esd1D({0.0, 0.5, 1.0}), 1) == doctest::Approx(1.0 / 6.0));

    RngStream rng(603, 0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(1 + t % 5), y(2 + t % 3), z(3 + t % 4);
        for (double& v : x) v = rng.normal();
        for (double& v : y) v = rng.normal();
        for (double& v : z) v = rng.normal();
        for (unsigned k : {1u, 2u}) {
            const double xy = wasserstein(Esd1D(x), Esd1D(y), k);
            const double yz = wasserstein(Esd1D(y), Esd1D(z), k);
            const double xz = wasserstein(Esd1D(x), Esd1D(z), k);
            CHECK(xz <= xy + yz + 1e-12);
        }
    }

    // Against a law: point mass at c versus Exp(1) has W1 = E|X - c|.
    const double w1 = wasserstein(Esd1D({1.0}), ReferenceLaw::exponential(), 1);
    CHECK(w1 == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-3));

    // Row law of a large DME row is close to Exp(1).
    auto row = sample_dme_row(5000, 0, RngStream(604, 0));
    for (double& v : row) v *= 5000.0;
    CHECK(wasserstein(Esd1D(row), ReferenceLaw::exponential(), 1) < 0.1);

    CHECK_THROWS_AS(wasserstein(Esd1D(), Esd1D({1.0}), 1), ParameterError);
    CHECK_THROWS_AS(wasserstein(e, e, 0), ParameterError);
}

TEST_CASE("circle law statistics") {
    const auto c = ReferenceLaw::circle(1.0);
    RngStream rng(605, 0);
    std::vector<Complex> pts(10000);
    for (auto& z : pts) z = circle_sample(c, rng);
    const auto st = circle_law_stats(Esd2D(pts), 0);
    CHECK(st.radial_ks < 0.02);
    CHECK(st.angular_ks < 0.02);
    CHECK(st.max_modulus <= 1.0);

    const auto zeros = circle_law_stats(Esd2D(std::vector<Complex>(20, Complex(0, 0))), 0);
    CHECK(zeros.radial_ks == 1.0);

    pts.push_back(Complex(50.0, 0.0));
    const auto excl = circle_law_stats(Esd2D(pts), 1);
    CHECK(excl.max_modulus <= 1.0);
    CHECK(excl.excluded == 1);
    CHECK_THROWS_AS(circle_law_stats(Esd2D(pts), pts.size()), ParameterError);

    const auto m = sample_dme(81, RngStream(606, 0));
    const auto dme_stats = circle_law_stats(Esd2D::from_spectrum(eigenvalues(m.matrix()), 9.0), 1);
    CHECK(dme_stats.max_modulus > 0.7);
    CHECK(dme_stats.max_modulus < 1.3);
}

TEST_CASE("moments and histograms") {
    const Esd1D e({1.0, 2.0, 3.0});
    CHECK(moments(e, 0) == 1.0);
    CHECK(moments(e, 1) == doctest::Approx(2.0));
    CHECK(moments(e, 2) == doctest::Approx(14.0 / 3.0));

    const auto q = ReferenceLaw::quarter_circle(1.0);
    RngStream rng(607, 0);
    std::vector<double> x(100000);
    for (double& v : x) v = law_sample(q, rng);
    const Esd1D qe(x);
    CHECK(std::abs(moments(qe, 2) - 1.0) < 0.02);

    const auto h = histogram(qe, 25);
    CHECK(h.bins() == 25);
    CHECK(h.total() == x.size());
    CHECK(h.edges().front() == qe[0]);
    CHECK(h.edges().back() == qe[qe.size() - 1]);

    const auto hc = histogram(Esd1D({2.0, 2.0}), 3);
    CHECK(hc.total() == 2);

    const auto he = histogram(e, std::vector<double>{0.0, 1.5, 3.0});
    CHECK(he.counts()[0] == 1);
    CHECK(he.counts()[1] == 2);
    CHECK_THROWS_AS(histogram(e, std::vector<double>{0.0, 2.5}), ParameterError);
    CHECK_THROWS_AS(histogram(e, 0), ParameterError);
}
