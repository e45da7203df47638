#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dme/experiments.hpp"
#include "dme/spectra.hpp"

using namespace dme;

namespace {

ExperimentConfig config(const std::string& name, std::size_t n, std::size_t reps, std::uint64_t seed) {
    ExperimentConfig c;
    c.name = name;
    c.n = n;
    c.reps = reps;
    c.seed = seed;
    return c;
}

double stat(const ExperimentReport& r, const std::string& key) {
    auto it = r.statistics.find(key);
    REQUIRE_MESSAGE(it != r.statistics.end(), key);
    return it->second;
}

bool criterion_passes(const ExperimentReport& r, const std::string& name) {
    const Criterion* c = r.criterion(name);
    REQUIRE_MESSAGE(c != nullptr, name);
    return c->pass;
}

void require_same(const ExperimentReport& a, const ExperimentReport& b) {
    CHECK(a.statistics == b.statistics);
    REQUIRE(a.criteria.size() == b.criteria.size());
    for (std::size_t i = 0; i < a.criteria.size(); ++i) {
        CHECK(a.criteria[i].value == b.criteria[i].value);
        CHECK(a.criteria[i].pass == b.criteria[i].pass);
    }
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t i = 0; i < a.artifacts.size(); ++i) CHECK(a.artifacts[i].rows == b.artifacts[i].rows);
    CHECK(a.config.extra == b.config.extra);
}

}  // namespace

TEST_CASE("registry lists every experiment and rejects unknown names") {
    const auto names = experiment_names();
    CHECK(names.size() == 9);
    CHECK_THROWS_AS(run_experiment(config("nope", 10, 1, 0)), ParameterError);
}

TEST_CASE("param records the fallback in the echo") {
    ExperimentConfig c;
    CHECK(c.param("k", 3.0) == 3.0);
    CHECK(c.has("k"));
    c.extra["j"] = 5.0;
    CHECK(c.param("j", 1.0) == 5.0);
}

TEST_CASE("every criterion threshold appears in the config echo or the statistics") {
    const std::vector<ExperimentConfig> configs = {
        config("quarter_circle", 60, 2, 1),  config("circle_law", 40, 1, 1),  config("spectral_gap", 30, 5, 1),
        config("marginals", 20, 200, 1),     config("translation", 6, 200, 1), config("row_asymptotics", 600, 1, 1),
        config("generic_mp", 60, 1, 1),      config("symmetric_part", 60, 1, 1), config("kernel_convergence", 10, 2, 1)};
    for (const auto& c : configs) {
        const auto r = run_experiment(c);
        CHECK(r.config.name == c.name);
        CHECK(r.config.n == c.n);
        CHECK(r.failures.empty());
        CHECK_FALSE(r.criteria.empty());
        for (const auto& cr : r.criteria) {
            for (const auto& key : cr.thresholds) {
                INFO(c.name << " / " << cr.name << " / " << key);
                CHECK((r.config.extra.count(key) == 1 || r.statistics.count(key) == 1));
            }
        }
    }
}

TEST_CASE("defaults are resolved into the echo") {
    const auto r = exp_kernel_convergence(ExperimentConfig{});
    CHECK(r.config.n == 20);
    CHECK(r.config.reps == 1);
    CHECK(r.config.name == "kernel_convergence");
}

TEST_CASE("identical configs reproduce bit for bit, independent of thread count") {
    SUBCASE("circle law") {
        auto c = config("circle_law", 81, 3, 7);
        require_same(run_experiment(c), run_experiment(c));
    }
    SUBCASE("spectral gap under four threads") {
        auto c = config("spectral_gap", 60, 24, 3);
        const auto one = run_experiment(c);
        c.threads = 4;
        require_same(one, run_experiment(c));
    }
    SUBCASE("marginals under four threads") {
        auto c = config("marginals", 50, 3000, 11);
        const auto one = run_experiment(c);
        c.threads = 4;
        require_same(one, run_experiment(c));
    }
    SUBCASE("row ladder under three threads") {
        auto c = config("row_asymptotics", 1000, 1, 2);
        const auto one = run_experiment(c);
        c.threads = 3;
        require_same(one, run_experiment(c));
    }
}

TEST_CASE("different seeds give different statistics") {
    const auto a = run_experiment(config("quarter_circle", 80, 1, 1));
    const auto b = run_experiment(config("quarter_circle", 80, 1, 2));
    CHECK(stat(a, "ks_excl_s1") != stat(b, "ks_excl_s1"));
}

TEST_CASE("quarter circle at n = 300") {
    const auto r = exp_quarter_circle(config("quarter_circle", 300, 1, 1));
    CHECK(stat(r, "ks_excl_s1") < 0.1);
    CHECK(stat(r, "s1_min") >= 1.0 - 1e-12);
    CHECK(stat(r, "edge_fraction") < 0.05);
    CHECK(r.passed());
    REQUIRE(r.artifacts.size() == 2);
    CHECK(r.artifacts[0].columns == std::vector<std::string>{"s"});
    CHECK(r.artifacts[0].rows.size() == 300);
    CHECK(r.artifacts[1].columns == std::vector<std::string>{"edge_lo", "edge_hi", "count"});
}

TEST_CASE("quarter circle with several replicas reports a pass fraction") {
    auto c = config("quarter_circle", 100, 4, 5);
    const auto r = run_experiment(c);
    const Criterion* ks = r.criterion("ks_excl_s1");
    REQUIRE(ks != nullptr);
    CHECK(ks->value >= 0.0);
    CHECK(ks->value <= 1.0);
    CHECK(r.config.extra.count("min_pass_fraction") == 1);
}

TEST_CASE("circle law at n = 81, seed 7") {
    const auto r = exp_circle_law(config("circle_law", 81, 1, 7));
    CHECK(std::abs(stat(r, "lambda1") - 9.0) <= 1e-8);
    CHECK(criterion_passes(r, "conjugate_closed"));
    REQUIRE(r.artifacts.size() == 1);
    const auto& scatter = r.artifacts[0];
    CHECK(scatter.columns == std::vector<std::string>{"re", "im"});
    REQUIRE(scatter.rows.size() == 81);
    CHECK(std::abs(scatter.rows[0][0] - 9.0) <= 1e-8);
    CHECK(scatter.rows[0][1] == 0.0);
    // n = 81 < compare_n: no trend comparison.
    CHECK(r.criterion("radial_ks_decreases") == nullptr);
}

TEST_CASE("circle law at n = 300 reports the radial statistic and the trend") {
    const auto r = exp_circle_law(config("circle_law", 300, 1, 1));
    CHECK(criterion_passes(r, "conjugate_closed"));
    CHECK(stat(r, "radial_ks") > 0.0);
    CHECK(r.statistics.count("radial_ks_compare") == 1);
    const Criterion* radial = r.criterion("radial_ks");
    REQUIRE(radial != nullptr);
    CHECK_FALSE(radial->hard);
}

TEST_CASE("spectral gap on a small run") {
    const auto r = exp_spectral_gap(config("spectral_gap", 80, 40, 3));
    CHECK(stat(r, "modulus_max") <= 1.0 + 1e-9);
    CHECK(criterion_passes(r, "inside_unit_disc"));
    CHECK(stat(r, "replicas_ok") == 40);
    REQUIRE(r.artifacts.size() == 4);
    CHECK(r.artifacts[0].file == "lambda2_modulus_hist.csv");
    CHECK(r.artifacts[1].rows.back()[1] == doctest::Approx(std::numbers::pi));
    std::size_t total = 0;
    for (const auto& row : r.artifacts[1].rows) total += static_cast<std::size_t>(row[2]);
    CHECK(total == 40);
    CHECK(r.artifacts[3].rows.size() == 40);
    CHECK_THROWS_AS(exp_spectral_gap(config("spectral_gap", 1, 5, 0)), ParameterError);
}

TEST_CASE("marginals at n = 100 with 10^4 replicas") {
    const auto r = exp_marginals(config("marginals", 100, 10000, 4));
    CHECK(stat(r, "var_target") == doctest::Approx(9.80198e-5).epsilon(1e-5));
    CHECK(std::abs(stat(r, "var_m11") / stat(r, "var_target") - 1.0) <= 0.15);
    CHECK(std::abs(stat(r, "cov_same_row_23") - stat(r, "cov_same_row_target")) <= 3.0 * stat(r, "cov_same_row_23_se"));
    CHECK(stat(r, "ks_beta") < 0.02);
    CHECK(r.passed());
}

TEST_CASE("translation: permutation, Wedderburn and identity") {
    SUBCASE("cyclic permutation") {
        auto c = config("translation", 10, 10000, 8);
        c.extra["t_kind"] = 1;
        const auto r = exp_translation(c);
        CHECK(stat(r, "analytic_ratio") == 1.0);
        CHECK(stat(r, "invariant") == 1.0);
        CHECK(criterion_passes(r, "ratio_matches"));
    }
    SUBCASE("Wedderburn") {
        const auto r = exp_translation(config("translation", 10, 10000, 8), MarkovMatrix::wedderburn(10));
        CHECK(stat(r, "analytic_ratio") == doctest::Approx(0.1).epsilon(1e-14));
        CHECK(stat(r, "invariant") == 0.0);
        CHECK(criterion_passes(r, "ratio_matches"));
    }
    SUBCASE("identity") {
        auto c = config("translation", 10, 500, 8);
        c.extra["t_kind"] = 0;
        const auto r = exp_translation(c);
        CHECK(stat(r, "analytic_ratio") == 1.0);
        CHECK(stat(r, "empirical_ratio") == 1.0);
        CHECK(stat(r, "invariant") == 1.0);
        CHECK(criterion_passes(r, "ratio_matches"));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(exp_translation(config("translation", 10, 100, 0), MarkovMatrix::identity(4)), ParameterError);
    }
    SUBCASE("unknown kind") {
        auto c = config("translation", 10, 100, 0);
        c.extra["t_kind"] = 7;
        CHECK_THROWS_AS(exp_translation(c), ParameterError);
    }
}

TEST_CASE("row asymptotics ladder to n = 5000") {
    const auto r = exp_row_asymptotics(config("row_asymptotics", 5000, 1, 1));
    CHECK(stat(r, "n4000_sum_dev") < stat(r, "n250_sum_dev"));
    CHECK(stat(r, "n5000_m2") == doctest::Approx(2.0).epsilon(0.05));
    for (const char* key : {"n250_m1", "n500_m1", "n1000_m1", "n2000_m1", "n4000_m1", "n5000_m1"})
        CHECK(std::abs(stat(r, key) - 1.0) <= 1e-12);
    CHECK(stat(r, "n5000_w1") < 0.1);
    CHECK(r.passed());
    REQUIRE(r.artifacts.size() == 1);
    CHECK(r.artifacts[0].rows.size() == 6);
}

TEST_CASE("generic Marchenko-Pastur with exponential entries") {
    const auto small = exp_generic_mp(config("generic_mp", 300, 1, 2));
    CHECK(stat(small, "ks_excl_s1") < 0.1);
    const auto r = exp_generic_mp(config("generic_mp", 400, 1, 2));
    CHECK(stat(r, "s1_centered") >= 1.8);
    CHECK(stat(r, "s1_centered") <= 2.3);
    CHECK(stat(r, "s2") <= 4.0);
    // The uncentred top singular value carries the mean: about sqrt(n).
    CHECK(stat(r, "s1") == doctest::Approx(20.0).epsilon(0.05));
    CHECK(r.passed());
}

TEST_CASE("symmetric part") {
    const auto r = exp_symmetric_part(config("symmetric_part", 400, 1, 1));
    CHECK(stat(r, "asymmetry_max") <= 1e-12);
    CHECK(stat(r, "separation") >= 2.0);
    CHECK(stat(r, "ks_fit") < stat(r, "ks_fit_compare"));
    CHECK(stat(r, "sigma_fit") == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.config.extra.at("scale") == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.passed());
}

TEST_CASE("kernel distances and geometric rate") {
    SUBCASE("equal rows are already in the kernel") {
        Matrix m(3, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            m(i, 0) = 0.2;
            m(i, 1) = 0.3;
            m(i, 2) = 0.5;
        }
        const MarkovMatrix mm(m);
        const auto d = kernel_distances(mm, SimplexVector({0.2, 0.3, 0.5}), {2});
        CHECK(d[0] <= 1e-15);
    }
    SUBCASE("geometric sequence") {
        std::vector<unsigned> k = {2, 4, 6, 8};
        std::vector<double> d;
        for (unsigned x : k) d.push_back(3.0 * std::pow(0.5, x));
        CHECK(geometric_rate(k, d, 1e-300) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(geometric_rate(k, d, 1.0) == 0.0);
    }
    SUBCASE("DME n = 20") {
        const auto r = exp_kernel_convergence(config("kernel_convergence", 20, 1, 1));
        CHECK(stat(r, "perron_residual_max") <= 1e-12);
        CHECK(stat(r, "final_distance_max") <= 1e-8);
        CHECK(std::abs(stat(r, "decay_rate") / stat(r, "lambda2_modulus") - 1.0) <= 0.2);
        CHECK(r.passed());
        REQUIRE(r.artifacts.size() == 1);
        CHECK(r.artifacts[0].rows.size() == 32);
    }
}
