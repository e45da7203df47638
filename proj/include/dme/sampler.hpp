#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dme/matrix.hpp"
#include "dme/rng.hpp"

namespace dme {

/// Dense n x n row-stochastic matrix: entries in [0, 1], every row sums to 1.
class MarkovMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    /// Validates `m`; throws InvariantError if it is not square, has an entry
    /// outside [0, 1] or a row whose sum is farther than `tolerance` from 1.
    explicit MarkovMatrix(Matrix m, double tolerance = kRowSumTolerance);

    static MarkovMatrix identity(std::size_t n);
    /// The Wedderburn matrix (1/n) 1, every row uniform.
    static MarkovMatrix wedderburn(std::size_t n);
    /// Permutation matrix with a 1 at (i, perm[i]).
    static MarkovMatrix permutation(std::span<const std::size_t> perm);

    std::size_t n() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }

    /// max_i |sum_j M_ij - 1|
    double max_row_sum_error() const;

private:
    Matrix m_;
};

/// Point of the simplex: non-negative coordinates summing to 1.
class SimplexVector {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit SimplexVector(std::vector<double> p, double tolerance = kSumTolerance);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    std::span<const double> values() const { return p_; }

private:
    std::vector<double> p_;
};

/// Positive Dirichlet parameter (a_1, ..., a_n), n >= 1.
class DirichletParams {
public:
    explicit DirichletParams(std::vector<double> a);
    /// (1, ..., 1): the uniform law on the simplex.
    static DirichletParams flat(std::size_t n);

    std::size_t size() const { return a_.size(); }
    std::span<const double> values() const { return a_; }

private:
    std::vector<double> a_;
};

/// Exp(1) by inversion, -log(U) with U uniform on (0, 1).
double exp_sample(RngStream& rng);

/// Gamma with unit rate and the given shape. Marsaglia-Tsang squeeze for
/// shape >= 1; shape < 1 is boosted through Gamma(shape + 1) U^(1/shape).
double gamma_sample(double shape, RngStream& rng);

double beta_sample(double alpha, double beta, RngStream& rng);

/// (G_1, ..., G_n) / sum G_i with independent G_i ~ Gamma(a_i).
SimplexVector dirichlet_sample(const DirichletParams& params, RngStream& rng);

/// The n raw Exp(1) variables behind row `row` of sample_dme(n, rng).
std::vector<double> exp_row(std::size_t n, std::size_t row, const RngStream& rng);

/// Row `row` of sample_dme(n, rng), without building the rest of the matrix.
std::vector<double> sample_dme_row(std::size_t n, std::size_t row, const RngStream& rng);

/// Uniform random Markov matrix: row i is n exponentials from rng.substream(i)
/// divided by their sum. `rng` is not advanced.
MarkovMatrix sample_dme(std::size_t n, const RngStream& rng);

/// Same law as sample_dme, built by growing [[1]] one block extension at a
/// time; step k draws from rng.substream(k).
MarkovMatrix sample_dme_recursive(std::size_t n, const RngStream& rng);

/// Block extension [[Y, (1 - Y) M], [Z]] with Y_i ~ Beta(1, n) and
/// Z ~ Dirichlet_{n+1}(1, ..., 1) drawn from `rng`.
MarkovMatrix extend(const MarkovMatrix& m, RngStream& rng);

/// Block extension with caller-supplied Y (length n, entries in [0, 1]) and Z (length n + 1).
MarkovMatrix extend_with(const MarkovMatrix& m, std::span<const double> y, const SimplexVector& z);

/// Sums of p over each block of `partition` (0-based indices). The blocks must
/// be non-empty, disjoint and cover 0..n-1.
SimplexVector dirichlet_aggregate(const SimplexVector& p,
                                  const std::vector<std::vector<std::size_t>>& partition);

/// T M
MarkovMatrix left_translate(const MarkovMatrix& t, const MarkovMatrix& m);
/// M T
MarkovMatrix right_translate(const MarkovMatrix& m, const MarkovMatrix& t);

/// M^k by repeated squaring. The result is checked against a row-sum
/// tolerance of 1e-10 k; drift beyond 1e-8 is reported as InvariantError.
MarkovMatrix matrix_power(const MarkovMatrix& m, unsigned k);

/// (1/n) sum_j (n M_ij)^k for row i (0-based), k >= 1.
double row_moment(const MarkovMatrix& m, std::size_t i, unsigned k);
/// Same statistic for a single stochastic row of length n.
double row_moment(std::span<const double> row, unsigned k);

}  // namespace dme
