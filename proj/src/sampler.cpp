#include "dme/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dme/error.hpp"

namespace dme {

MarkovMatrix::MarkovMatrix(Matrix m, double tolerance) : m_(std::move(m)) {
    if (!m_.square() || m_.rows() == 0) throw InvariantError("Markov matrix must be square with n >= 1");
    for (std::size_t i = 0; i < m_.rows(); ++i) {
        double sum = 0.0;
        for (double x : m_.row(i)) {
            if (!(x >= -tolerance && x <= 1.0 + tolerance)) {
                throw InvariantError("Markov matrix entry outside [0,1] in row " + std::to_string(i));
            }
            sum += x;
        }
        if (std::abs(sum - 1.0) > tolerance) {
            throw InvariantError("Markov matrix row " + std::to_string(i) + " sums to " +
                                 std::to_string(sum));
        }
    }
}

MarkovMatrix MarkovMatrix::identity(std::size_t n) { return MarkovMatrix(Matrix::identity(n)); }

MarkovMatrix MarkovMatrix::wedderburn(std::size_t n) {
    if (n == 0) throw ParameterError("dimension must be >= 1");
    return MarkovMatrix(Matrix::constant(n, 1.0 / static_cast<double>(n)));
}

MarkovMatrix MarkovMatrix::permutation(std::span<const std::size_t> perm) {
    const std::size_t n = perm.size();
    std::vector<bool> seen(n, false);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] >= n || seen[perm[i]]) throw ParameterError("not a permutation");
        seen[perm[i]] = true;
        m(i, perm[i]) = 1.0;
    }
    return MarkovMatrix(std::move(m));
}

double MarkovMatrix::max_row_sum_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
        double sum = 0.0;
        for (double x : m_.row(i)) sum += x;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

SimplexVector::SimplexVector(std::vector<double> p, double tolerance) : p_(std::move(p)) {
    if (p_.empty()) throw InvariantError("simplex vector must be non-empty");
    double sum = 0.0;
    for (double x : p_) {
        if (!(x >= 0.0)) throw InvariantError("simplex vector has a negative or NaN coordinate");
        sum += x;
    }
    if (std::abs(sum - 1.0) > tolerance) throw InvariantError("simplex vector sums to " + std::to_string(sum));
}

DirichletParams::DirichletParams(std::vector<double> a) : a_(std::move(a)) {
    if (a_.empty()) throw ParameterError("Dirichlet dimension must be >= 1");
    for (double x : a_) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("Dirichlet parameters must be positive");
    }
}

DirichletParams DirichletParams::flat(std::size_t n) { return DirichletParams(std::vector<double>(n, 1.0)); }

double exp_sample(RngStream& rng) { return -std::log(rng.uniform()); }

double gamma_sample(double shape, RngStream& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw ParameterError("gamma shape must be positive");
    if (shape < 1.0) {
        const double boosted = gamma_sample(shape + 1.0, rng);
        return boosted * std::pow(rng.uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double beta_sample(double alpha, double beta, RngStream& rng) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ParameterError("beta parameters must be positive");
    const double g1 = gamma_sample(alpha, rng);
    const double g2 = gamma_sample(beta, rng);
    return g1 / (g1 + g2);
}

SimplexVector dirichlet_sample(const DirichletParams& params, RngStream& rng) {
    std::vector<double> g(params.size());
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = gamma_sample(params.values()[i], rng);
        total += g[i];
    }
    if (!(total > 0.0)) throw NumericalError("all gamma variates underflowed");
    for (double& x : g) x /= total;
    return SimplexVector(std::move(g));
}

std::vector<double> exp_row(std::size_t n, std::size_t row, const RngStream& rng) {
    RngStream stream = rng.substream(row);
    std::vector<double> x(n);
    for (double& v : x) v = exp_sample(stream);
    return x;
}

std::vector<double> sample_dme_row(std::size_t n, std::size_t row, const RngStream& rng) {
    std::vector<double> x = exp_row(n, row, rng);
    double total = 0.0;
    for (double v : x) total += v;
    for (double& v : x) v /= total;
    return x;
}

MarkovMatrix sample_dme(std::size_t n, const RngStream& rng) {
    if (n == 0) throw ParameterError("dimension must be >= 1");
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = sample_dme_row(n, i, rng);
        std::copy(row.begin(), row.end(), m.row(i).begin());
    }
    return MarkovMatrix(std::move(m));
}

MarkovMatrix extend_with(const MarkovMatrix& m, std::span<const double> y, const SimplexVector& z) {
    const std::size_t n = m.n();
    if (y.size() != n || z.size() != n + 1) throw ParameterError("extension blocks have wrong sizes");
    Matrix out(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw ParameterError("extension column entry outside [0,1]");
        out(i, 0) = y[i];
        const double keep = 1.0 - y[i];
        for (std::size_t j = 0; j < n; ++j) out(i, j + 1) = keep * m(i, j);
    }
    for (std::size_t j = 0; j <= n; ++j) out(n, j) = z[j];
    return MarkovMatrix(std::move(out));
}

MarkovMatrix extend(const MarkovMatrix& m, RngStream& rng) {
    const std::size_t n = m.n();
    std::vector<double> y(n);
    for (double& v : y) v = beta_sample(1.0, static_cast<double>(n), rng);
    const SimplexVector z = dirichlet_sample(DirichletParams::flat(n + 1), rng);
    return extend_with(m, y, z);
}

MarkovMatrix sample_dme_recursive(std::size_t n, const RngStream& rng) {
    if (n == 0) throw ParameterError("dimension must be >= 1");
    MarkovMatrix m = MarkovMatrix::identity(1);
    for (std::size_t k = 1; k < n; ++k) {
        RngStream step = rng.substream(k);
        m = extend(m, step);
    }
    return m;
}

SimplexVector dirichlet_aggregate(const SimplexVector& p,
                                  const std::vector<std::vector<std::size_t>>& partition) {
    const std::size_t n = p.size();
    std::vector<bool> covered(n, false);
    std::vector<double> out;
    out.reserve(partition.size());
    std::size_t count = 0;
    for (const auto& block : partition) {
        if (block.empty()) throw ParameterError("partition blocks must be non-empty");
        double s = 0.0;
        for (std::size_t i : block) {
            if (i >= n) throw ParameterError("partition index out of range");
            if (covered[i]) throw ParameterError("partition blocks overlap");
            covered[i] = true;
            ++count;
            s += p[i];
        }
        out.push_back(s);
    }
    if (count != n) throw ParameterError("partition does not cover every index");
    return SimplexVector(std::move(out));
}

MarkovMatrix left_translate(const MarkovMatrix& t, const MarkovMatrix& m) {
    if (t.n() != m.n()) throw ParameterError("translation dimension mismatch");
    return MarkovMatrix(t.matrix() * m.matrix());
}

MarkovMatrix right_translate(const MarkovMatrix& m, const MarkovMatrix& t) {
    if (t.n() != m.n()) throw ParameterError("translation dimension mismatch");
    return MarkovMatrix(m.matrix() * t.matrix());
}

MarkovMatrix matrix_power(const MarkovMatrix& m, unsigned k) {
    if (k == 0) throw ParameterError("matrix power exponent must be >= 1");
    Matrix result;
    bool have_result = false;
    Matrix base = m.matrix();
    for (unsigned e = k;;) {
        if (e & 1u) {
            result = have_result ? result * base : base;
            have_result = true;
        }
        e >>= 1;
        if (e == 0) break;
        base = base * base;
    }
    const double tolerance = std::clamp(1e-10 * k, 1e-12, 1e-8);
    return MarkovMatrix(std::move(result), tolerance);
}

double row_moment(const MarkovMatrix& m, std::size_t i, unsigned k) {
    if (i >= m.n()) throw ParameterError("row index out of range");
    return row_moment(m.row(i), k);
}

double row_moment(std::span<const double> row, unsigned k) {
    if (k == 0) throw ParameterError("moment order must be >= 1");
    if (row.empty()) throw ParameterError("empty row");
    const double n = static_cast<double>(row.size());
    double s = 0.0;
    for (double x : row) s += std::pow(n * x, static_cast<double>(k));
    return s / n;
}

}  // namespace dme
