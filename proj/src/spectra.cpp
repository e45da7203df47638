#include <algorithm>
#include <cmath>
#include <limits>

#include "dme/spectra.hpp"

namespace dme {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// LU with partial pivoting; returns log|pivot| sum and the permutation sign.
/// `singular` is set when a pivot is below n eps max|A|.
template <typename Scalar>
LuDeterminant lu_log_det(std::vector<Scalar> a, std::size_t n) {
    LuDeterminant out;
    double scale = 0.0;
    for (const Scalar& x : a) scale = std::max(scale, std::abs(x));
    const double tiny = static_cast<double>(n) * kEps * scale;
    int sign = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= tiny) {
            out.singular = true;
            out.log_abs_det = -std::numeric_limits<double>::infinity();
            out.sign = 0;
            return out;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            sign = -sign;
        }
        const Scalar pivot = a[k * n + k];
        out.log_abs_det += std::log(std::abs(pivot));
        if constexpr (std::is_same_v<Scalar, double>) {
            if (pivot < 0.0) sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Scalar f = a[i * n + k] / pivot;
            if (f == Scalar(0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    out.sign = sign;
    return out;
}

}  // namespace

SimplexVector perron_vector(const MarkovMatrix& m) {
    const std::size_t n = m.n();
    for (double x : m.matrix().data()) {
        if (!(x > 0.0)) throw DomainError("Perron vector needs a strictly positive matrix");
    }
    constexpr int max_iterations = 100000;
    constexpr double tolerance = 1e-12;
    std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
    for (int it = 0; it < max_iterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = p[i];
            auto row = m.row(i);
            for (std::size_t j = 0; j < n; ++j) next[j] += pi * row[j];
        }
        double total = 0.0;
        for (double x : next) total += x;
        for (double& x : next) x /= total;
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - p[j]);
        p.swap(next);
        if (diff <= tolerance) return SimplexVector(std::move(p));
    }
    throw NumericalError("power iteration for the Perron vector did not converge");
}

std::vector<double> weyl_horn_margins(const ComplexSpectrum& eig, const SingularSpectrum& sv) {
    if (eig.size() != sv.size()) throw ParameterError("spectra of different sizes");
    std::vector<double> margins(eig.size());
    double log_s = 0.0, log_l = 0.0;
    for (std::size_t k = 0; k < eig.size(); ++k) {
        if (sv[k] > 0.0) log_s += std::log(sv[k]);
        const double mod = std::abs(eig[k]);
        if (mod > 0.0) log_l += std::log(mod);
        margins[k] = log_s - log_l;
    }
    return margins;
}

std::vector<double> weyl_horn_check(const Matrix& a) {
    return weyl_horn_margins(eigenvalues(a), singular_values(a));
}

DiagPerturbationReport diag_perturbation_bounds(const Matrix& d, const Matrix& a) {
    if (!d.square() || d.rows() != a.rows() || !a.square()) {
        throw ParameterError("diagonal perturbation needs matching square matrices");
    }
    const std::size_t n = d.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && d(i, j) != 0.0) throw ParameterError("D must be diagonal");

    double d_max = 0.0, d_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        d_max = std::max(d_max, std::abs(d(i, i)));
        d_min = std::min(d_min, std::abs(d(i, i)));
    }
    const auto sa = singular_values(a);
    const auto sda = singular_values(d * a);
    constexpr double slack = 1e-9;
    const double floor = 1e-12 * d_max * (sa.size() ? sa[0] : 0.0);

    DiagPerturbationReport report;
    report.holds.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lower = d_min * sa[k];
        const double upper = d_max * sa[k];
        const bool ok = sda[k] >= lower * (1.0 - slack) - floor && sda[k] <= upper * (1.0 + slack) + floor;
        report.holds[k] = ok;
        report.all = report.all && ok;
    }
    return report;
}

LogPotential log_potential(const MarkovMatrix& m, Complex z) {
    const std::size_t n = m.n();
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<Complex> b(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i * n + j] = Complex(root_n * m(i, j), 0.0);
    for (std::size_t i = 0; i < n; ++i) b[i * n + i] -= z;
    const auto lu = lu_log_det(std::move(b), n);
    LogPotential out;
    if (lu.singular) {
        out.at_atom = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = -lu.log_abs_det / static_cast<double>(n);
    return out;
}

Matrix symmetrize(const Matrix& m) {
    if (!m.square()) throw ParameterError("symmetrize needs a square matrix");
    Matrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

LuDeterminant lu_determinant(const Matrix& a) {
    if (!a.square()) throw ParameterError("determinant of a non-square matrix");
    return lu_log_det(std::vector<double>(a.data().begin(), a.data().end()), a.rows());
}

}  // namespace dme
