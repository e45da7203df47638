#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dme/spectra.hpp"
#include "householder.hpp"

namespace dme {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_symmetric(const Matrix& s) {
    if (!s.square()) throw ParameterError("symmetric eigenproblem needs a square matrix");
    if (!all_finite(s)) throw ParameterError("matrix has non-finite entries");
    if (asymmetry(s) > 1e-12 * std::max(frobenius_norm(s), std::numeric_limits<double>::min())) {
        throw ParameterError("matrix is not symmetric");
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal (diag, offdiag).
/// offdiag[k] couples k and k + 1; offdiag[n - 1] = 0.
void tridiagonalize(Matrix a, std::vector<double>& diag, std::vector<double>& offdiag) {
    const std::size_t n = a.rows();
    diag.assign(n, 0.0);
    offdiag.assign(n, 0.0);
    std::vector<double> x, ess, v, p;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t len = n - k - 1;
        x.resize(len);
        ess.resize(len - 1);
        for (std::size_t i = 0; i < len; ++i) x[i] = a(k + 1 + i, k);
        double tau = 0.0, beta = 0.0;
        detail::make_householder(x, ess, tau, beta);
        diag[k] = a(k, k);
        offdiag[k] = beta;
        if (tau == 0.0) continue;

        // Trailing block A22 <- H A22 H as a symmetric rank-two update.
        v.resize(len);
        v[0] = 1.0;
        std::copy(ess.begin(), ess.end(), v.begin() + 1);
        p.assign(len, 0.0);
        for (std::size_t i = 0; i < len; ++i) {
            auto row = a.row(k + 1 + i);
            double s = 0.0;
            for (std::size_t j = 0; j < len; ++j) s += row[k + 1 + j] * v[j];
            p[i] = tau * s;
        }
        double pv = 0.0;
        for (std::size_t i = 0; i < len; ++i) pv += p[i] * v[i];
        const double alpha = -0.5 * tau * pv;
        for (std::size_t i = 0; i < len; ++i) p[i] += alpha * v[i];
        for (std::size_t i = 0; i < len; ++i) {
            auto row = a.row(k + 1 + i);
            for (std::size_t j = 0; j < len; ++j) row[k + 1 + j] -= v[i] * p[j] + p[i] * v[j];
        }
    }
    if (n >= 2) {
        diag[n - 2] = a(n - 2, n - 2);
        offdiag[n - 2] = a(n - 1, n - 2);
    }
    if (n >= 1) diag[n - 1] = a(n - 1, n - 1);
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix; eigenvalues land in `d`.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = d.size();
    constexpr int max_iterations = 30;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m == l) break;
            if (iter++ == max_iterations) throw NumericalError("tridiagonal QL did not converge");

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Matrix& s) {
    require_symmetric(s);
    std::vector<double> d, e;
    tridiagonalize(s, d, e);
    tridiagonal_ql(d, e);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

std::vector<double> jacobi_symmetric_eig(const Matrix& s) {
    require_symmetric(s);
    const std::size_t n = s.rows();
    Matrix a = s;
    const double norm = frobenius_norm(s);
    const double target = 1e-13 * norm;
    auto off_norm = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) acc += a(i, j) * a(i, j);
        return std::sqrt(acc);
    };

    constexpr int max_sweeps = 100;
    int sweep = 0;
    while (off_norm() > target) {
        if (++sweep > max_sweeps) throw NumericalError("Jacobi eigenvalue iteration did not converge");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = a(k, p), y = a(k, q);
                    a(k, p) = c * x - sn * y;
                    a(k, q) = sn * x + c * y;
                }
                auto rp = a.row(p);
                auto rq = a.row(q);
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = rp[k], y = rq[k];
                    rp[k] = c * x - sn * y;
                    rq[k] = sn * x + c * y;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a(i, i);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

SingularSpectrum singular_values(const Matrix& a) {
    if (!a.square()) throw ParameterError("singular values of a non-square matrix");
    if (!all_finite(a)) throw ParameterError("matrix has non-finite entries");
    const std::size_t n = a.rows();
    if (n == 0) return SingularSpectrum();
    auto lambda = symmetric_eigenvalues(gram(a));
    // Eigenvalues of A A^T at the rounding level of the largest one carry no
    // information; they are reported as exact zeros.
    const double floor = static_cast<double>(n) * kEps * std::max(lambda.front(), 0.0);
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = lambda[k] > floor ? std::sqrt(lambda[k]) : 0.0;
    return SingularSpectrum(std::move(s));
}

SingularSpectrum::SingularSpectrum(std::vector<double> values) : values_(std::move(values)) {
    for (double x : values_) {
        if (!(x >= 0.0)) throw InvariantError("singular values must be non-negative");
    }
    std::sort(values_.begin(), values_.end(), std::greater<>());
}

std::size_t SingularSpectrum::rank() const {
    if (values_.empty()) return 0;
    return rank(values_.front() * static_cast<double>(values_.size()) * 1e-14);
}

std::size_t SingularSpectrum::rank(double tolerance) const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [&](double s) { return s > tolerance; }));
}

}  // namespace dme
