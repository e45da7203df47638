#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dme/spectra.hpp"
#include "householder.hpp"

namespace dme {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// With `full` set the whole matrix is transformed so that it ends in real
/// Schur form (and `u`, when given, accumulates the transformations); without
/// it only the active window is updated, which is enough for eigenvalues.
class FrancisQr {
public:
    FrancisQr(Matrix& h, Matrix* u, bool full) : t_(h), u_(u), full_(full), n_(h.rows()) {}

    std::vector<Complex> run(int& iterations) {
        std::vector<Complex> eig(n_);
        iterations = 0;
        if (n_ == 0) return eig;

        double norm = 0.0;
        for (std::size_t j = 0; j < n_; ++j)
            for (std::size_t i = 0; i <= std::min(j + 1, n_ - 1); ++i) norm += std::abs(t_(i, j));
        if (norm == 0.0) return eig;

        const int max_iterations = 30 * static_cast<int>(n_);
        long iu = static_cast<long>(n_) - 1;
        int iter = 0;
        double exshift = 0.0;
        while (iu >= 0) {
            const long il = find_small_subdiagonal(iu, norm);
            if (il == iu) {
                t_(iu, iu) += exshift;
                eig[iu] = Complex(t_(iu, iu), 0.0);
                if (iu > 0) t_(iu, iu - 1) = 0.0;
                --iu;
                iter = 0;
            } else if (il == iu - 1) {
                split_off_two_rows(iu, il, exshift, eig);
                iu -= 2;
                iter = 0;
            } else {
                std::array<double, 3> shift = compute_shift(iu, iter, exshift);
                ++iter;
                ++iterations;
                if (iterations > max_iterations) {
                    std::vector<Complex> partial(eig.begin() + iu + 1, eig.end());
                    throw EigenConvergenceError("Francis QR did not converge within " +
                                                    std::to_string(max_iterations) + " iterations",
                                                std::move(partial));
                }
                std::array<double, 3> v{};
                const long im = init_step(il, iu, shift, v);
                perform_step(il, im, iu, v);
            }
        }
        return eig;
    }

private:
    long find_small_subdiagonal(long iu, double norm) const {
        long res = iu;
        while (res > 0) {
            double s = std::abs(t_(res - 1, res - 1)) + std::abs(t_(res, res));
            if (s == 0.0) s = norm;
            if (std::abs(t_(res, res - 1)) <= kEps * s) break;
            --res;
        }
        if (res > 0) t_(res, res - 1) = 0.0;
        return res;
    }

    void shift_diagonal(long iu, double s) {
        for (long i = 0; i <= iu; ++i) t_(i, i) -= s;
    }

    std::array<double, 3> compute_shift(long iu, int iter, double& exshift) {
        std::array<double, 3> info = {t_(iu, iu), t_(iu - 1, iu - 1), t_(iu, iu - 1) * t_(iu - 1, iu)};
        if (iter == 0 || iter % 10 != 0) return info;
        if ((iter / 10) % 2 == 1) {
            // Wilkinson-style exceptional shift.
            exshift += info[0];
            shift_diagonal(iu, info[0]);
            const double s = std::abs(t_(iu, iu - 1)) + std::abs(t_(iu - 1, iu - 2));
            info = {0.75 * s, 0.75 * s, -0.4375 * s * s};
        } else {
            double s = 0.5 * (info[1] - info[0]);
            s = s * s + info[2];
            if (s > 0.0) {
                s = std::sqrt(s);
                if (info[1] < info[0]) s = -s;
                s += 0.5 * (info[1] - info[0]);
                s = info[0] - info[2] / s;
                exshift += s;
                shift_diagonal(iu, s);
                info = {0.964, 0.964, 0.964};
            }
        }
        return info;
    }

    long init_step(long il, long iu, const std::array<double, 3>& shift, std::array<double, 3>& v) const {
        long im = iu - 2;
        for (; im >= il; --im) {
            const double tmm = t_(im, im);
            const double r = shift[0] - tmm;
            const double s = shift[1] - tmm;
            v[0] = (r * s - shift[2]) / t_(im + 1, im) + t_(im, im + 1);
            v[1] = t_(im + 1, im + 1) - tmm - r - s;
            v[2] = t_(im + 2, im + 1);
            if (im == il) break;
            const double lhs = t_(im, im - 1) * (std::abs(v[1]) + std::abs(v[2]));
            const double rhs =
                std::abs(v[0]) * (std::abs(t_(im - 1, im - 1)) + std::abs(tmm) + std::abs(t_(im + 1, im + 1)));
            if (std::abs(lhs) < kEps * rhs) break;
        }
        return im;
    }

    std::size_t col_end(long iu) const { return full_ ? n_ : static_cast<std::size_t>(iu) + 1; }
    std::size_t row_begin(long il) const { return full_ ? 0 : static_cast<std::size_t>(il); }

    void perform_step(long il, long im, long iu, const std::array<double, 3>& first) {
        std::array<double, 2> ess{};
        double tau = 0.0, beta = 0.0;
        for (long k = im; k <= iu - 2; ++k) {
            const bool first_iteration = (k == im);
            std::array<double, 3> v = first_iteration
                                          ? first
                                          : std::array<double, 3>{t_(k, k - 1), t_(k + 1, k - 1), t_(k + 2, k - 1)};
            detail::make_householder(v, ess, tau, beta);
            if (beta == 0.0) continue;
            if (first_iteration && k > il) {
                t_(k, k - 1) *= (1.0 - tau);
            } else if (!first_iteration) {
                t_(k, k - 1) = beta;
                t_(k + 1, k - 1) = 0.0;
                t_(k + 2, k - 1) = 0.0;
            }
            detail::apply_left(t_, k, k, col_end(iu), ess, tau, work_);
            const std::size_t last_row = static_cast<std::size_t>(std::min(iu, k + 3)) + 1;
            detail::apply_right(t_, k, row_begin(il), last_row, ess, tau);
            if (u_) detail::apply_right(*u_, k, 0, n_, ess, tau);
        }
        std::array<double, 2> v2 = {t_(iu - 1, iu - 2), t_(iu, iu - 2)};
        std::array<double, 1> ess2{};
        detail::make_householder(v2, ess2, tau, beta);
        if (beta != 0.0) {
            t_(iu - 1, iu - 2) = beta;
            t_(iu, iu - 2) = 0.0;
            detail::apply_left(t_, iu - 1, iu - 1, col_end(iu), ess2, tau, work_);
            detail::apply_right(t_, iu - 1, row_begin(il), static_cast<std::size_t>(iu) + 1, ess2, tau);
            if (u_) detail::apply_right(*u_, iu - 1, 0, n_, ess2, tau);
        }
        for (long i = im + 2; i <= iu; ++i) {
            t_(i, i - 2) = 0.0;
            if (i > im + 2) t_(i, i - 3) = 0.0;
        }
    }

    void split_off_two_rows(long iu, long il, double exshift, std::vector<Complex>& eig) {
        const double p = 0.5 * (t_(iu - 1, iu - 1) - t_(iu, iu));
        const double q = p * p + t_(iu, iu - 1) * t_(iu - 1, iu);
        t_(iu, iu) += exshift;
        t_(iu - 1, iu - 1) += exshift;
        const double x = t_(iu, iu);
        if (q >= 0.0) {
            const double z = std::sqrt(q);
            const double v0 = p + (p >= 0.0 ? z : -z);
            const double v1 = t_(iu, iu - 1);
            const double r = std::hypot(v0, v1);
            if (full_ && r != 0.0) {
                // Rotate the real eigenvector (v0, v1) onto e_1 to triangularise the block.
                const double cs = v0 / r;
                const double sn = v1 / r;
                for (std::size_t j = static_cast<std::size_t>(iu - 1); j < n_; ++j) {
                    const double a = t_(iu - 1, j), b = t_(iu, j);
                    t_(iu - 1, j) = cs * a + sn * b;
                    t_(iu, j) = -sn * a + cs * b;
                }
                for (std::size_t i = 0; i <= static_cast<std::size_t>(iu); ++i) {
                    const double a = t_(i, iu - 1), b = t_(i, iu);
                    t_(i, iu - 1) = cs * a + sn * b;
                    t_(i, iu) = -sn * a + cs * b;
                }
                if (u_) {
                    for (std::size_t i = 0; i < n_; ++i) {
                        const double a = (*u_)(i, iu - 1), b = (*u_)(i, iu);
                        (*u_)(i, iu - 1) = cs * a + sn * b;
                        (*u_)(i, iu) = -sn * a + cs * b;
                    }
                }
                t_(iu, iu - 1) = 0.0;
                eig[iu - 1] = Complex(t_(iu - 1, iu - 1), 0.0);
                eig[iu] = Complex(t_(iu, iu), 0.0);
            } else {
                eig[iu - 1] = Complex(x + p + z, 0.0);
                eig[iu] = Complex(x + p - z, 0.0);
            }
        } else {
            const double z = std::sqrt(-q);
            eig[iu - 1] = Complex(x + p, z);
            eig[iu] = Complex(x + p, -z);
        }
        (void)il;
        if (iu > 1) t_(iu - 1, iu - 2) = 0.0;
    }

    Matrix& t_;
    Matrix* u_;
    bool full_;
    std::size_t n_;
    std::vector<double> work_;
};

void require_square_finite(const Matrix& a) {
    if (!a.square()) throw ParameterError("eigenvalues of a non-square matrix");
    if (!all_finite(a)) throw ParameterError("matrix has non-finite entries");
}

}  // namespace

ComplexSpectrum::ComplexSpectrum(std::vector<Complex> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end(), precedes);
}

bool ComplexSpectrum::precedes(const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

std::vector<double> balance(Matrix& a) {
    constexpr double radix = 2.0;
    constexpr double radix_sq = radix * radix;
    const std::size_t n = a.rows();
    std::vector<double> scale(n, 1.0);
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix_sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix_sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                scale[i] *= f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
    return scale;
}

Matrix hessenberg(const Matrix& a, Matrix* q) {
    if (!a.square()) throw ParameterError("Hessenberg reduction of a non-square matrix");
    const std::size_t n = a.rows();
    Matrix h = a;
    if (q) *q = Matrix::identity(n);
    std::vector<double> x, ess, work;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t len = n - k - 1;
        x.resize(len);
        ess.resize(len - 1);
        for (std::size_t i = 0; i < len; ++i) x[i] = h(k + 1 + i, k);
        double tau = 0.0, beta = 0.0;
        detail::make_householder(x, ess, tau, beta);
        h(k + 1, k) = beta;
        for (std::size_t i = 1; i < len; ++i) h(k + 1 + i, k) = 0.0;
        if (tau == 0.0) continue;
        detail::apply_left(h, k + 1, k + 1, n, ess, tau, work);
        detail::apply_right(h, k + 1, 0, n, ess, tau);
        if (q) detail::apply_right(*q, k + 1, 0, n, ess, tau);
    }
    return h;
}

SchurResult real_schur(const Matrix& a) {
    require_square_finite(a);
    const std::size_t n = a.rows();
    SchurResult out;
    out.t = hessenberg(a, &out.q);
    FrancisQr qr(out.t, &out.q, true);
    qr.run(out.iterations);

    const Matrix rebuilt = out.q * out.t * out.q.transpose();
    const double norm = frobenius_norm(a);
    out.residual = norm == 0.0 ? frobenius_norm(rebuilt) : frobenius_norm(a - rebuilt) / norm;
    (void)n;
    return out;
}

EigenResult eigen_solve(const Matrix& a) {
    require_square_finite(a);
    Matrix b = a;
    balance(b);
    Matrix h = hessenberg(b);
    FrancisQr qr(h, nullptr, false);
    EigenResult out;
    auto values = qr.run(out.iterations);
    out.spectrum = ComplexSpectrum(std::move(values));
    return out;
}

ComplexSpectrum eigenvalues(const Matrix& a) { return eigen_solve(a).spectrum; }

std::vector<Complex> quasi_triangular_eigenvalues(const Matrix& t) {
    const std::size_t n = t.rows();
    std::vector<Complex> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n;) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
            const double p = 0.5 * (a - d);
            const double disc = p * p + b * c;
            if (disc >= 0.0) {
                const double z = std::sqrt(disc);
                out.emplace_back(d + p + z, 0.0);
                out.emplace_back(d + p - z, 0.0);
            } else {
                const double z = std::sqrt(-disc);
                out.emplace_back(d + p, z);
                out.emplace_back(d + p, -z);
            }
            i += 2;
        } else {
            out.emplace_back(t(i, i), 0.0);
            i += 1;
        }
    }
    return out;
}

double spectral_radius(const Matrix& a) {
    const auto spec = eigenvalues(a);
    return spec.size() == 0 ? 0.0 : std::abs(spec[0]);
}

Complex subdominant(const Matrix& a) {
    if (a.rows() < 2) throw DomainError("sub-dominant eigenvalue needs n >= 2");
    return eigenvalues(a)[1];
}

bool conjugate_closed(std::span<const Complex> values, double tolerance) {
    std::vector<Complex> upper, lower;
    for (const Complex& z : values) {
        if (z.imag() > tolerance) upper.push_back(z);
        else if (z.imag() < -tolerance) lower.push_back(std::conj(z));
    }
    if (upper.size() != lower.size()) return false;
    auto order = [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(upper.begin(), upper.end(), order);
    std::sort(lower.begin(), lower.end(), order);
    for (std::size_t k = 0; k < upper.size(); ++k) {
        if (std::abs(upper[k] - lower[k]) > tolerance * std::max(1.0, std::abs(upper[k]))) return false;
    }
    return true;
}

}  // namespace dme
