#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dme/error.hpp"
#include "dme/matrix.hpp"
#include "dme/sampler.hpp"

namespace dme {

using Complex = std::complex<double>;

/// Eigenvalues sorted by non-increasing modulus; ties broken by descending
/// real part, then descending imaginary part, so that lambda_2 is well defined
/// and the positive-imaginary member of a conjugate pair comes first.
class ComplexSpectrum {
public:
    ComplexSpectrum() = default;
    explicit ComplexSpectrum(std::vector<Complex> values);

    std::size_t size() const { return values_.size(); }
    const Complex& operator[](std::size_t k) const { return values_[k]; }
    std::span<const Complex> values() const { return values_; }

    /// Strict weak order used for sorting.
    static bool precedes(const Complex& a, const Complex& b);

private:
    std::vector<Complex> values_;
};

/// Singular values s_1 >= ... >= s_n >= 0.
class SingularSpectrum {
public:
    SingularSpectrum() = default;
    explicit SingularSpectrum(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const { return values_; }

    /// Count of values above `tolerance`; default s_1 n 1e-14.
    std::size_t rank() const;
    std::size_t rank(double tolerance) const;

private:
    std::vector<double> values_;
};

/// Real Schur form A = Q T Q^T.
struct SchurResult {
    Matrix t;
    Matrix q;
    double residual = 0.0;  ///< ||A - Q T Q^T||_F / ||A||_F
    int iterations = 0;
};

struct EigenResult {
    ComplexSpectrum spectrum;
    int iterations = 0;
};

/// QR iteration hit its cap; carries the eigenvalues deflated before failing.
class EigenConvergenceError : public NumericalError {
public:
    EigenConvergenceError(const std::string& what, std::vector<Complex> partial)
        : NumericalError(what), partial_(std::move(partial)) {}
    const std::vector<Complex>& partial_spectrum() const { return partial_; }

private:
    std::vector<Complex> partial_;
};

/// Diagonal similarity by powers of two that equalises row and column norms.
/// Returns the scaling d with the balanced matrix D^-1 A D written into `a`.
std::vector<double> balance(Matrix& a);

/// Householder reduction to upper Hessenberg form. When `q` is non-null it
/// receives the orthogonal factor with A = Q H Q^T.
Matrix hessenberg(const Matrix& a, Matrix* q = nullptr);

/// Real Schur decomposition of an unbalanced matrix (Hessenberg reduction
/// followed by Francis double-shift QR), with the orthogonal factor.
SchurResult real_schur(const Matrix& a);

/// Eigenvalues through balance, Hessenberg reduction and Francis double-shift QR.
EigenResult eigen_solve(const Matrix& a);
ComplexSpectrum eigenvalues(const Matrix& a);

/// Eigenvalues of a 1x1 / 2x2 diagonal-block quasi-triangular matrix.
std::vector<Complex> quasi_triangular_eigenvalues(const Matrix& t);

/// Eigenvalues of a symmetric matrix, descending. Householder
/// tridiagonalisation followed by implicit QL with Wilkinson shifts.
std::vector<double> symmetric_eigenvalues(const Matrix& s);

/// Singular values as square roots of the eigenvalues of A A^T.
SingularSpectrum singular_values(const Matrix& a);

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending. Independent
/// cross-check for singular_values; intended for n <= 200.
std::vector<double> jacobi_symmetric_eig(const Matrix& s);

double spectral_radius(const Matrix& a);
/// lambda_2 under the ComplexSpectrum order; DomainError when n = 1.
Complex subdominant(const Matrix& a);

/// Stationary distribution of a strictly positive Markov matrix, by power
/// iteration on M^T from the uniform vector until ||M^T p - p||_1 <= 1e-12.
SimplexVector perron_vector(const MarkovMatrix& m);

/// Log-domain Weyl-Horn margins sum_{i<=k} log s_i - sum_{i<=k} log|lambda_i|
/// for k = 1..n; exact zeros are skipped on either side.
std::vector<double> weyl_horn_check(const Matrix& a);
std::vector<double> weyl_horn_margins(const ComplexSpectrum& eig, const SingularSpectrum& sv);

struct DiagPerturbationReport {
    std::vector<bool> holds;  ///< per k: s_n(D) s_k(A) <= s_k(DA) <= s_1(D) s_k(A)
    bool all = true;
};

DiagPerturbationReport diag_perturbation_bounds(const Matrix& d, const Matrix& a);

struct LogPotential {
    double value = 0.0;    ///< -(1/n) log|det(sqrt(n) M - z I)|, +inf at an atom
    bool at_atom = false;  ///< a pivot vanished: z is (numerically) an eigenvalue
};

LogPotential log_potential(const MarkovMatrix& m, Complex z);

/// (M + M^T) / 2
Matrix symmetrize(const Matrix& m);

struct LuDeterminant {
    double log_abs_det = 0.0;
    int sign = 1;
    bool singular = false;
};

/// log|det A| from LU with partial pivoting.
LuDeterminant lu_determinant(const Matrix& a);

/// True when non-real values pair off with their conjugates within `tolerance`.
bool conjugate_closed(std::span<const Complex> values, double tolerance = 1e-9);

}  // namespace dme
