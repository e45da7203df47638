#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>

#include "dme/error.hpp"
#include "dme/rng.hpp"

namespace dme {

enum class LawKind { Circle, SemiCircle, QuarterCircle, MarchenkoPastur, ArcSine, Exponential, Beta };

/// A closed-form reference distribution.
///
///  Circle(s)          uniform on the disc |z| <= s
///  SemiCircle(s)      density sqrt(4s^2 - x^2) / (2 pi s^2) on [-2s, 2s]
///  QuarterCircle(s)   density sqrt(4s^2 - x^2) / (pi s^2) on [0, 2s]
///  MarchenkoPastur(s) density sqrt(x (4s^2 - x)) / (2 pi s^2 x) on [0, 4s^2]
///  ArcSine(s)         density 1 / (pi sqrt(s^2 - x^2)) on [-s, s]
///  Exponential        rate 1 on [0, inf)
///  Beta(a, b)         on [0, 1]
class ReferenceLaw {
public:
    static ReferenceLaw circle(double sigma);
    static ReferenceLaw semicircle(double sigma);
    static ReferenceLaw quarter_circle(double sigma);
    static ReferenceLaw marchenko_pastur(double sigma);
    static ReferenceLaw arcsine(double sigma);
    static ReferenceLaw exponential();
    static ReferenceLaw beta(double alpha, double beta);

    /// Accepts the long names ("quarter_circle", ...) and the one-letter
    /// symbols C, W, Q, P. `sigma` is ignored by Exponential and Beta.
    static ReferenceLaw from_name(const std::string& name, double sigma = 1.0, double alpha = 1.0,
                                  double beta = 1.0);

    LawKind kind() const { return kind_; }
    double sigma() const { return p1_; }
    double alpha() const { return p1_; }
    double beta_param() const { return p2_; }

    std::string name() const;
    /// Support interval of a 1D law; the upper end is +inf for Exponential.
    /// For Circle this is the radial range [0, sigma].
    std::pair<double, double> support() const;
    bool is_complex() const { return kind_ == LawKind::Circle; }

private:
    ReferenceLaw(LawKind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

    LawKind kind_;
    double p1_;
    double p2_;
};

/// Density; 0 outside the support. For Circle the argument is the point z.
double pdf(const ReferenceLaw& law, double x);
double pdf(const ReferenceLaw& law, std::complex<double> z);

/// Distribution function, clamped to [0, 1]. DomainError for Circle.
double cdf(const ReferenceLaw& law, double x);

/// Generalised inverse of cdf by bisection (closed form for Exponential).
/// ParameterError for u outside [0, 1]; DomainError for Circle.
double quantile(const ReferenceLaw& law, double u);

/// E[X^k]. For Circle this is E|Z|^k.
double moment(const ReferenceLaw& law, unsigned k);

/// P(|Z| <= r) = min(r^2 / sigma^2, 1) for Circle(sigma).
double radial_cdf(const ReferenceLaw& circle, double r);
/// P(arg Z <= theta) = (theta + pi) / (2 pi) on [-pi, pi].
double angular_cdf(const ReferenceLaw& circle, double theta);

/// Exact draw of a 1D law through the quantile transform (inverse CDF for
/// Exponential). DomainError for Circle.
double law_sample(const ReferenceLaw& law, RngStream& rng);
/// Uniform draw on the disc: radius sigma sqrt(U), uniform angle.
std::complex<double> circle_sample(const ReferenceLaw& circle, RngStream& rng);

/// Total mass of the density by adaptive quadrature (radial density for Circle).
double integrate_density(const ReferenceLaw& law);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`. After the change of
/// variables x = a + (b - a)(1 - cos t) / 2 the Jacobian vanishes at both ends,
/// which removes inverse-square-root endpoint singularities; `b` may be +inf,
/// in which case x = a + s / (1 - s) is used instead. The integrand is treated
/// as 0 wherever it is not finite at an end point.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

}  // namespace dme
