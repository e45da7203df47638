#include "dme/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "dme/error.hpp"
#include "dme/sampler.hpp"

namespace dme {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be positive and finite");
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double catalan(unsigned k) {
    double c = 1.0;
    for (unsigned j = 0; j < k; ++j) c *= 2.0 * (2.0 * j + 1.0) / (j + 2.0);
    return c;
}

/// int_0^1 t^k sqrt(1 - t^2) dt = B((k + 1) / 2, 3 / 2) / 2
double half_disc_moment(unsigned k) {
    const double p = (k + 1.0) / 2.0, q = 1.5;
    return 0.5 * std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

double quarter_circle_cdf(double sigma, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 2.0 * sigma) return 1.0;
    const double s2 = sigma * sigma;
    return clamp01(x * std::sqrt(4.0 * s2 - x * x) / (2.0 * kPi * s2) + (2.0 / kPi) * std::asin(x / (2.0 * sigma)));
}

double simpson_step(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // The last test stops refinement once the difference is rounding noise.
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
        std::abs(delta) <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right)) {
        return left + right + delta / 15.0;
    }
    return simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol) {
    auto safe = [&](double t) {
        const double v = g(t);
        return std::isfinite(v) ? v : 0.0;
    };
    // Split into a few panels first so that narrow features are not missed by
    // the initial five-point estimate.
    constexpr int panels = 8;
    const double w = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w, hi = (p + 1 == panels) ? b : a + (p + 1) * w;
        const double flo = safe(lo), fhi = safe(hi), fm = safe(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        total += simpson_step(safe, lo, hi, flo, fm, fhi, whole, tol / panels, 30);
    }
    return total;
}

}  // namespace

ReferenceLaw ReferenceLaw::circle(double sigma) {
    require_positive(sigma, "sigma");
    return {LawKind::Circle, sigma, 0.0};
}
ReferenceLaw ReferenceLaw::semicircle(double sigma) {
    require_positive(sigma, "sigma");
    return {LawKind::SemiCircle, sigma, 0.0};
}
ReferenceLaw ReferenceLaw::quarter_circle(double sigma) {
    require_positive(sigma, "sigma");
    return {LawKind::QuarterCircle, sigma, 0.0};
}
ReferenceLaw ReferenceLaw::marchenko_pastur(double sigma) {
    require_positive(sigma, "sigma");
    return {LawKind::MarchenkoPastur, sigma, 0.0};
}
ReferenceLaw ReferenceLaw::arcsine(double sigma) {
    require_positive(sigma, "sigma");
    return {LawKind::ArcSine, sigma, 0.0};
}
ReferenceLaw ReferenceLaw::exponential() { return {LawKind::Exponential, 1.0, 0.0}; }
ReferenceLaw ReferenceLaw::beta(double alpha, double beta) {
    require_positive(alpha, "alpha");
    require_positive(beta, "beta");
    return {LawKind::Beta, alpha, beta};
}

ReferenceLaw ReferenceLaw::from_name(const std::string& name, double sigma, double alpha, double beta) {
    if (name == "circle" || name == "C") return circle(sigma);
    if (name == "semicircle" || name == "W") return semicircle(sigma);
    if (name == "quarter_circle" || name == "Q") return quarter_circle(sigma);
    if (name == "marchenko_pastur" || name == "P") return marchenko_pastur(sigma);
    if (name == "arcsine") return arcsine(sigma);
    if (name == "exponential") return exponential();
    if (name == "beta") return ReferenceLaw::beta(alpha, beta);
    throw ParameterError("unknown law '" + name + "'");
}

std::string ReferenceLaw::name() const {
    switch (kind_) {
        case LawKind::Circle: return "circle";
        case LawKind::SemiCircle: return "semicircle";
        case LawKind::QuarterCircle: return "quarter_circle";
        case LawKind::MarchenkoPastur: return "marchenko_pastur";
        case LawKind::ArcSine: return "arcsine";
        case LawKind::Exponential: return "exponential";
        case LawKind::Beta: return "beta";
    }
    return "unknown";
}

std::pair<double, double> ReferenceLaw::support() const {
    switch (kind_) {
        case LawKind::Circle: return {0.0, p1_};
        case LawKind::SemiCircle: return {-2.0 * p1_, 2.0 * p1_};
        case LawKind::QuarterCircle: return {0.0, 2.0 * p1_};
        case LawKind::MarchenkoPastur: return {0.0, 4.0 * p1_ * p1_};
        case LawKind::ArcSine: return {-p1_, p1_};
        case LawKind::Exponential: return {0.0, kInf};
        case LawKind::Beta: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

double pdf(const ReferenceLaw& law, double x) {
    const double s = law.sigma();
    switch (law.kind()) {
        case LawKind::Circle: return pdf(law, std::complex<double>(x, 0.0));
        case LawKind::SemiCircle:
            if (std::abs(x) >= 2.0 * s) return 0.0;
            return std::sqrt(4.0 * s * s - x * x) / (2.0 * kPi * s * s);
        case LawKind::QuarterCircle:
            if (x < 0.0 || x >= 2.0 * s) return 0.0;
            return std::sqrt(4.0 * s * s - x * x) / (kPi * s * s);
        case LawKind::MarchenkoPastur:
            if (x <= 0.0 || x >= 4.0 * s * s) return 0.0;
            return std::sqrt(x * (4.0 * s * s - x)) / (2.0 * kPi * s * s * x);
        case LawKind::ArcSine:
            if (std::abs(x) >= s) return 0.0;
            return 1.0 / (kPi * std::sqrt(s * s - x * x));
        case LawKind::Exponential: return x < 0.0 ? 0.0 : std::exp(-x);
        case LawKind::Beta: {
            if (x < 0.0 || x > 1.0) return 0.0;
            const double a = law.alpha(), b = law.beta_param();
            return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) / boost::math::beta(a, b);
        }
    }
    return 0.0;
}

double pdf(const ReferenceLaw& law, std::complex<double> z) {
    if (law.kind() == LawKind::Circle) {
        const double s = law.sigma();
        return std::abs(z) <= s ? 1.0 / (kPi * s * s) : 0.0;
    }
    return z.imag() == 0.0 ? pdf(law, z.real()) : 0.0;
}

double cdf(const ReferenceLaw& law, double x) {
    const double s = law.sigma();
    switch (law.kind()) {
        case LawKind::Circle: throw DomainError("the circle law has no 1D CDF; use radial_cdf / angular_cdf");
        case LawKind::SemiCircle: {
            if (x <= -2.0 * s) return 0.0;
            if (x >= 2.0 * s) return 1.0;
            const double s2 = s * s;
            return clamp01(0.5 + x * std::sqrt(4.0 * s2 - x * x) / (4.0 * kPi * s2) + std::asin(x / (2.0 * s)) / kPi);
        }
        case LawKind::QuarterCircle: return quarter_circle_cdf(s, x);
        case LawKind::MarchenkoPastur: return x <= 0.0 ? 0.0 : quarter_circle_cdf(s, std::sqrt(x));
        case LawKind::ArcSine:
            if (x <= -s) return 0.0;
            if (x >= s) return 1.0;
            return clamp01(0.5 + std::asin(x / s) / kPi);
        case LawKind::Exponential: return x <= 0.0 ? 0.0 : -std::expm1(-x);
        case LawKind::Beta:
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return boost::math::ibeta(law.alpha(), law.beta_param(), x);
    }
    return 0.0;
}

double quantile(const ReferenceLaw& law, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
    if (law.kind() == LawKind::Circle) throw DomainError("the circle law has no 1D quantile");
    if (law.kind() == LawKind::Exponential) return u == 1.0 ? kInf : -std::log1p(-u);
    auto [lo, hi] = law.support();
    if (u == 0.0) return lo;
    if (u == 1.0) return hi;
    // Smallest x with F(x) >= u, to machine resolution.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(law, mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double moment(const ReferenceLaw& law, unsigned k) {
    if (k == 0) return 1.0;
    const double s = law.sigma();
    const double sk = std::pow(s, static_cast<double>(k));
    switch (law.kind()) {
        case LawKind::Circle: return 2.0 * sk / (k + 2.0);
        case LawKind::SemiCircle: return k % 2 ? 0.0 : sk * catalan(k / 2);
        case LawKind::QuarterCircle:
            // int_0^{2s} x^k sqrt(4s^2 - x^2) dx / (pi s^2)
            return std::pow(2.0 * s, k + 2.0) * half_disc_moment(k) / (kPi * s * s);
        case LawKind::MarchenkoPastur: return sk * sk * catalan(k);
        case LawKind::ArcSine: {
            if (k % 2) return 0.0;
            // binom(k, k/2) / 2^k
            double c = 1.0;
            for (unsigned j = 1; j <= k / 2; ++j) c *= (k / 2.0 + j) / j / 4.0;
            return sk * c;
        }
        case LawKind::Exponential: return std::tgamma(k + 1.0);
        case LawKind::Beta: {
            double m = 1.0;
            const double a = law.alpha(), b = law.beta_param();
            for (unsigned r = 0; r < k; ++r) m *= (a + r) / (a + b + r);
            return m;
        }
    }
    return 0.0;
}

double radial_cdf(const ReferenceLaw& circle, double r) {
    if (circle.kind() != LawKind::Circle) throw DomainError("radial_cdf needs a circle law");
    if (r <= 0.0) return 0.0;
    const double s = circle.sigma();
    return std::min(r * r / (s * s), 1.0);
}

double angular_cdf(const ReferenceLaw& circle, double theta) {
    if (circle.kind() != LawKind::Circle) throw DomainError("angular_cdf needs a circle law");
    return clamp01((theta + kPi) / (2.0 * kPi));
}

double law_sample(const ReferenceLaw& law, RngStream& rng) {
    if (law.kind() == LawKind::Circle) throw DomainError("use circle_sample for the circle law");
    if (law.kind() == LawKind::Exponential) return exp_sample(rng);
    return quantile(law, rng.uniform());
}

std::complex<double> circle_sample(const ReferenceLaw& circle, RngStream& rng) {
    if (circle.kind() != LawKind::Circle) throw DomainError("circle_sample needs a circle law");
    const double r = circle.sigma() * std::sqrt(rng.uniform());
    const double theta = 2.0 * kPi * rng.uniform() - kPi;
    return std::polar(r, theta);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    if (std::isinf(b)) {
        auto g = [&](double t) {
            if (t >= 1.0) return 0.0;
            const double one_minus = 1.0 - t;
            return f(a + t / one_minus) / (one_minus * one_minus);
        };
        return adaptive_simpson(g, 0.0, 1.0, tol);
    }
    // (1 - cos t) / 2 = sin^2(t / 2); measuring from the nearer end point keeps
    // full relative precision in the distance to that end.
    const double width = b - a;
    auto g = [&](double t) {
        // Densities are usually defined as 0 exactly at the support ends, which
        // would hide a finite limit of the transformed integrand there.
        t = std::clamp(t, 1e-6, kPi - 1e-6);
        const double x = t <= 0.5 * kPi ? a + width * std::pow(std::sin(0.5 * t), 2)
                                        : b - width * std::pow(std::cos(0.5 * t), 2);
        return f(x) * 0.5 * width * std::sin(t);
    };
    return adaptive_simpson(g, 0.0, kPi, tol);
}

double integrate_density(const ReferenceLaw& law) {
    if (law.kind() == LawKind::Circle) {
        const double s = law.sigma();
        // Radial density of the uniform disc: 2 pi r / (pi s^2).
        return integrate([&](double r) { return 2.0 * kPi * r * pdf(law, std::complex<double>(r, 0.0)); }, 0.0, s);
    }
    const auto [lo, hi] = law.support();
    return integrate([&](double x) { return pdf(law, x); }, lo, hi);
}

}  // namespace dme
