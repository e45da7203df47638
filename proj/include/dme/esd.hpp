#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dme/laws.hpp"
#include "dme/spectra.hpp"

namespace dme {

/// Empirical distribution of n reals, weight 1/n each; values kept sorted.
class Esd1D {
public:
    Esd1D() = default;
    /// Sorts; InvariantError on non-finite values.
    explicit Esd1D(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

/// Empirical distribution of n complex points, weight 1/n each.
class Esd2D {
public:
    Esd2D() = default;
    explicit Esd2D(std::vector<Complex> points);
    /// Points scale * lambda_k of a spectrum.
    static Esd2D from_spectrum(const ComplexSpectrum& spectrum, double scale = 1.0);

    std::size_t size() const { return points_.size(); }
    std::span<const Complex> points() const { return points_; }

private:
    std::vector<Complex> points_;
};

/// Bin counts over strictly increasing edges; bin i is [edges[i], edges[i+1]),
/// the last bin is closed.
class Histogram {
public:
    Histogram(std::vector<double> edges, std::vector<std::size_t> counts);

    std::size_t bins() const { return counts_.size(); }
    std::span<const double> edges() const { return edges_; }
    std::span<const std::size_t> counts() const { return counts_; }
    std::size_t total() const;

private:
    std::vector<double> edges_;
    std::vector<std::size_t> counts_;
};

/// sup_x |F_n(x) - F(x)| using both one-sided empirical CDF values at each
/// sample point. ParameterError on an empty sample.
double ks_distance(const Esd1D& esd, const ReferenceLaw& law);
double ks_distance(const Esd1D& esd, const std::function<double(double)>& cdf);

/// sup_x |F_n(x) - G_m(x)|; ties are handled by jumping over equal values together.
double two_sample_ks(const Esd1D& a, const Esd1D& b);

/// (int_0^1 |F^-1(u) - G^-1(u)|^k du)^(1/k). Against a law the integral is a
/// midpoint rule on a 10^4-point u-grid; between two samples it is exact.
double wasserstein(const Esd1D& esd, const ReferenceLaw& law, unsigned k);
double wasserstein(const Esd1D& a, const Esd1D& b, unsigned k);

constexpr std::size_t kWassersteinGrid = 10000;

struct CircleLawStats {
    double radial_ks = 0.0;
    double angular_ks = 0.0;
    double max_modulus = 0.0;  ///< largest modulus after exclusion
    std::size_t excluded = 0;
};

/// Drops the `exclude_top` largest-modulus points, then compares {|z|} with
/// the radial law and {arg z} with the uniform angle of `circle`.
CircleLawStats circle_law_stats(const Esd2D& esd, std::size_t exclude_top,
                                const ReferenceLaw& circle = ReferenceLaw::circle(1.0));

/// (1/n) sum x_i^k; exactly 1 for k = 0.
double moments(const Esd1D& esd, unsigned k);

/// Equal-width bins over [min, max] (widened by 1/2 on each side if all values coincide).
Histogram histogram(const Esd1D& esd, std::size_t bins);
/// Counts over caller-supplied edges, which must cover every value.
Histogram histogram(const Esd1D& esd, std::vector<double> edges);

}  // namespace dme
