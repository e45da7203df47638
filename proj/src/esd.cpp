#include "dme/esd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dme/error.hpp"
#include "dme/summation.hpp"

namespace dme {

namespace {

double ipow(double x, unsigned k) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r *= x;
    return r;
}

double kth_root(double x, unsigned k) {
    if (k == 1) return x;
    if (k == 2) return std::sqrt(x);
    return std::pow(x, 1.0 / k);
}

void require_nonempty(const Esd1D& e) {
    if (e.empty()) throw ParameterError("empirical distribution is empty");
}

}  // namespace

Esd1D::Esd1D(std::vector<double> values) : values_(std::move(values)) {
    for (double x : values_) {
        if (!std::isfinite(x)) throw InvariantError("empirical distribution has a non-finite value");
    }
    std::sort(values_.begin(), values_.end());
}

Esd2D::Esd2D(std::vector<Complex> points) : points_(std::move(points)) {
    for (const auto& z : points_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw InvariantError("empirical distribution has a non-finite point");
        }
    }
}

Esd2D Esd2D::from_spectrum(const ComplexSpectrum& spectrum, double scale) {
    std::vector<Complex> pts(spectrum.values().begin(), spectrum.values().end());
    for (auto& z : pts) z *= scale;
    return Esd2D(std::move(pts));
}

Histogram::Histogram(std::vector<double> edges, std::vector<std::size_t> counts)
    : edges_(std::move(edges)), counts_(std::move(counts)) {
    if (edges_.size() < 2 || counts_.size() + 1 != edges_.size()) {
        throw InvariantError("histogram needs k + 1 edges for k >= 1 bins");
    }
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (!(edges_[i] > edges_[i - 1])) throw InvariantError("histogram edges must be strictly increasing");
    }
}

std::size_t Histogram::total() const {
    std::size_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

double ks_distance(const Esd1D& esd, const ReferenceLaw& law) {
    return ks_distance(esd, [&](double x) { return cdf(law, x); });
}

double ks_distance(const Esd1D& esd, const std::function<double(double)>& cdf_fn) {
    require_nonempty(esd);
    const double n = static_cast<double>(esd.size());
    double d = 0.0;
    for (std::size_t i = 0; i < esd.size(); ++i) {
        const double f = cdf_fn(esd[i]);
        d = std::max({d, (i + 1.0) / n - f, f - i / n});
    }
    return std::min(d, 1.0);
}

double two_sample_ks(const Esd1D& a, const Esd1D& b) {
    require_nonempty(a);
    require_nonempty(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double wasserstein(const Esd1D& esd, const ReferenceLaw& law, unsigned k) {
    require_nonempty(esd);
    if (k == 0) throw ParameterError("Wasserstein order must be >= 1");
    const std::size_t n = esd.size();
    CompensatedSum acc;
    for (std::size_t g = 0; g < kWassersteinGrid; ++g) {
        const double u = (g + 0.5) / static_cast<double>(kWassersteinGrid);
        // Empirical quantile: smallest x_(i) with i / n >= u.
        const auto idx = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n))) - 1;
        acc += ipow(std::abs(esd[std::min(idx, n - 1)] - quantile(law, u)), k);
    }
    return kth_root(acc.value() / static_cast<double>(kWassersteinGrid), k);
}

double wasserstein(const Esd1D& a, const Esd1D& b, unsigned k) {
    require_nonempty(a);
    require_nonempty(b);
    if (k == 0) throw ParameterError("Wasserstein order must be >= 1");
    // Both quantile functions are step functions with jumps at i/n and j/m;
    // integrate exactly over the merged partition, using integer cross
    // products to locate the breakpoints.
    const std::size_t n = a.size(), m = b.size();
    const double nm = static_cast<double>(n) * static_cast<double>(m);
    std::size_t i = 0, j = 0, pos = 0;  // pos = current u times n m
    CompensatedSum acc;
    while (i < n && j < m) {
        const std::size_t next_a = (i + 1) * m, next_b = (j + 1) * n;
        const std::size_t next = std::min(next_a, next_b);
        acc += static_cast<double>(next - pos) / nm * ipow(std::abs(a[i] - b[j]), k);
        pos = next;
        if (next_a == next) ++i;
        if (next_b == next) ++j;
    }
    return kth_root(acc.value(), k);
}

CircleLawStats circle_law_stats(const Esd2D& esd, std::size_t exclude_top, const ReferenceLaw& circle) {
    if (exclude_top >= esd.size()) throw ParameterError("exclude_top must be smaller than the sample size");
    std::vector<Complex> pts(esd.points().begin(), esd.points().end());
    std::stable_sort(pts.begin(), pts.end(), ComplexSpectrum::precedes);
    pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(exclude_top));

    std::vector<double> radii(pts.size()), angles(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        radii[i] = std::abs(pts[i]);
        angles[i] = std::arg(pts[i]);
    }
    CircleLawStats out;
    out.excluded = exclude_top;
    out.max_modulus = *std::max_element(radii.begin(), radii.end());
    out.radial_ks = ks_distance(Esd1D(std::move(radii)), [&](double r) { return radial_cdf(circle, r); });
    out.angular_ks = ks_distance(Esd1D(std::move(angles)), [&](double t) { return angular_cdf(circle, t); });
    return out;
}

double moments(const Esd1D& esd, unsigned k) {
    if (k == 0) return 1.0;
    require_nonempty(esd);
    CompensatedSum acc;
    for (double x : esd.values()) acc += ipow(x, k);
    return acc.value() / static_cast<double>(esd.size());
}

Histogram histogram(const Esd1D& esd, std::size_t bins) {
    require_nonempty(esd);
    if (bins == 0) throw ParameterError("histogram needs at least one bin");
    double lo = esd[0], hi = esd[esd.size() - 1];
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    edges[bins] = hi;
    return histogram(esd, std::move(edges));
}

Histogram histogram(const Esd1D& esd, std::vector<double> edges) {
    if (edges.size() < 2) throw ParameterError("histogram needs at least one bin");
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (double x : esd.values()) {
        if (x < edges.front() || x > edges.back()) throw ParameterError("value outside the histogram edges");
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t bin = static_cast<std::size_t>(it - edges.begin());
        bin = bin == 0 ? 0 : bin - 1;
        counts[std::min(bin, counts.size() - 1)]++;
    }
    return Histogram(std::move(edges), std::move(counts));
}

}  // namespace dme
