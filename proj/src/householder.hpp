#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dme/matrix.hpp"

namespace dme::detail {

/// Reflector H = I - tau w w^T with w = (1, ess) such that H x = (beta, 0, ..., 0).
/// `ess` must have x.size() - 1 slots. tau = 0 means H = I and beta = x[0].
inline void make_householder(std::span<const double> x, std::span<double> ess, double& tau,
                             double& beta) {
    double tail = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) tail += x[i] * x[i];
    const double c0 = x[0];
    if (tail <= 0.0) {
        tau = 0.0;
        beta = c0;
        for (double& e : ess) e = 0.0;
        return;
    }
    beta = std::sqrt(c0 * c0 + tail);
    if (c0 >= 0.0) beta = -beta;
    const double denom = c0 - beta;
    for (std::size_t i = 1; i < x.size(); ++i) ess[i - 1] = x[i] / denom;
    tau = (beta - c0) / beta;
}

/// Rows [r0, r0 + ess.size()] and columns [c0, c1) of `a` <- H * block.
inline void apply_left(Matrix& a, std::size_t r0, std::size_t c0, std::size_t c1,
                       std::span<const double> ess, double tau, std::vector<double>& work) {
    if (tau == 0.0 || c1 <= c0) return;
    const std::size_t width = c1 - c0;
    work.assign(width, 0.0);
    auto top = a.row(r0);
    for (std::size_t j = 0; j < width; ++j) work[j] = top[c0 + j];
    for (std::size_t i = 0; i < ess.size(); ++i) {
        const double e = ess[i];
        auto r = a.row(r0 + 1 + i);
        for (std::size_t j = 0; j < width; ++j) work[j] += e * r[c0 + j];
    }
    for (std::size_t j = 0; j < width; ++j) top[c0 + j] -= tau * work[j];
    for (std::size_t i = 0; i < ess.size(); ++i) {
        const double f = tau * ess[i];
        auto r = a.row(r0 + 1 + i);
        for (std::size_t j = 0; j < width; ++j) r[c0 + j] -= f * work[j];
    }
}

/// Rows [r0, r1) and columns [c0, c0 + ess.size()] of `a` <- block * H.
inline void apply_right(Matrix& a, std::size_t c0, std::size_t r0, std::size_t r1,
                        std::span<const double> ess, double tau) {
    if (tau == 0.0) return;
    for (std::size_t i = r0; i < r1; ++i) {
        auto r = a.row(i);
        double s = r[c0];
        for (std::size_t k = 0; k < ess.size(); ++k) s += ess[k] * r[c0 + 1 + k];
        s *= tau;
        r[c0] -= s;
        for (std::size_t k = 0; k < ess.size(); ++k) r[c0 + 1 + k] -= s * ess[k];
    }
}

}  // namespace dme::detail
