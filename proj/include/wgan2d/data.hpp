#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "wgan2d/rng.hpp"
#include "wgan2d/tensor.hpp"

namespace wgan2d {

/// An ordered set of n points in the plane; the unit every sampler, training
/// step and distance computation works in. Shape is always [n, 2] with n >= 1
/// and finite entries.
struct Batch2D {
    Tensor points;

    explicit Batch2D(Tensor t)
        : points(std::move(t))
    {
        if (points.rank() != 2 || points.cols() != 2 || points.rows() < 1)
            throw ShapeError("Batch2D: expected [n,2] with n >= 1, got "
                             + shape_str(points.shape()));
        points.require_finite("Batch2D");
    }

    std::size_t size() const { return points.rows(); }
    double x(std::size_t i) const { return points.at(i, 0); }
    double y(std::size_t i) const { return points.at(i, 1); }
};

/// Constants of the three toy generators. The defaults reproduce the common
/// reference generators for these distributions; every value can be
/// overridden when constructing a sampler.
struct ToyDataConfig {
    double gauss8_radius = 2.0;
    double gauss8_sigma = 0.02;
    double gauss8_scale = 1.0 / std::numbers::sqrt2;

    double gauss25_spacing = 2.0; // grid {-2..2} scaled to centers {-4..4}
    double gauss25_sigma = 0.05;
    double gauss25_scale = 1.0 / (2.0 * std::numbers::sqrt2);

    double swiss_noise_sigma = 0.25;
    double swiss_scale = 1.0 / 7.5;
};

namespace detail {
    inline void require_count(std::size_t n, const char* sampler)
    {
        if (n == 0)
            throw Error(std::string(sampler) + ": sample count must be >= 1");
    }
}

/// Mixture of 8 Gaussians with centers equally spaced on a circle, the whole
/// sample scaled down by 1/sqrt(2). Per point: one center draw, then a noise
/// pair.
inline Batch2D sample_8gaussians(Rng& rng, std::size_t n, const ToyDataConfig& cfg = {})
{
    detail::require_count(n, "sample_8gaussians");
    std::array<std::array<double, 2>, 8> centers{};
    for (std::size_t k = 0; k < 8; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / 8.0;
        centers[k] = {cfg.gauss8_radius * std::cos(a), cfg.gauss8_radius * std::sin(a)};
    }
    Tensor pts({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers[rng.uniform_index(8)];
        pts.at(i, 0) = (c[0] + cfg.gauss8_sigma * rng.normal()) * cfg.gauss8_scale;
        pts.at(i, 1) = (c[1] + cfg.gauss8_sigma * rng.normal()) * cfg.gauss8_scale;
    }
    return Batch2D(std::move(pts));
}

/// Mixture of 25 Gaussians on the grid {-2,-1,0,1,2}^2 scaled by 2, the whole
/// sample scaled down by 1/(2*sqrt(2)).
inline Batch2D sample_25gaussians(Rng& rng, std::size_t n, const ToyDataConfig& cfg = {})
{
    detail::require_count(n, "sample_25gaussians");
    Tensor pts({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = rng.uniform_index(25);
        const double cx = cfg.gauss25_spacing * (static_cast<double>(k % 5) - 2.0);
        const double cy = cfg.gauss25_spacing * (static_cast<double>(k / 5) - 2.0);
        pts.at(i, 0) = (cx + cfg.gauss25_sigma * rng.normal()) * cfg.gauss25_scale;
        pts.at(i, 1) = (cy + cfg.gauss25_sigma * rng.normal()) * cfg.gauss25_scale;
    }
    return Batch2D(std::move(pts));
}

/// Parametric core of the swiss-roll sampler: position parameter u in [0,1],
/// additive noise on the two kept coordinates of the 3-D roll
/// (t cos t, h, t sin t) with t = 1.5*pi*(1 + 2u), scaled by 1/7.5.
inline std::array<double, 2> swiss_roll_point(double u, double noise_x, double noise_z,
                                              const ToyDataConfig& cfg = {})
{
    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * u);
    return {(t * std::cos(t) + noise_x) * cfg.swiss_scale,
            (t * std::sin(t) + noise_z) * cfg.swiss_scale};
}

inline Batch2D sample_swiss_roll(Rng& rng, std::size_t n, const ToyDataConfig& cfg = {})
{
    detail::require_count(n, "sample_swiss_roll");
    Tensor pts({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double nx = cfg.swiss_noise_sigma * rng.normal();
        const double nz = cfg.swiss_noise_sigma * rng.normal();
        const auto p = swiss_roll_point(u, nx, nz, cfg);
        pts.at(i, 0) = p[0];
        pts.at(i, 1) = p[1];
    }
    return Batch2D(std::move(pts));
}

/// Latent prior: n x dim of i.i.d. standard normals.
inline Tensor sample_latent(Rng& rng, std::size_t n, std::size_t dim = 2)
{
    detail::require_count(n, "sample_latent");
    if (dim == 0)
        throw Error("sample_latent: dim must be >= 1");
    Tensor z({n, dim});
    for (std::size_t i = 0; i < z.numel(); ++i)
        z[i] = rng.normal();
    return z;
}

} // namespace wgan2d
