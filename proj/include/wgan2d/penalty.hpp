#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wgan2d/data.hpp"
#include "wgan2d/nets.hpp"
#include "wgan2d/rng.hpp"
#include "wgan2d/tape.hpp"

namespace wgan2d {

enum class PenaltyKind : std::uint8_t { kNone = 0, kClip, kGp, kLp };
enum class SamplingKind : std::uint8_t { kInterpolate = 0, kPerturbReal, kPerturbBoth };

inline const char* penalty_kind_name(PenaltyKind k)
{
    switch (k) {
    case PenaltyKind::kNone: return "none";
    case PenaltyKind::kClip: return "clip";
    case PenaltyKind::kGp: return "gp";
    case PenaltyKind::kLp: return "lp";
    }
    return "?";
}

inline const char* sampling_kind_name(SamplingKind s)
{
    switch (s) {
    case SamplingKind::kInterpolate: return "interpolate";
    case SamplingKind::kPerturbReal: return "perturb_real";
    case SamplingKind::kPerturbBoth: return "perturb_both";
    }
    return "?";
}

struct PenaltyConfig {
    PenaltyKind kind = PenaltyKind::kGp;
    double lambda = 10.0;  // gp / lp coefficient
    double clip_c = 0.01;  // clip bound
    double dragan_c = 0.5; // perturbation scale factor
    SamplingKind sampling = SamplingKind::kInterpolate;

    void validate() const
    {
        if (lambda < 0.0)
            throw Error("PenaltyConfig: lambda must be >= 0");
        if (kind == PenaltyKind::kClip && clip_c <= 0.0)
            throw Error("PenaltyConfig: clip bound must be positive");
        if (dragan_c <= 0.0)
            throw Error("PenaltyConfig: perturbation scale must be positive");
    }
};

/// Rowwise convex combination z_i = alpha_i * real_i + (1 - alpha_i) * fake_i.
inline Batch2D interpolate_rows(const Batch2D& real, const Batch2D& fake,
                                const std::vector<double>& alphas)
{
    if (real.size() != fake.size())
        throw ShapeError("interpolate_rows: batch sizes differ");
    if (alphas.size() != real.size())
        throw ShapeError("interpolate_rows: need one alpha per row");
    Tensor z({real.size(), 2});
    for (std::size_t i = 0; i < real.size(); ++i) {
        const double a = alphas[i];
        z.at(i, 0) = a * real.x(i) + (1.0 - a) * fake.x(i);
        z.at(i, 1) = a * real.y(i) + (1.0 - a) * fake.y(i);
    }
    return Batch2D(std::move(z));
}

/// Penalty points on the segments between paired real and generated samples,
/// with an independent U[0,1] mixing weight per row.
inline Batch2D sample_interpolates(Rng& rng, const Batch2D& real, const Batch2D& fake)
{
    if (real.size() != fake.size())
        throw ShapeError("sample_interpolates: batch sizes differ");
    std::vector<double> alphas(real.size());
    for (double& a : alphas)
        a = rng.uniform();
    return interpolate_rows(real, fake, alphas);
}

/// Scalar standard deviation over all coordinates of the batch (population
/// convention, matching the reference numerics).
inline double batch_std(const Batch2D& batch)
{
    const auto& d = batch.points.data();
    double mean = 0.0;
    for (double v : d)
        mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double v : d)
        var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(d.size()));
}

/// Local perturbation z_i = x_i + alpha_i * delta_i with
/// delta_i = C * std(batch) * U[0,1]^2 per coordinate and alpha_i ~ U[0,1].
/// Draw order per row: u_x, u_y, alpha.
inline Batch2D sample_local_perturbation(Rng& rng, const Batch2D& batch, double C)
{
    if (batch.size() < 2)
        throw Error("sample_local_perturbation: need n >= 2 for a defined std");
    if (C <= 0.0)
        throw Error("sample_local_perturbation: scale must be positive");
    const double s = C * batch_std(batch);
    Tensor z({batch.size(), 2});
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double ux = rng.uniform();
        const double uy = rng.uniform();
        const double alpha = rng.uniform();
        z.at(i, 0) = batch.x(i) + alpha * s * ux;
        z.at(i, 1) = batch.y(i) + alpha * s * uy;
    }
    return Batch2D(std::move(z));
}

/// Concatenate two batches row-wise.
inline Batch2D concat(const Batch2D& a, const Batch2D& b)
{
    Tensor pts({a.size() + b.size(), 2});
    for (std::size_t i = 0; i < a.size(); ++i) {
        pts.at(i, 0) = a.x(i);
        pts.at(i, 1) = a.y(i);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        pts.at(a.size() + i, 0) = b.x(i);
        pts.at(a.size() + i, 1) = b.y(i);
    }
    return Batch2D(std::move(pts));
}

/// Draws the penalty points for one critic step under the configured
/// sampling strategy.
inline Batch2D sample_penalty_points(Rng& rng, const PenaltyConfig& cfg, const Batch2D& real,
                                     const Batch2D& fake)
{
    switch (cfg.sampling) {
    case SamplingKind::kInterpolate:
        return sample_interpolates(rng, real, fake);
    case SamplingKind::kPerturbReal:
        return sample_local_perturbation(rng, real, cfg.dragan_c);
    case SamplingKind::kPerturbBoth: {
        // sequenced explicitly: the real batch draws first
        const Batch2D z_real = sample_local_perturbation(rng, real, cfg.dragan_c);
        const Batch2D z_fake = sample_local_perturbation(rng, fake, cfg.dragan_c);
        return concat(z_real, z_fake);
    }
    }
    throw Error("sample_penalty_points: unknown sampling kind");
}

/// Per-row gradients of the critic with respect to its input points, as a
/// differentiable [n, 2] node. Each output row depends only on its own input
/// row, so one backward pass of the summed outputs yields all row gradients
/// at once; the result stays on the tape so the penalty built from it can be
/// differentiated with respect to the critic parameters.
inline NodeId critic_input_gradients(Tape& tape, const MlpVars& critic, Activation activation,
                                     NodeId z)
{
    const NodeId out = mlp_forward(tape, critic, activation, z);
    const NodeId total = tape.sum(out);
    return tape.gradient(total, {z}, /*create_graph=*/true)[0];
}

namespace detail {
    /// lambda * mean_i(term(|grad_i| - 1)) for both penalty flavors.
    inline NodeId gradient_norm_penalty(Tape& tape, const MlpVars& critic, Activation activation,
                                        NodeId z, double lambda, bool one_sided)
    {
        if (lambda < 0.0)
            throw Error("penalty: lambda must be >= 0");
        const NodeId grads = critic_input_gradients(tape, critic, activation, z);
        const NodeId norms = l2norm_rows(tape, grads);
        NodeId excess = tape.sub(norms, tape.constant(1.0));
        if (one_sided)
            excess = tape.max_with_scalar(excess, 0.0);
        return tape.mul(tape.mean(tape.square(excess)), tape.constant(lambda));
    }
}

/// Two-sided penalty: lambda * E[(|grad f(z)| - 1)^2]. Pulls every gradient
/// norm toward exactly one.
inline NodeId penalty_gp(Tape& tape, const MlpVars& critic, Activation activation, NodeId z,
                         double lambda)
{
    return detail::gradient_norm_penalty(tape, critic, activation, z, lambda, false);
}

/// One-sided penalty: lambda * E[max(0, |grad f(z)| - 1)^2]. Norms below one
/// are left alone; at exactly one the hinge contributes value and slope zero.
inline NodeId penalty_lp(Tape& tape, const MlpVars& critic, Activation activation, NodeId z,
                         double lambda)
{
    return detail::gradient_norm_penalty(tape, critic, activation, z, lambda, true);
}

/// Convenience overloads that stage the critic and the penalty points onto
/// the tape themselves. The trainer uses the node-level versions instead so
/// the penalty shares parameter nodes with the surrogate loss.
inline NodeId penalty_gp(Tape& tape, const MlpParams& critic, const Batch2D& z, double lambda)
{
    critic.validate();
    return penalty_gp(tape, params_to_nodes(tape, critic), critic.activation,
                      tape.input(z.points), lambda);
}

inline NodeId penalty_lp(Tape& tape, const MlpParams& critic, const Batch2D& z, double lambda)
{
    critic.validate();
    return penalty_lp(tape, params_to_nodes(tape, critic), critic.activation,
                      tape.input(z.points), lambda);
}

} // namespace wgan2d
