#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgan2d/data.hpp"
#include "wgan2d/emd.hpp"
#include "wgan2d/log.hpp"
#include "wgan2d/nets.hpp"
#include "wgan2d/penalty.hpp"
#include "wgan2d/tape.hpp"
#include "wgan2d/viz.hpp"

namespace wgan2d {

enum class Dataset : std::uint8_t { k8Gaussians = 0, k25Gaussians, kSwissRoll };

inline const char* dataset_name(Dataset d)
{
    switch (d) {
    case Dataset::k8Gaussians: return "8gaussians";
    case Dataset::k25Gaussians: return "25gaussians";
    case Dataset::kSwissRoll: return "swissroll";
    }
    return "?";
}

inline Batch2D sample_dataset(Dataset d, Rng& rng, std::size_t n)
{
    switch (d) {
    case Dataset::k8Gaussians: return sample_8gaussians(rng, n);
    case Dataset::k25Gaussians: return sample_25gaussians(rng, n);
    case Dataset::kSwissRoll: return sample_swiss_roll(rng, n);
    }
    throw Error("sample_dataset: unknown dataset");
}

struct TrainConfig {
    Dataset dataset = Dataset::kSwissRoll;
    PenaltyConfig penalty;
    std::size_t batch_size = 256;
    std::size_t n_critic = 5;
    std::size_t iterations = 2000;
    std::size_t hidden_width = 512;
    std::size_t latent_dim = 2;
    Activation activation = Activation::kRelu;
    double learning_rate = 5e-5;
    std::uint64_t seed = 0;
    std::size_t emd_every = 20; // generator iterations between EMD evaluations; 0 = never
    std::size_t emd_batch = 256;
    std::vector<std::size_t> snapshot_iters = {500, 2500, 5000, 10000};
    BBox figure_bbox{};
    std::size_t figure_resolution = 128;
    // Wall-clock logging is opt-in: the log must be byte-identical across
    // reruns of the same seed, which a measured clock cannot be.
    bool measure_time = false;

    void validate() const
    {
        penalty.validate();
        if (iterations < 1)
            throw Error("TrainConfig: iterations must be >= 1");
        if (batch_size < 2)
            throw Error("TrainConfig: batch size must be >= 2");
        if (n_critic < 1)
            throw Error("TrainConfig: n_critic must be >= 1");
        if (hidden_width < 1 || latent_dim < 1)
            throw Error("TrainConfig: widths must be >= 1");
        if (learning_rate <= 0.0)
            throw Error("TrainConfig: learning rate must be positive");
        if (emd_every > 0 && emd_batch < 1)
            throw Error("TrainConfig: emd batch must be >= 1");
        if (figure_resolution < 2)
            throw Error("TrainConfig: figure resolution must be >= 2");
    }
};

/// Live training state. Separate seeded streams keep data draws, EMD
/// evaluation draws and figure draws independent, so e.g. changing the EMD
/// cadence does not perturb the training trajectory.
struct GanState {
    MlpParams generator;
    MlpParams critic;
    RmsProp generator_opt;
    RmsProp critic_opt;
    Rng data_rng;
    Rng emd_rng;
    Rng viz_rng;
};

inline GanState init_state(const TrainConfig& cfg)
{
    cfg.validate();
    Rng init_rng(cfg.seed, 0);
    MlpParams generator =
        init_mlp(init_rng, Role::kGenerator, cfg.hidden_width, cfg.activation, cfg.latent_dim);
    MlpParams critic = init_mlp(init_rng, Role::kCritic, cfg.hidden_width, cfg.activation);
    const RmsPropConfig opt{cfg.learning_rate, 0.9, 1e-10};
    RmsProp generator_opt(generator, opt);
    RmsProp critic_opt(critic, opt);
    return GanState{std::move(generator),
                    std::move(critic),
                    std::move(generator_opt),
                    std::move(critic_opt),
                    Rng(cfg.seed, 1),
                    Rng(cfg.seed, 2),
                    Rng(cfg.seed, 3)};
}

/// Empirical dual objective: mean critic score on real samples minus mean
/// critic score on generated samples.
inline NodeId surrogate_loss(Tape& tape, const MlpVars& critic, Activation activation,
                             NodeId real, NodeId fake)
{
    const NodeId on_real = tape.mean(mlp_forward(tape, critic, activation, real));
    const NodeId on_fake = tape.mean(mlp_forward(tape, critic, activation, fake));
    return tape.sub(on_real, on_fake);
}

inline NodeId surrogate_loss(Tape& tape, const MlpParams& critic, const Batch2D& real,
                             const Batch2D& fake)
{
    critic.validate();
    if (real.size() != fake.size())
        throw ShapeError("surrogate_loss: batch sizes differ");
    return surrogate_loss(tape, params_to_nodes(tape, critic), critic.activation,
                          tape.input(real.points), tape.input(fake.points));
}

struct StepStats {
    double surrogate = 0.0;
    double penalty = 0.0;
};

/// One critic update: ascend the surrogate (expressed as descent on its
/// negation), plus the configured regularizer. Penalty points are drawn after
/// the real and latent batches so that runs whose penalties contribute
/// nothing stay step-for-step comparable with unregularized ones. Touches
/// only the critic and its optimizer state.
inline StepStats critic_step(GanState& state, const TrainConfig& cfg)
{
    const Batch2D real = sample_dataset(cfg.dataset, state.data_rng, cfg.batch_size);
    const Tensor latent = sample_latent(state.data_rng, cfg.batch_size, cfg.latent_dim);
    Tensor fake_pts = forward_values(state.generator, latent);
    fake_pts.require_finite("critic_step: generator output");
    const Batch2D fake(std::move(fake_pts));

    const bool penalized =
        cfg.penalty.kind == PenaltyKind::kGp || cfg.penalty.kind == PenaltyKind::kLp;
    std::optional<Batch2D> penalty_points;
    if (penalized)
        penalty_points = sample_penalty_points(state.data_rng, cfg.penalty, real, fake);

    Tape tape;
    const MlpVars vars = params_to_nodes(tape, state.critic);
    const NodeId surrogate = surrogate_loss(tape, vars, cfg.activation, tape.input(real.points),
                                            tape.input(fake.points));
    NodeId loss = tape.mul(surrogate, tape.constant(-1.0));

    StepStats stats;
    stats.surrogate = tape.value(surrogate)[0];
    if (penalized) {
        const NodeId z = tape.input(penalty_points->points);
        const NodeId pen = cfg.penalty.kind == PenaltyKind::kGp
                               ? penalty_gp(tape, vars, cfg.activation, z, cfg.penalty.lambda)
                               : penalty_lp(tape, vars, cfg.activation, z, cfg.penalty.lambda);
        stats.penalty = tape.value(pen)[0];
        loss = tape.add(loss, pen);
    }

    const std::vector<Tensor> grads = tape.gradient_values(loss, vars.all());
    state.critic_opt.step(state.critic, grads);
    if (cfg.penalty.kind == PenaltyKind::kClip)
        clip_weights(state.critic, cfg.penalty.clip_c);
    return stats;
}

/// One generator update: descend -E[f(G(z))]. Touches only the generator and
/// its optimizer state.
inline double generator_step(GanState& state, const TrainConfig& cfg)
{
    const Tensor latent = sample_latent(state.data_rng, cfg.batch_size, cfg.latent_dim);

    Tape tape;
    const MlpVars gen_vars = params_to_nodes(tape, state.generator);
    const NodeId fake = mlp_forward(tape, gen_vars, cfg.activation, tape.input(latent));
    const MlpVars critic_vars = params_to_nodes(tape, state.critic);
    const NodeId score = tape.mean(mlp_forward(tape, critic_vars, cfg.activation, fake));
    const NodeId loss = tape.mul(score, tape.constant(-1.0));

    const std::vector<Tensor> grads = tape.gradient_values(loss, gen_vars.all());
    state.generator_opt.step(state.generator, grads);
    return tape.value(loss)[0];
}

/// Exact minibatch earth mover's distance between a fresh real batch and a
/// fresh generated batch, both drawn from the evaluation stream.
inline double evaluate_emd(GanState& state, const TrainConfig& cfg)
{
    const Batch2D real = sample_dataset(cfg.dataset, state.emd_rng, cfg.emd_batch);
    const Tensor latent = sample_latent(state.emd_rng, cfg.emd_batch, cfg.latent_dim);
    Tensor fake_pts = forward_values(state.generator, latent);
    fake_pts.require_finite("evaluate_emd: generator output");
    return emd(real, Batch2D(std::move(fake_pts)));
}

struct TrainCallbacks {
    /// Called after every critic update with (state, generator iteration,
    /// critic step index within the iteration).
    std::function<void(const GanState&, std::size_t, std::size_t)> after_critic_step;
    /// Called after every completed generator iteration.
    std::function<void(const GanState&, const TrainRecord&)> after_iteration;
};

struct TrainResult {
    RunStatus status = RunStatus::kCompleted;
    std::size_t completed_iterations = 0;
    std::string diagnostic;
    std::vector<TrainRecord> log;
    std::vector<RunFigure> figures;
    MlpParams generator;
    MlpParams critic;
};

/// Runs the adversarial loop: n_critic critic updates then one generator
/// update per iteration, EMD every emd_every iterations, and at each snapshot
/// iteration a checkpoint plus a level-set figure. When out_dir is non-empty,
/// log.csv, the figures, a manifest and the checkpoints are written there; an
/// aborted run still flushes whatever was logged before the abort.
inline TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir = {},
                         const TrainCallbacks& callbacks = {})
{
    cfg.validate();
    GanState state = init_state(cfg);
    const bool write_artifacts = !out_dir.empty();
    if (write_artifacts) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw IoError("cannot create output directory " + out_dir.string() + ": "
                          + ec.message());
    }

    TrainResult result;
    const auto start = std::chrono::steady_clock::now();

    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        TrainRecord record;
        record.iteration = iter;
        try {
            StepStats stats;
            for (std::size_t k = 0; k < cfg.n_critic; ++k) {
                stats = critic_step(state, cfg);
                if (callbacks.after_critic_step)
                    callbacks.after_critic_step(state, iter, k);
            }
            generator_step(state, cfg);
            record.critic_surrogate = stats.surrogate;
            record.penalty_value = stats.penalty;
            record.neg_critic_loss = -stats.surrogate;
            if (cfg.emd_every > 0 && iter % cfg.emd_every == 0)
                record.emd = evaluate_emd(state, cfg);
        } catch (const NumericError& e) {
            result.status = RunStatus::kDiverged;
            result.diagnostic = "iteration " + std::to_string(iter) + ": " + e.what();
            break;
        }
        if (cfg.measure_time)
            record.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        result.log.push_back(record);
        result.completed_iterations = iter;
        if (callbacks.after_iteration)
            callbacks.after_iteration(state, record);

        try {
            for (std::size_t snap : cfg.snapshot_iters) {
                if (snap != iter)
                    continue;
                const Batch2D real = sample_dataset(cfg.dataset, state.viz_rng, cfg.batch_size);
                const Tensor latent = sample_latent(state.viz_rng, cfg.batch_size, cfg.latent_dim);
                Tensor fake_pts = forward_values(state.generator, latent);
                fake_pts.require_finite("snapshot: generator output");
                const Batch2D fake(std::move(fake_pts));

                FigureOverlay overlay;
                overlay.training = FigureOverlay::from_batch(real);
                overlay.generated = FigureOverlay::from_batch(fake);
                if (cfg.penalty.kind == PenaltyKind::kGp || cfg.penalty.kind == PenaltyKind::kLp)
                    overlay.penalty = FigureOverlay::from_batch(
                        sample_penalty_points(state.viz_rng, cfg.penalty, real, fake));

                const LevelSetGrid grid =
                    level_set_grid(state.critic, cfg.figure_bbox, cfg.figure_resolution,
                                   cfg.figure_resolution);
                result.figures.push_back({iter, render_figure(grid, overlay)});
                if (write_artifacts)
                    save_checkpoint((out_dir / ("ckpt_" + std::to_string(iter))).string(),
                                    state.generator, state.critic);
            }
        } catch (const NumericError& e) {
            result.status = RunStatus::kDiverged;
            result.diagnostic = "iteration " + std::to_string(iter) + " snapshot: " + e.what();
            break;
        }
    }

    result.generator = std::move(state.generator);
    result.critic = std::move(state.critic);
    if (write_artifacts)
        write_run_artifacts(result.log, result.figures, out_dir);
    return result;
}

} // namespace wgan2d
