#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgan2d/presets.hpp"
#include "wgan2d/trainer.hpp"

namespace wgan2d {

class UsageError : public Error {
public:
    using Error::Error;
};

inline Dataset parse_dataset(const std::string& s)
{
    if (s == "8gaussians")
        return Dataset::k8Gaussians;
    if (s == "25gaussians")
        return Dataset::k25Gaussians;
    if (s == "swissroll")
        return Dataset::kSwissRoll;
    throw UsageError("unknown dataset '" + s + "' (expected 8gaussians|25gaussians|swissroll)");
}

inline PenaltyKind parse_penalty_kind(const std::string& s)
{
    if (s == "none")
        return PenaltyKind::kNone;
    if (s == "clip")
        return PenaltyKind::kClip;
    if (s == "gp")
        return PenaltyKind::kGp;
    if (s == "lp")
        return PenaltyKind::kLp;
    throw UsageError("unknown penalty '" + s + "' (expected none|clip|gp|lp)");
}

inline SamplingKind parse_sampling_kind(const std::string& s)
{
    if (s == "interpolate")
        return SamplingKind::kInterpolate;
    if (s == "perturb_real")
        return SamplingKind::kPerturbReal;
    if (s == "perturb_both")
        return SamplingKind::kPerturbBoth;
    throw UsageError("unknown sampling '" + s
                     + "' (expected interpolate|perturb_real|perturb_both)");
}

inline Activation parse_activation(const std::string& s)
{
    if (s == "relu")
        return Activation::kRelu;
    if (s == "tanh")
        return Activation::kTanh;
    throw UsageError("unknown activation '" + s + "' (expected relu|tanh)");
}

/// "500,2500,5000" -> {500, 2500, 5000}; "" and "none" -> {}.
inline std::vector<std::size_t> parse_snapshot_list(const std::string& s)
{
    std::vector<std::size_t> out;
    if (s.empty() || s == "none")
        return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(item, &pos);
            if (pos != item.size() || v < 1)
                throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw UsageError("bad snapshot list entry '" + item + "'");
        }
    }
    return out;
}

/// Settings a user may pin; anything unset falls through to the layer below
/// (flags over config file over preset over built-in defaults).
struct ConfigOverrides {
    std::optional<Dataset> dataset;
    std::optional<PenaltyKind> penalty;
    std::optional<SamplingKind> sampling;
    std::optional<double> lambda, clip_c, dragan_c, learning_rate;
    std::optional<std::size_t> batch_size, n_critic, iterations, emd_every, emd_batch,
        hidden_width;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::size_t>> snapshots;
    std::optional<Activation> activation;
    std::optional<bool> measure_time;

    void apply(TrainConfig& cfg) const
    {
        if (dataset)
            cfg.dataset = *dataset;
        if (penalty)
            cfg.penalty.kind = *penalty;
        if (sampling)
            cfg.penalty.sampling = *sampling;
        if (lambda)
            cfg.penalty.lambda = *lambda;
        if (clip_c)
            cfg.penalty.clip_c = *clip_c;
        if (dragan_c)
            cfg.penalty.dragan_c = *dragan_c;
        if (learning_rate)
            cfg.learning_rate = *learning_rate;
        if (batch_size)
            cfg.batch_size = *batch_size;
        if (n_critic)
            cfg.n_critic = *n_critic;
        if (iterations)
            cfg.iterations = *iterations;
        if (emd_every)
            cfg.emd_every = *emd_every;
        if (emd_batch)
            cfg.emd_batch = *emd_batch;
        if (hidden_width)
            cfg.hidden_width = *hidden_width;
        if (seed)
            cfg.seed = *seed;
        if (snapshots)
            cfg.snapshot_iters = *snapshots;
        if (activation)
            cfg.activation = *activation;
        if (measure_time)
            cfg.measure_time = *measure_time;
    }
};

/// Flat key=value file, one entry per line, '#' starts a comment. Keys are
/// the long flag names without the leading dashes.
inline ConfigOverrides parse_config_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw UsageError("cannot open config file: " + path);
    ConfigOverrides o;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto where = path + ":" + std::to_string(lineno);
        try {
            if (key == "dataset")
                o.dataset = parse_dataset(value);
            else if (key == "penalty")
                o.penalty = parse_penalty_kind(value);
            else if (key == "sampling")
                o.sampling = parse_sampling_kind(value);
            else if (key == "lambda")
                o.lambda = std::stod(value);
            else if (key == "clip-c")
                o.clip_c = std::stod(value);
            else if (key == "dragan-C")
                o.dragan_c = std::stod(value);
            else if (key == "lr")
                o.learning_rate = std::stod(value);
            else if (key == "batch-size")
                o.batch_size = static_cast<std::size_t>(std::stoull(value));
            else if (key == "n-critic")
                o.n_critic = static_cast<std::size_t>(std::stoull(value));
            else if (key == "iterations")
                o.iterations = static_cast<std::size_t>(std::stoull(value));
            else if (key == "emd-every")
                o.emd_every = static_cast<std::size_t>(std::stoull(value));
            else if (key == "emd-batch")
                o.emd_batch = static_cast<std::size_t>(std::stoull(value));
            else if (key == "hidden-width")
                o.hidden_width = static_cast<std::size_t>(std::stoull(value));
            else if (key == "seed")
                o.seed = static_cast<std::uint64_t>(std::stoull(value));
            else if (key == "snapshots")
                o.snapshots = parse_snapshot_list(value);
            else if (key == "activation")
                o.activation = parse_activation(value);
            else if (key == "measure-time")
                o.measure_time = (value == "1" || value == "true");
            else
                throw UsageError("unknown key '" + key + "'");
        } catch (const UsageError& e) {
            throw UsageError(where + ": " + e.what());
        } catch (const std::exception&) {
            throw UsageError(where + ": bad value '" + value + "' for key '" + key + "'");
        }
    }
    return o;
}

/// Rejects flag combinations that contradict the resolved penalty mode.
inline void validate_resolved(const TrainConfig& cfg, const ConfigOverrides& flags)
{
    const bool penalized =
        cfg.penalty.kind == PenaltyKind::kGp || cfg.penalty.kind == PenaltyKind::kLp;
    if (flags.lambda && !penalized)
        throw UsageError("--lambda requires --penalty gp or lp");
    if (flags.sampling && !penalized)
        throw UsageError("--sampling requires --penalty gp or lp");
    if (flags.clip_c && cfg.penalty.kind != PenaltyKind::kClip)
        throw UsageError("--clip-c requires --penalty clip");
    if (flags.lambda && *flags.lambda < 0.0)
        throw UsageError("--lambda must be >= 0");
    if (flags.clip_c && *flags.clip_c <= 0.0)
        throw UsageError("--clip-c must be > 0");
    if (flags.dragan_c && *flags.dragan_c <= 0.0)
        throw UsageError("--dragan-C must be > 0");
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

/// One fully resolved run: where it writes and what it runs.
struct ResolvedRun {
    std::string name;
    TrainConfig config;
};

/// Resolves a run invocation to its run list. With --preset the preset (or
/// every member of a preset group) provides the base configuration; the
/// config file and then the flags are layered on top.
inline std::vector<ResolvedRun> resolve_runs(const std::optional<std::string>& preset_name,
                                             const std::optional<std::string>& config_path,
                                             const ConfigOverrides& flags)
{
    ConfigOverrides file_overrides;
    if (config_path)
        file_overrides = parse_config_file(*config_path);

    std::vector<ResolvedRun> runs;
    if (preset_name) {
        const std::vector<Preset> members = resolve_preset(*preset_name);
        if (members.empty()) {
            std::string names;
            for (const auto& g : preset_groups())
                names += " " + g.name;
            throw UsageError("unknown preset '" + *preset_name + "'; available presets:" + names
                             + " (plus their members, see list-presets)");
        }
        for (const auto& member : members)
            runs.push_back({member.name, member.config});
    } else {
        if (!flags.dataset && !file_overrides.dataset)
            throw UsageError("either --preset or --dataset is required");
        runs.push_back({"custom", TrainConfig{}});
    }

    for (auto& run : runs) {
        file_overrides.apply(run.config);
        flags.apply(run.config);
        validate_resolved(run.config, flags);
    }
    return runs;
}

inline int cli_main(int argc, const char* const* argv)
{
    const TrainConfig defaults;
    CLI::App app{"Training lab for 2-D Wasserstein GANs under weight clipping, gradient "
                 "penalty, Lipschitz penalty and local-perturbation sampling, with exact "
                 "minibatch earth mover's distance logging"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run one experiment or a preset bundle");
    std::optional<std::string> preset_name, config_path;
    std::optional<std::string> dataset_s, penalty_s, sampling_s, activation_s, snapshots_s;
    ConfigOverrides flags;
    std::string out_root = "out";

    run_cmd->add_option("--preset", preset_name,
                        "Named experiment (figure bundle or single run); see list-presets");
    run_cmd->add_option("--config", config_path, "Flat key=value config file");
    run_cmd->add_option("--dataset", dataset_s, "8gaussians|25gaussians|swissroll");
    run_cmd->add_option("--penalty", penalty_s, "none|clip|gp|lp (default: gp)");
    run_cmd->add_option("--sampling", sampling_s,
                        "interpolate|perturb_real|perturb_both (default: interpolate)");
    run_cmd->add_option("--lambda", flags.lambda, "Penalty coefficient (default: 10)");
    run_cmd->add_option("--clip-c", flags.clip_c, "Weight clip bound (default: 0.01)");
    run_cmd->add_option("--dragan-C", flags.dragan_c,
                        "Local perturbation scale factor (default: 0.5)");
    run_cmd->add_option("--batch-size", flags.batch_size, "Minibatch size (default: 256)");
    run_cmd->add_option("--n-critic", flags.n_critic,
                        "Critic updates per generator update (default: 5)");
    run_cmd->add_option("--iterations", flags.iterations,
                        "Generator iterations (default: 2000)");
    run_cmd->add_option("--lr", flags.learning_rate, "RMSProp learning rate (default: 5e-05)");
    run_cmd->add_option("--seed", flags.seed, "Run seed (default: 0)");
    run_cmd->add_option("--emd-every", flags.emd_every,
                        "Iterations between EMD evaluations, 0 disables (default: 20)");
    run_cmd->add_option("--emd-batch", flags.emd_batch,
                        "Batch size for EMD evaluation (default: 256)");
    run_cmd->add_option("--snapshots", snapshots_s,
                        "Comma-separated snapshot iterations, 'none' for none "
                        "(default: 500,2500,5000,10000)");
    run_cmd->add_option("--hidden-width", flags.hidden_width,
                        "Hidden layer width of both networks (default: 512)");
    run_cmd->add_option("--activation", activation_s, "relu|tanh (default: relu)");
    run_cmd->add_option("--out", out_root, "Output root directory")->capture_default_str();
    bool measure_time = false;
    run_cmd->add_flag("--measure-time", measure_time,
                      "Record wall-clock in the log (off by default: timed logs are not "
                      "byte-reproducible)");

    auto* list_cmd = app.add_subcommand("list-presets", "List every preset and its members");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*list_cmd) {
        for (const auto& g : preset_groups()) {
            std::printf("%-12s %s\n", g.name.c_str(), g.description.c_str());
            if (g.members.size() == 1 && g.members[0] == g.name)
                continue;
            for (const auto& m : g.members) {
                const auto p = find_preset(m);
                std::printf("  %-12s %s\n", m.c_str(), p ? p->description.c_str() : "");
            }
        }
        return 0;
    }

    try {
        if (dataset_s)
            flags.dataset = parse_dataset(*dataset_s);
        if (penalty_s)
            flags.penalty = parse_penalty_kind(*penalty_s);
        if (sampling_s)
            flags.sampling = parse_sampling_kind(*sampling_s);
        if (activation_s)
            flags.activation = parse_activation(*activation_s);
        if (snapshots_s)
            flags.snapshots = parse_snapshot_list(*snapshots_s);
        if (measure_time)
            flags.measure_time = true;

        const std::vector<ResolvedRun> runs = resolve_runs(preset_name, config_path, flags);
        bool all_completed = true;
        for (const auto& run : runs) {
            const std::filesystem::path dir =
                std::filesystem::path(out_root) / run.name / std::to_string(run.config.seed);
            std::printf("run %s: dataset=%s penalty=%s", run.name.c_str(),
                        dataset_name(run.config.dataset),
                        penalty_kind_name(run.config.penalty.kind));
            if (run.config.penalty.kind == PenaltyKind::kGp
                || run.config.penalty.kind == PenaltyKind::kLp)
                std::printf(" lambda=%g sampling=%s", run.config.penalty.lambda,
                            sampling_kind_name(run.config.penalty.sampling));
            if (run.config.penalty.kind == PenaltyKind::kClip)
                std::printf(" clip_c=%g", run.config.penalty.clip_c);
            std::printf(" iterations=%zu seed=%llu -> %s\n", run.config.iterations,
                        static_cast<unsigned long long>(run.config.seed), dir.string().c_str());
            std::fflush(stdout);

            const auto t0 = std::chrono::steady_clock::now();
            const TrainResult result = train(run.config, dir);
            const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            if (result.status == RunStatus::kCompleted) {
                std::printf("  completed %zu iterations in %llds\n", result.completed_iterations,
                            static_cast<long long>(secs));
            } else {
                std::printf("  DIVERGED after %zu iterations: %s\n", result.completed_iterations,
                            result.diagnostic.c_str());
                all_completed = false;
            }
            std::fflush(stdout);
        }
        return all_completed ? 0 : 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "run with --help for usage\n");
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace wgan2d
