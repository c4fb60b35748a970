#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wgan2d/trainer.hpp"

namespace wgan2d {

/// A named, fully specified experiment configuration.
struct Preset {
    std::string name;
    std::string description;
    TrainConfig config;
};

/// A figure-level bundle: running the group runs every member in order.
struct PresetGroup {
    std::string name;
    std::string description;
    std::vector<std::string> members;
};

namespace detail {
    inline TrainConfig level_set_config(Dataset dataset, PenaltyKind kind, double lambda)
    {
        TrainConfig cfg;
        cfg.dataset = dataset;
        cfg.penalty.kind = kind;
        cfg.penalty.lambda = lambda;
        cfg.penalty.sampling = SamplingKind::kInterpolate;
        cfg.iterations = 10000;
        cfg.snapshot_iters = {500, 2500, 5000, 10000};
        cfg.emd_every = 0;
        return cfg;
    }

    inline TrainConfig loss_curve_config(PenaltyKind kind, double lambda, SamplingKind sampling)
    {
        TrainConfig cfg;
        cfg.dataset = Dataset::kSwissRoll;
        cfg.penalty.kind = kind;
        cfg.penalty.lambda = lambda;
        cfg.penalty.sampling = sampling;
        cfg.iterations = 20000;
        cfg.snapshot_iters = {};
        cfg.emd_every = 0;
        return cfg;
    }

    inline TrainConfig emd_curve_config(PenaltyKind kind, double lambda, SamplingKind sampling)
    {
        TrainConfig cfg;
        cfg.dataset = Dataset::kSwissRoll;
        cfg.penalty.kind = kind;
        cfg.penalty.lambda = lambda;
        cfg.penalty.sampling = sampling;
        cfg.iterations = 2000;
        cfg.snapshot_iters = {};
        cfg.emd_every = 20;
        return cfg;
    }
}

inline const std::vector<Preset>& all_presets()
{
    using detail::emd_curve_config;
    using detail::level_set_config;
    using detail::loss_curve_config;
    static const std::vector<Preset> presets = [] {
        std::vector<Preset> p;
        const auto level_set_trio = [&](const std::string& base, Dataset ds,
                                        const std::string& ds_label) {
            p.push_back({base + "-top", "Critic level sets on " + ds_label + ", GP penalty, lambda=10",
                         level_set_config(ds, PenaltyKind::kGp, 10.0)});
            p.push_back({base + "-middle", "Critic level sets on " + ds_label + ", GP penalty, lambda=1",
                         level_set_config(ds, PenaltyKind::kGp, 1.0)});
            p.push_back({base + "-bottom", "Critic level sets on " + ds_label + ", LP penalty, lambda=10",
                         level_set_config(ds, PenaltyKind::kLp, 10.0)});
        };
        level_set_trio("fig1", Dataset::kSwissRoll, "Swiss Roll");

        p.push_back({"fig2-gp", "Critic negative loss over 20k iterations, GP penalty, lambda=5",
                     loss_curve_config(PenaltyKind::kGp, 5.0, SamplingKind::kInterpolate)});
        p.push_back({"fig2-lp", "Critic negative loss over 20k iterations, LP penalty, lambda=5",
                     loss_curve_config(PenaltyKind::kLp, 5.0, SamplingKind::kInterpolate)});

        p.push_back({"fig3-gp", "EMD during training, GP penalty, lambda=5",
                     emd_curve_config(PenaltyKind::kGp, 5.0, SamplingKind::kInterpolate)});
        p.push_back({"fig3-lp", "EMD during training, LP penalty, lambda=5",
                     emd_curve_config(PenaltyKind::kLp, 5.0, SamplingKind::kInterpolate)});

        level_set_trio("fig4", Dataset::k8Gaussians, "8 Gaussians");
        level_set_trio("fig5", Dataset::k25Gaussians, "25 Gaussians");

        p.push_back({"fig6", "Critic negative loss over 20k iterations, GP penalty, lambda=1",
                     loss_curve_config(PenaltyKind::kGp, 1.0, SamplingKind::kInterpolate)});
        p.push_back({"fig7", "EMD during training, GP penalty, lambda=1",
                     emd_curve_config(PenaltyKind::kGp, 1.0, SamplingKind::kInterpolate)});

        p.push_back({"fig8-top",
                     "Critic negative loss with penalty points from perturbed training samples, "
                     "GP penalty, lambda=5",
                     loss_curve_config(PenaltyKind::kGp, 5.0, SamplingKind::kPerturbReal)});
        p.push_back({"fig8-middle",
                     "Critic negative loss with penalty points from perturbed training and "
                     "generated samples, GP penalty, lambda=5",
                     loss_curve_config(PenaltyKind::kGp, 5.0, SamplingKind::kPerturbBoth)});
        p.push_back({"fig8-bottom",
                     "Critic negative loss with penalty points from perturbed training and "
                     "generated samples, LP penalty, lambda=5",
                     loss_curve_config(PenaltyKind::kLp, 5.0, SamplingKind::kPerturbBoth)});

        p.push_back({"fig9-gp", "EMD during training with locally perturbed penalty points, "
                                "GP penalty, lambda=5",
                     emd_curve_config(PenaltyKind::kGp, 5.0, SamplingKind::kPerturbBoth)});
        p.push_back({"fig9-lp", "EMD during training with locally perturbed penalty points, "
                                "LP penalty, lambda=5",
                     emd_curve_config(PenaltyKind::kLp, 5.0, SamplingKind::kPerturbBoth)});
        return p;
    }();
    return presets;
}

inline const std::vector<PresetGroup>& preset_groups()
{
    static const std::vector<PresetGroup> groups = {
        {"fig1", "Critic level sets on Swiss Roll (GP lambda=10 / GP lambda=1 / LP lambda=10)",
         {"fig1-top", "fig1-middle", "fig1-bottom"}},
        {"fig2", "Critic negative loss, GP vs LP at lambda=5", {"fig2-gp", "fig2-lp"}},
        {"fig3", "EMD during training, GP vs LP at lambda=5", {"fig3-gp", "fig3-lp"}},
        {"fig4", "Critic level sets on 8 Gaussians (GP lambda=10 / GP lambda=1 / LP lambda=10)",
         {"fig4-top", "fig4-middle", "fig4-bottom"}},
        {"fig5", "Critic level sets on 25 Gaussians (GP lambda=10 / GP lambda=1 / LP lambda=10)",
         {"fig5-top", "fig5-middle", "fig5-bottom"}},
        {"fig6", "Critic negative loss, GP at lambda=1", {"fig6"}},
        {"fig7", "EMD during training, GP at lambda=1", {"fig7"}},
        {"fig8", "Critic negative loss under local-perturbation sampling",
         {"fig8-top", "fig8-middle", "fig8-bottom"}},
        {"fig9", "EMD during training under local-perturbation sampling",
         {"fig9-gp", "fig9-lp"}},
    };
    return groups;
}

inline std::optional<Preset> find_preset(const std::string& name)
{
    for (const auto& p : all_presets())
        if (p.name == name)
            return p;
    return std::nullopt;
}

/// A name resolves either to a single preset or, for a group, to its members
/// in order. Unknown names resolve to an empty list.
inline std::vector<Preset> resolve_preset(const std::string& name)
{
    std::vector<Preset> out;
    for (const auto& g : preset_groups()) {
        if (g.name != name)
            continue;
        for (const auto& member : g.members)
            if (auto p = find_preset(member))
                out.push_back(*p);
        // A single-member group whose member shares its name is the same run.
        if (out.size() == 1 && out[0].name == name)
            return out;
        if (!out.empty())
            return out;
    }
    if (auto p = find_preset(name))
        out.push_back(*p);
    return out;
}

} // namespace wgan2d
