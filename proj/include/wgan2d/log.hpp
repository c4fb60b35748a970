#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace wgan2d {

/// One row of the per-iteration run log. critic_surrogate is
/// E[f(real)] - E[f(fake)] from the last critic update of the iteration;
/// neg_critic_loss is its exact negation. The penalty term is reported in
/// its own column and included in neither sign.
struct TrainRecord {
    std::size_t iteration = 0;
    double critic_surrogate = 0.0;
    double penalty_value = 0.0;
    double neg_critic_loss = 0.0;
    std::optional<double> emd;
    long long wall_ms = 0;
};

enum class RunStatus { kCompleted, kDiverged };

namespace detail {
    inline std::string format_double(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
}

/// Serializes the run log with a pinned header and pinned float formatting so
/// identical runs produce identical bytes. The emd field is blank on rows
/// where it was not evaluated.
inline std::string records_to_csv(const std::vector<TrainRecord>& records)
{
    std::string out = "iteration,critic_surrogate,penalty_value,neg_critic_loss,emd,wall_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.iteration);
        out += ',';
        out += detail::format_double(r.critic_surrogate);
        out += ',';
        out += detail::format_double(r.penalty_value);
        out += ',';
        out += detail::format_double(r.neg_critic_loss);
        out += ',';
        if (r.emd.has_value())
            out += detail::format_double(*r.emd);
        out += ',';
        out += std::to_string(r.wall_ms);
        out += '\n';
    }
    return out;
}

} // namespace wgan2d
