#pragma once

#include <string>
#include <vector>

#include "wgan2d/nets.hpp"
#include "wgan2d/tensor.hpp"

namespace wgan2d::testutil {

/// A critic that computes exactly f(x) = wx*x1 + wy*x2 on any region where
/// |wx*x1 + wy*x2| stays below the hidden bias, built as a width-1 network
/// whose ReLUs never switch. Its input gradient is exactly (wx, wy)
/// everywhere on that region, which makes penalty values analytic.
inline MlpParams linear_critic(double wx, double wy, double hidden_bias = 1000.0)
{
    MlpParams p;
    p.role = Role::kCritic;
    p.activation = Activation::kRelu;
    p.layers.push_back({Tensor({2, 1}, {wx, wy}), Tensor({1, 1}, {hidden_bias})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {0.0})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {0.0})});
    p.layers.push_back({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {-hidden_bias})});
    return p;
}

inline bool tensors_equal(const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape())
        return false;
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (a[i] != b[i])
            return false;
    return true;
}

inline bool params_equal(const MlpParams& a, const MlpParams& b)
{
    if (a.layers.size() != b.layers.size())
        return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i)
        if (!tensors_equal(a.layers[i].weight, b.layers[i].weight)
            || !tensors_equal(a.layers[i].bias, b.layers[i].bias))
            return false;
    return true;
}

inline double max_rel_diff(const Tensor& a, const Tensor& b, double floor = 1e-12)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

inline std::string golden_path(const std::string& filename)
{
    return std::string(WGAN2D_GOLDEN_DIR) + "/" + filename;
}

} // namespace wgan2d::testutil
