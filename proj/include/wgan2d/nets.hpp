#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wgan2d/data.hpp"
#include "wgan2d/rng.hpp"
#include "wgan2d/tape.hpp"
#include "wgan2d/tensor.hpp"

namespace wgan2d {

enum class Activation : std::uint8_t { kRelu = 0, kTanh = 1 };
enum class Role : std::uint8_t { kGenerator = 0, kCritic = 1 };

inline const char* activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }
inline const char* role_name(Role r) { return r == Role::kGenerator ? "generator" : "critic"; }

struct DenseLayer {
    Tensor weight; // [d_in, d_out]
    Tensor bias;   // [1, d_out], added to every row
};

/// Weights of a perceptron with exactly 3 hidden layers. The generator maps
/// the latent space to the plane, the critic maps the plane to a score.
struct MlpParams {
    Role role = Role::kCritic;
    Activation activation = Activation::kRelu;
    std::vector<DenseLayer> layers; // 3 hidden + 1 output

    std::size_t input_dim() const { return layers.front().weight.rows(); }
    std::size_t output_dim() const { return layers.back().weight.cols(); }

    void validate() const
    {
        if (layers.size() != 4)
            throw ShapeError("MlpParams: expected 3 hidden layers + output, got "
                             + std::to_string(layers.size()) + " layers");
        for (std::size_t i = 0; i + 1 < layers.size(); ++i)
            if (layers[i].weight.cols() != layers[i + 1].weight.rows())
                throw ShapeError("MlpParams: layer " + std::to_string(i) + " output dim does not "
                                 "chain into layer " + std::to_string(i + 1));
        for (const auto& l : layers)
            if (l.bias.rank() != 2 || l.bias.rows() != 1 || l.bias.cols() != l.weight.cols())
                throw ShapeError("MlpParams: bias shape must be [1, d_out]");
    }
};

/// He-style initialization: weights ~ N(0, 2/d_in), biases zero.
inline MlpParams init_mlp(Rng& rng, Role role, std::size_t hidden_width, Activation activation,
                          std::size_t latent_dim = 2)
{
    if (hidden_width < 1)
        throw Error("init_mlp: hidden width must be >= 1");
    const std::size_t in = role == Role::kGenerator ? latent_dim : 2;
    const std::size_t out = role == Role::kGenerator ? 2 : 1;
    const std::size_t dims[5] = {in, hidden_width, hidden_width, hidden_width, out};

    MlpParams p;
    p.role = role;
    p.activation = activation;
    for (std::size_t l = 0; l < 4; ++l) {
        DenseLayer layer;
        layer.weight = Tensor({dims[l], dims[l + 1]});
        const double stddev = std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (double& w : layer.weight.data())
            w = stddev * rng.normal();
        layer.bias = Tensor({1, dims[l + 1]});
        p.layers.push_back(std::move(layer));
    }
    p.validate();
    return p;
}

/// Parameter nodes of one network on a tape, in (weight, bias) layer order.
struct MlpVars {
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;

    std::vector<NodeId> all() const
    {
        std::vector<NodeId> ids;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            ids.push_back(weights[i]);
            ids.push_back(biases[i]);
        }
        return ids;
    }
};

inline MlpVars params_to_nodes(Tape& tape, const MlpParams& params)
{
    MlpVars vars;
    for (const auto& layer : params.layers) {
        vars.weights.push_back(tape.input(layer.weight));
        vars.biases.push_back(tape.input(layer.bias));
    }
    return vars;
}

/// Forward pass as graph nodes: affine -> activation for the hidden layers,
/// final affine with no activation. The [1, d_out] bias is tiled across rows
/// with a ones-column matmul so the whole pass stays inside the primitive set.
inline NodeId mlp_forward(Tape& tape, const MlpVars& vars, Activation activation, NodeId x)
{
    const std::size_t n = tape.value(x).rows();
    const NodeId ones = tape.constant(Tensor::full({n, 1}, 1.0));
    NodeId h = x;
    for (std::size_t l = 0; l < vars.weights.size(); ++l) {
        h = tape.add(tape.matmul(h, vars.weights[l]), tape.matmul(ones, vars.biases[l]));
        if (l + 1 < vars.weights.size())
            h = activation == Activation::kRelu ? tape.relu(h) : tape.tanh(h);
    }
    return h;
}

inline NodeId mlp_forward(Tape& tape, const MlpParams& params, NodeId x)
{
    params.validate();
    return mlp_forward(tape, params_to_nodes(tape, params), params.activation, x);
}

/// Plain numeric forward pass, no tape. Same arithmetic as the node version.
inline Tensor forward_values(const MlpParams& params, const Tensor& x)
{
    namespace tm = tensor_math;
    if (x.rank() != 2 || x.cols() != params.input_dim())
        throw ShapeError("forward_values: input " + shape_str(x.shape()) + " does not match "
                         "network input dim " + std::to_string(params.input_dim()));
    Tensor h = x;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Tensor a = tm::matmul(h, params.layers[l].weight);
        const Tensor& b = params.layers[l].bias;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                a.at(i, j) += b.at(0, j);
        if (l + 1 < params.layers.size())
            h = params.activation == Activation::kRelu ? tm::relu(a) : tm::tanh(a);
        else
            h = std::move(a);
    }
    return h;
}

inline Tensor forward_values(const MlpParams& params, const Batch2D& batch)
{
    return forward_values(params, batch.points);
}

/// Clamp every weight and bias into [-c, +c].
inline void clip_weights(MlpParams& params, double c)
{
    if (c <= 0.0)
        throw Error("clip_weights: bound must be positive");
    for (auto& layer : params.layers) {
        for (double& w : layer.weight.data())
            w = std::clamp(w, -c, c);
        for (double& b : layer.bias.data())
            b = std::clamp(b, -c, c);
    }
}

inline double max_abs_param(const MlpParams& params)
{
    double m = 0.0;
    for (const auto& layer : params.layers) {
        for (double w : layer.weight.data())
            m = std::max(m, std::abs(w));
        for (double b : layer.bias.data())
            m = std::max(m, std::abs(b));
    }
    return m;
}

struct RmsPropConfig {
    double learning_rate = 5e-5;
    double decay = 0.9;
    double epsilon = 1e-10;
};

/// Plain RMSProp (no momentum). Accumulator layout mirrors the parameter
/// layout: one mean-square tensor per weight and bias, in layer order.
class RmsProp {
public:
    RmsProp(const MlpParams& params, RmsPropConfig cfg)
        : cfg_(cfg)
    {
        if (cfg.decay <= 0.0 || cfg.decay >= 1.0 || cfg.epsilon <= 0.0 || cfg.learning_rate <= 0.0)
            throw Error("RmsProp: decay in (0,1), epsilon > 0 and learning rate > 0 required");
        for (const auto& layer : params.layers) {
            mean_square_.push_back(Tensor::zeros(layer.weight.shape()));
            mean_square_.push_back(Tensor::zeros(layer.bias.shape()));
        }
    }

    /// grads holds one tensor per parameter in the same order as the
    /// accumulators: weight0, bias0, weight1, bias1, ...
    void step(MlpParams& params, const std::vector<Tensor>& grads)
    {
        if (grads.size() != mean_square_.size())
            throw ShapeError("rmsprop_step: expected " + std::to_string(mean_square_.size())
                             + " gradient tensors, got " + std::to_string(grads.size()));
        for (std::size_t t = 0; t < grads.size(); ++t) {
            const std::size_t layer = t / 2;
            const bool is_weight = (t % 2) == 0;
            if (!grads[t].all_finite())
                throw NumericError("rmsprop_step: non-finite gradient for " + param_name(params, layer, is_weight));
            Tensor& p = is_weight ? params.layers[layer].weight : params.layers[layer].bias;
            if (grads[t].shape() != p.shape())
                throw ShapeError("rmsprop_step: gradient shape " + shape_str(grads[t].shape())
                                 + " does not match " + param_name(params, layer, is_weight));
            Tensor& ms = mean_square_[t];
            for (std::size_t i = 0; i < p.numel(); ++i) {
                const double g = grads[t][i];
                ms[i] = cfg_.decay * ms[i] + (1.0 - cfg_.decay) * g * g;
                p[i] -= cfg_.learning_rate * g / (std::sqrt(ms[i]) + cfg_.epsilon);
            }
        }
    }

    const std::vector<Tensor>& mean_square() const { return mean_square_; }
    const RmsPropConfig& config() const { return cfg_; }

private:
    static std::string param_name(const MlpParams& params, std::size_t layer, bool is_weight)
    {
        return std::string(role_name(params.role)) + " layer " + std::to_string(layer)
               + (is_weight ? " weight" : " bias");
    }

    RmsPropConfig cfg_;
    std::vector<Tensor> mean_square_;
};

// ---------------------------------------------------------------------------
// Checkpoint format (little-endian binary, bit-exact round trip):
//   magic "W2NET1\n", role u8, activation u8, layer count u32,
//   then per layer: d_in u64, d_out u64, weight doubles row-major,
//   bias doubles. A trainer checkpoint is "W2PAIR1\n" followed by the
//   generator block and the critic block.
// ---------------------------------------------------------------------------

namespace detail {
    inline void write_bytes(std::ostream& os, const void* p, std::size_t n)
    {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }

    inline void read_bytes(std::istream& is, void* p, std::size_t n, const std::string& what)
    {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is)
            throw IoError("checkpoint: truncated while reading " + what);
    }

    template <typename T>
    void write_pod(std::ostream& os, T v)
    {
        write_bytes(os, &v, sizeof(T));
    }

    template <typename T>
    T read_pod(std::istream& is, const std::string& what)
    {
        T v{};
        read_bytes(is, &v, sizeof(T), what);
        return v;
    }
}

inline void write_mlp(std::ostream& os, const MlpParams& params)
{
    params.validate();
    os.write("W2NET1\n", 7);
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(params.role));
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(params.activation));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        detail::write_pod<std::uint64_t>(os, layer.weight.rows());
        detail::write_pod<std::uint64_t>(os, layer.weight.cols());
        detail::write_bytes(os, layer.weight.data().data(), layer.weight.numel() * sizeof(double));
        detail::write_bytes(os, layer.bias.data().data(), layer.bias.numel() * sizeof(double));
    }
}

inline MlpParams read_mlp(std::istream& is)
{
    char magic[7];
    detail::read_bytes(is, magic, 7, "magic");
    if (std::memcmp(magic, "W2NET1\n", 7) != 0)
        throw IoError("checkpoint: bad network magic");
    MlpParams p;
    p.role = static_cast<Role>(detail::read_pod<std::uint8_t>(is, "role"));
    p.activation = static_cast<Activation>(detail::read_pod<std::uint8_t>(is, "activation"));
    const auto n_layers = detail::read_pod<std::uint32_t>(is, "layer count");
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const auto d_in = detail::read_pod<std::uint64_t>(is, "d_in");
        const auto d_out = detail::read_pod<std::uint64_t>(is, "d_out");
        DenseLayer layer;
        layer.weight = Tensor({static_cast<std::size_t>(d_in), static_cast<std::size_t>(d_out)});
        detail::read_bytes(is, layer.weight.data().data(), layer.weight.numel() * sizeof(double),
                           "weights");
        layer.bias = Tensor({1, static_cast<std::size_t>(d_out)});
        detail::read_bytes(is, layer.bias.data().data(), layer.bias.numel() * sizeof(double),
                           "biases");
        p.layers.push_back(std::move(layer));
    }
    p.validate();
    return p;
}

inline void save_checkpoint(const std::string& path, const MlpParams& generator,
                            const MlpParams& critic)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open checkpoint for writing: " + path);
    os.write("W2PAIR1\n", 8);
    write_mlp(os, generator);
    write_mlp(os, critic);
    if (!os)
        throw IoError("failed writing checkpoint: " + path);
}

inline std::pair<MlpParams, MlpParams> load_checkpoint(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    detail::read_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, "W2PAIR1\n", 8) != 0)
        throw IoError("checkpoint: bad pair magic in " + path);
    MlpParams gen = read_mlp(is);
    MlpParams critic = read_mlp(is);
    return {std::move(gen), std::move(critic)};
}

} // namespace wgan2d
