#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgan2d/tensor.hpp"

namespace wgan2d {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
    kInput,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kMatMul,
    kTranspose,
    kRelu,
    kTanh,
    kSquare,
    kSqrt,
    kSum,
    kMean,
    kMaxScalar,
    kBroadcast,
    kSliceRows,
    kPadRows,
    kReshape,
};

inline const char* op_name(Op op)
{
    switch (op) {
    case Op::kInput: return "input";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kRelu: return "relu";
    case Op::kTanh: return "tanh";
    case Op::kSquare: return "square";
    case Op::kSqrt: return "sqrt";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kMaxScalar: return "max_with_scalar";
    case Op::kBroadcast: return "broadcast";
    case Op::kSliceRows: return "slice_rows";
    case Op::kPadRows: return "pad_rows";
    case Op::kReshape: return "reshape";
    }
    return "?";
}

/// One entry of the computation graph. Values are computed eagerly at node
/// creation, so a node's tensor is always consistent with re-evaluating its op
/// over its parents' values, and the first non-finite intermediate is caught
/// at the node that produced it.
struct Node {
    Op op = Op::kInput;
    std::array<NodeId, 2> parents{-1, -1};
    int arity = 0;
    double scalar_arg = 0.0;       // max_with_scalar threshold
    std::size_t aux0 = 0, aux1 = 0; // slice range / pad layout
    Tensor value;
};

/// Append-only tape of eagerly evaluated nodes. Node ids are dense indices in
/// creation order, so parents always precede children and a single reverse
/// sweep visits the graph in a valid topological order.
///
/// The backward pass comes in two flavors (see gradient()): one emits the
/// adjoint computation as new nodes on the same tape, which makes gradients
/// differentiable again (gradients of gradient norms need this); the other
/// just folds adjoint values and is the cheap path for ordinary parameter
/// gradients.
///
/// A tape is single-writer. Concurrent reads of a frozen tape are safe, and
/// independent tapes can live on independent threads.
class Tape {
public:
    std::size_t size() const { return nodes_.size(); }

    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

    const Tensor& value(NodeId id) const { return node(id).value; }

    /// Leaf holding caller data. Rejects non-finite input.
    NodeId input(Tensor value)
    {
        value.require_finite("input");
        return push(Op::kInput, {-1, -1}, 0, std::move(value));
    }

    /// Leaf holding internal literals (masks, ones, penalty coefficients).
    /// Same mechanics as input(); the distinct name keeps call sites honest.
    NodeId constant(Tensor value)
    {
        value.require_finite("constant");
        return push(Op::kInput, {-1, -1}, 0, std::move(value));
    }

    NodeId constant(double v) { return constant(Tensor::scalar(v)); }

    NodeId add(NodeId a, NodeId b)
    {
        return push(Op::kAdd, {a, b}, 2, tensor_math::add(value(a), value(b)));
    }

    NodeId sub(NodeId a, NodeId b)
    {
        return push(Op::kSub, {a, b}, 2, tensor_math::sub(value(a), value(b)));
    }

    NodeId mul(NodeId a, NodeId b)
    {
        return push(Op::kMul, {a, b}, 2, tensor_math::mul(value(a), value(b)));
    }

    NodeId div(NodeId a, NodeId b)
    {
        return push(Op::kDiv, {a, b}, 2, tensor_math::div(value(a), value(b)));
    }

    NodeId matmul(NodeId a, NodeId b)
    {
        return push(Op::kMatMul, {a, b}, 2, tensor_math::matmul(value(a), value(b)));
    }

    NodeId transpose(NodeId a)
    {
        return push(Op::kTranspose, {a, -1}, 1, tensor_math::transpose(value(a)));
    }

    NodeId relu(NodeId a) { return push(Op::kRelu, {a, -1}, 1, tensor_math::relu(value(a))); }

    NodeId tanh(NodeId a) { return push(Op::kTanh, {a, -1}, 1, tensor_math::tanh(value(a))); }

    NodeId square(NodeId a)
    {
        return push(Op::kSquare, {a, -1}, 1, tensor_math::square(value(a)));
    }

    NodeId sqrt(NodeId a) { return push(Op::kSqrt, {a, -1}, 1, tensor_math::sqrt(value(a))); }

    NodeId sum(NodeId a)
    {
        return push(Op::kSum, {a, -1}, 1, Tensor::scalar(tensor_math::sum(value(a))));
    }

    NodeId mean(NodeId a)
    {
        return push(Op::kMean, {a, -1}, 1, Tensor::scalar(tensor_math::mean(value(a))));
    }

    NodeId max_with_scalar(NodeId a, double c)
    {
        return push(Op::kMaxScalar, {a, -1}, 1, tensor_math::max_scalar(value(a), c), c);
    }

    NodeId broadcast(NodeId scalar, const Shape& shape)
    {
        if (!value(scalar).is_scalar())
            throw ShapeError("broadcast: operand must be scalar, got "
                             + shape_str(value(scalar).shape()));
        return push(Op::kBroadcast, {scalar, -1}, 1,
                    tensor_math::broadcast_scalar(value(scalar)[0], shape));
    }

    NodeId slice_rows(NodeId a, std::size_t r0, std::size_t r1)
    {
        NodeId id = push(Op::kSliceRows, {a, -1}, 1, tensor_math::slice_rows(value(a), r0, r1));
        nodes_.back().aux0 = r0;
        nodes_.back().aux1 = r1;
        return id;
    }

    NodeId pad_rows(NodeId a, std::size_t total_rows, std::size_t offset)
    {
        NodeId id =
            push(Op::kPadRows, {a, -1}, 1, tensor_math::pad_rows(value(a), total_rows, offset));
        nodes_.back().aux0 = total_rows;
        nodes_.back().aux1 = offset;
        return id;
    }

    NodeId reshape(NodeId a, Shape shape)
    {
        return push(Op::kReshape, {a, -1}, 1, value(a).reshaped(std::move(shape)));
    }

    /// Reverse-mode gradients of a scalar output with respect to `wrt` nodes.
    ///
    /// With create_graph the adjoint computation is emitted as new nodes on
    /// this tape, so the returned gradients can be differentiated again (this
    /// is what makes gradient-norm penalties trainable). Without it, adjoints
    /// are folded as plain tensors and the results come back wrapped as
    /// constant leaves.
    ///
    /// A wrt node that cannot reach the output gets a gradient of exact zeros.
    std::vector<NodeId> gradient(NodeId output, const std::vector<NodeId>& wrt, bool create_graph)
    {
        if (create_graph)
            return gradient_recording(output, wrt);
        std::vector<Tensor> values = gradient_values(output, wrt);
        std::vector<NodeId> out;
        out.reserve(values.size());
        for (Tensor& g : values)
            out.push_back(constant(std::move(g)));
        return out;
    }

    /// Non-recording backward pass; returns adjoint tensors directly.
    std::vector<Tensor> gradient_values(NodeId output, const std::vector<NodeId>& wrt)
    {
        const auto needed = mark_needed(output, wrt);
        std::vector<std::optional<Tensor>> adj(static_cast<std::size_t>(output) + 1);
        adj[static_cast<std::size_t>(output)] = Tensor::full(value(output).shape(), 1.0);

        for (NodeId id = output; id >= 0; --id) {
            const std::size_t ui = static_cast<std::size_t>(id);
            if (!needed[ui] || !adj[ui].has_value())
                continue;
            const Node& n = nodes_[ui];
            const Tensor& g = *adj[ui];
            for (int slot = 0; slot < n.arity; ++slot) {
                const NodeId p = n.parents[static_cast<std::size_t>(slot)];
                if (!needed[static_cast<std::size_t>(p)])
                    continue;
                Tensor contrib = vjp_value(n, g, slot);
                auto& acc = adj[static_cast<std::size_t>(p)];
                if (acc.has_value())
                    acc = tensor_math::add(*acc, contrib);
                else
                    acc = std::move(contrib);
            }
        }

        std::vector<Tensor> out;
        out.reserve(wrt.size());
        for (NodeId w : wrt) {
            const std::size_t uw = static_cast<std::size_t>(w);
            if (uw < adj.size() && adj[uw].has_value())
                out.push_back(*adj[uw]);
            else
                out.push_back(Tensor::zeros(value(w).shape()));
        }
        return out;
    }

private:
    NodeId push(Op op, std::array<NodeId, 2> parents, int arity, Tensor value,
                double scalar_arg = 0.0)
    {
        for (int i = 0; i < arity; ++i)
            if (parents[static_cast<std::size_t>(i)] < 0
                || static_cast<std::size_t>(parents[static_cast<std::size_t>(i)]) >= nodes_.size())
                throw Error(std::string(op_name(op)) + ": operand is not on this tape");
        if (!value.all_finite())
            throw NumericError(std::string(op_name(op)) + " produced non-finite values");
        Node n;
        n.op = op;
        n.parents = parents;
        n.arity = arity;
        n.scalar_arg = scalar_arg;
        n.value = std::move(value);
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    void require_scalar_output(NodeId output) const
    {
        if (!value(output).is_scalar())
            throw ShapeError("gradient: output must be scalar-valued, got "
                             + shape_str(value(output).shape()));
    }

    /// needed = (can reach output) AND (reachable from some wrt node).
    /// Adjoints are only propagated through needed nodes; everything else is
    /// dead weight for the requested gradients.
    std::vector<char> mark_needed(NodeId output, const std::vector<NodeId>& wrt) const
    {
        require_scalar_output(output);
        const std::size_t limit = static_cast<std::size_t>(output) + 1;
        std::vector<char> reaches_output(limit, 0), from_wrt(limit, 0);
        reaches_output[static_cast<std::size_t>(output)] = 1;
        for (NodeId id = output; id >= 0; --id) {
            if (!reaches_output[static_cast<std::size_t>(id)])
                continue;
            const Node& n = nodes_[static_cast<std::size_t>(id)];
            for (int i = 0; i < n.arity; ++i)
                reaches_output[static_cast<std::size_t>(n.parents[static_cast<std::size_t>(i)])] = 1;
        }
        for (NodeId w : wrt) {
            if (w < 0 || static_cast<std::size_t>(w) >= nodes_.size())
                throw Error("gradient: wrt node is not on this tape");
            if (static_cast<std::size_t>(w) < limit)
                from_wrt[static_cast<std::size_t>(w)] = 1;
        }
        for (std::size_t id = 0; id < limit; ++id) {
            if (from_wrt[id])
                continue;
            const Node& n = nodes_[id];
            for (int i = 0; i < n.arity; ++i)
                if (from_wrt[static_cast<std::size_t>(n.parents[static_cast<std::size_t>(i)])]) {
                    from_wrt[id] = 1;
                    break;
                }
        }
        std::vector<char> needed(limit, 0);
        for (std::size_t id = 0; id < limit; ++id)
            needed[id] = reaches_output[id] && from_wrt[id];
        return needed;
    }

    /// Adjoint contribution of `n` to parent `slot`, as a plain tensor.
    Tensor vjp_value(const Node& n, const Tensor& g, int slot) const
    {
        namespace tm = tensor_math;
        const auto pval = [&](int s) { return value(n.parents[static_cast<std::size_t>(s)]); };
        switch (n.op) {
        case Op::kAdd:
            return tm::reduce_to_shape(g, pval(slot).shape());
        case Op::kSub:
            return slot == 0 ? tm::reduce_to_shape(g, pval(0).shape())
                             : tm::reduce_to_shape(tm::scale(g, -1.0), pval(1).shape());
        case Op::kMul:
            return tm::reduce_to_shape(tm::mul(g, pval(1 - slot)), pval(slot).shape());
        case Op::kDiv:
            if (slot == 0)
                return tm::reduce_to_shape(tm::div(g, pval(1)), pval(0).shape());
            return tm::reduce_to_shape(
                tm::scale(tm::div(tm::mul(g, n.value), pval(1)), -1.0), pval(1).shape());
        case Op::kMatMul:
            return slot == 0 ? tm::matmul(g, tm::transpose(pval(1)))
                             : tm::matmul(tm::transpose(pval(0)), g);
        case Op::kTranspose:
            return tm::transpose(g);
        case Op::kRelu:
            return tm::mul(g, tm::relu_mask(pval(0)));
        case Op::kTanh:
            return tm::mul(g, tm::map(n.value, [](double y) { return 1.0 - y * y; }));
        case Op::kSquare:
            return tm::mul(g, tm::scale(pval(0), 2.0));
        case Op::kSqrt:
            return tm::mul(g, tm::map(n.value, [](double y) { return 0.5 / y; }));
        case Op::kSum:
            return tm::broadcast_scalar(g[0], pval(0).shape());
        case Op::kMean:
            return tm::broadcast_scalar(g[0] / static_cast<double>(pval(0).numel()),
                                        pval(0).shape());
        case Op::kMaxScalar:
            return tm::mul(g, tm::gt_mask(pval(0), n.scalar_arg));
        case Op::kBroadcast: {
            Tensor out(pval(0).shape());
            out[0] = tm::sum(g);
            return out;
        }
        case Op::kSliceRows:
            return tm::pad_rows(g, pval(0).rows(), n.aux0);
        case Op::kPadRows:
            return tm::slice_rows(g, n.aux1, n.aux1 + pval(0).rows());
        case Op::kReshape:
            return g.reshaped(pval(0).shape());
        case Op::kInput:
            break;
        }
        throw Error("vjp: leaf node has no parents");
    }

    /// Adjoint contribution of `n` to parent `slot`, emitted as nodes.
    /// Header fields are copied out first: emission can reallocate nodes_,
    /// so no reference into it may be held across a builder call.
    NodeId vjp_node(NodeId nid, NodeId g, int slot)
    {
        struct {
            Op op;
            std::array<NodeId, 2> parents;
            double scalar_arg;
            std::size_t aux0, aux1;
        } n{node(nid).op, node(nid).parents, node(nid).scalar_arg, node(nid).aux0,
            node(nid).aux1};
        const NodeId p = n.parents[static_cast<std::size_t>(slot)];
        const Shape pshape = value(p).shape();
        const auto reduce = [&](NodeId contrib) {
            if (value(contrib).shape() == pshape)
                return contrib;
            if (shape_numel(pshape) == 1 && !value(contrib).is_scalar())
                return reshape(sum(contrib), pshape);
            return reshape(contrib, pshape);
        };
        switch (n.op) {
        case Op::kAdd:
            return reduce(g);
        case Op::kSub:
            return slot == 0 ? reduce(g) : reduce(mul(g, constant(-1.0)));
        case Op::kMul:
            return reduce(mul(g, n.parents[static_cast<std::size_t>(1 - slot)]));
        case Op::kDiv:
            if (slot == 0)
                return reduce(div(g, n.parents[1]));
            return reduce(mul(div(mul(g, nid), n.parents[1]), constant(-1.0)));
        case Op::kMatMul:
            return slot == 0 ? matmul(g, transpose(n.parents[1]))
                             : matmul(transpose(n.parents[0]), g);
        case Op::kTranspose:
            return transpose(g);
        case Op::kRelu:
            // relu'' is 0 almost everywhere, so the mask enters as a constant.
            return mul(g, constant(tensor_math::relu_mask(value(n.parents[0]))));
        case Op::kTanh:
            return mul(g, sub(constant(1.0), square(nid)));
        case Op::kSquare:
            return mul(g, mul(n.parents[0], constant(2.0)));
        case Op::kSqrt:
            return div(mul(g, constant(0.5)), nid);
        case Op::kSum:
            return broadcast(g, pshape);
        case Op::kMean:
            return broadcast(mul(g, constant(1.0 / static_cast<double>(value(n.parents[0]).numel()))),
                             pshape);
        case Op::kMaxScalar:
            return mul(g, constant(tensor_math::gt_mask(value(n.parents[0]), n.scalar_arg)));
        case Op::kBroadcast:
            return reshape(sum(g), pshape);
        case Op::kSliceRows:
            return pad_rows(g, value(n.parents[0]).rows(), n.aux0);
        case Op::kPadRows:
            return slice_rows(g, n.aux1, n.aux1 + value(n.parents[0]).rows());
        case Op::kReshape:
            return reshape(g, pshape);
        case Op::kInput:
            break;
        }
        throw Error("vjp: leaf node has no parents");
    }

    std::vector<NodeId> gradient_recording(NodeId output, const std::vector<NodeId>& wrt)
    {
        const auto needed = mark_needed(output, wrt);
        std::vector<NodeId> adj(static_cast<std::size_t>(output) + 1, -1);
        adj[static_cast<std::size_t>(output)] = constant(Tensor::full(value(output).shape(), 1.0));

        for (NodeId id = output; id >= 0; --id) {
            const std::size_t ui = static_cast<std::size_t>(id);
            if (!needed[ui] || adj[ui] < 0)
                continue;
            const int arity = nodes_[ui].arity;
            for (int slot = 0; slot < arity; ++slot) {
                const NodeId p = nodes_[ui].parents[static_cast<std::size_t>(slot)];
                if (!needed[static_cast<std::size_t>(p)])
                    continue;
                const NodeId contrib = vjp_node(id, adj[ui], slot);
                NodeId& acc = adj[static_cast<std::size_t>(p)];
                acc = acc < 0 ? contrib : add(acc, contrib);
            }
        }

        std::vector<NodeId> out;
        out.reserve(wrt.size());
        for (NodeId w : wrt) {
            const NodeId a = static_cast<std::size_t>(w) < adj.size()
                                 ? adj[static_cast<std::size_t>(w)]
                                 : -1;
            out.push_back(a >= 0 ? a : constant(Tensor::zeros(value(w).shape())));
        }
        return out;
    }

    std::vector<Node> nodes_;
};

/// Row-wise Euclidean norm of an [n, d] node as an [n, 1] node, built from
/// primitives so it stays differentiable to any order. A small epsilon under
/// the square root smooths out the non-differentiability at the zero vector.
inline NodeId l2norm_rows(Tape& tape, NodeId x, double epsilon = 1e-12)
{
    const Tensor& v = tape.value(x);
    if (v.rank() != 2)
        throw ShapeError("l2norm_rows: expected rank-2 tensor, got " + shape_str(v.shape()));
    const NodeId ones = tape.constant(Tensor::full({v.cols(), 1}, 1.0));
    const NodeId row_sq = tape.matmul(tape.square(x), ones);
    return tape.sqrt(tape.add(row_sq, tape.constant(epsilon)));
}

} // namespace wgan2d
