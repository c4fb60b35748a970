#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgan2d {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf detected where a finite value is required.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

/// Dense row-major tensor of 64-bit floats. Rank is arbitrary but everything
/// in this project is rank 1 or 2; a tensor with a single element acts as a
/// scalar in broadcasting positions.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0)
    {
    }

    Tensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data))
    {
        if (shape_numel(shape_) != data_.size())
            throw ShapeError("tensor data length " + std::to_string(data_.size())
                             + " does not match shape " + shape_str(shape_));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, double v)
    {
        Tensor t(std::move(shape));
        for (double& x : t.data_)
            x = v;
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    std::size_t rows() const
    {
        require_rank2("rows");
        return shape_[0];
    }

    std::size_t cols() const
    {
        require_rank2("cols");
        return shape_[1];
    }

    double& at(std::size_t r, std::size_t c)
    {
        require_rank2("at");
        return data_[r * shape_[1] + c];
    }

    double at(std::size_t r, std::size_t c) const
    {
        require_rank2("at");
        return data_[r * shape_[1] + c];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const
    {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    void require_finite(const std::string& context) const
    {
        if (!all_finite())
            throw NumericError(context + ": tensor contains non-finite values");
    }

    /// Same data, new shape metadata. Element count must be preserved.
    Tensor reshaped(Shape shape) const
    {
        if (shape_numel(shape) != data_.size())
            throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
        return Tensor(std::move(shape), data_);
    }

private:
    void require_rank2(const char* op) const
    {
        if (shape_.size() != 2)
            throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_str(shape_));
    }

    Shape shape_;
    std::vector<double> data_;
};

namespace tensor_math {

    inline void require_same_or_scalar(const Tensor& a, const Tensor& b, const char* op)
    {
        if (a.shape() == b.shape() || a.is_scalar() || b.is_scalar())
            return;
        throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape())
                         + " and " + shape_str(b.shape()));
    }

    /// Elementwise binary op with scalar-vs-tensor broadcast on either side.
    template <typename F>
    Tensor zip(const Tensor& a, const Tensor& b, const char* name, F f)
    {
        require_same_or_scalar(a, b, name);
        if (a.shape() == b.shape()) {
            Tensor out(a.shape());
            for (std::size_t i = 0; i < a.numel(); ++i)
                out[i] = f(a[i], b[i]);
            return out;
        }
        if (a.is_scalar()) {
            Tensor out(b.shape());
            const double av = a[0];
            for (std::size_t i = 0; i < b.numel(); ++i)
                out[i] = f(av, b[i]);
            return out;
        }
        Tensor out(a.shape());
        const double bv = b[0];
        for (std::size_t i = 0; i < a.numel(); ++i)
            out[i] = f(a[i], bv);
        return out;
    }

    template <typename F>
    Tensor map(const Tensor& a, F f)
    {
        Tensor out(a.shape());
        for (std::size_t i = 0; i < a.numel(); ++i)
            out[i] = f(a[i]);
        return out;
    }

    inline Tensor add(const Tensor& a, const Tensor& b)
    {
        return zip(a, b, "add", [](double x, double y) { return x + y; });
    }

    inline Tensor sub(const Tensor& a, const Tensor& b)
    {
        return zip(a, b, "sub", [](double x, double y) { return x - y; });
    }

    inline Tensor mul(const Tensor& a, const Tensor& b)
    {
        return zip(a, b, "mul", [](double x, double y) { return x * y; });
    }

    inline Tensor div(const Tensor& a, const Tensor& b)
    {
        return zip(a, b, "div", [](double x, double y) { return x / y; });
    }

    inline Tensor scale(const Tensor& a, double s)
    {
        return map(a, [s](double x) { return x * s; });
    }

    inline Tensor matmul(const Tensor& a, const Tensor& b)
    {
        if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
            throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and "
                             + shape_str(b.shape()));
        const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
        Tensor out({m, n});
        const double* pa = a.data().data();
        const double* pb = b.data().data();
        double* pc = out.data().data();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double aik = pa[i * k + kk];
                const double* brow = pb + kk * n;
                double* crow = pc + i * n;
                for (std::size_t j = 0; j < n; ++j)
                    crow[j] += aik * brow[j];
            }
        }
        return out;
    }

    inline Tensor transpose(const Tensor& a)
    {
        if (a.rank() != 2)
            throw ShapeError("transpose: expected rank-2 tensor, got " + shape_str(a.shape()));
        Tensor out({a.cols(), a.rows()});
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                out.at(j, i) = a.at(i, j);
        return out;
    }

    inline Tensor relu(const Tensor& a)
    {
        return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
    }

    /// 1 where the entry is strictly positive, else 0 (derivative at the kink is 0).
    inline Tensor relu_mask(const Tensor& a)
    {
        return map(a, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
    }

    inline Tensor tanh(const Tensor& a)
    {
        return map(a, [](double x) { return std::tanh(x); });
    }

    inline Tensor square(const Tensor& a)
    {
        return map(a, [](double x) { return x * x; });
    }

    inline Tensor sqrt(const Tensor& a)
    {
        return map(a, [](double x) { return std::sqrt(x); });
    }

    inline Tensor max_scalar(const Tensor& a, double c)
    {
        return map(a, [c](double x) { return x > c ? x : c; });
    }

    /// 1 where the entry exceeds c strictly, else 0.
    inline Tensor gt_mask(const Tensor& a, double c)
    {
        return map(a, [c](double x) { return x > c ? 1.0 : 0.0; });
    }

    inline double sum(const Tensor& a)
    {
        double s = 0.0;
        for (double v : a.data())
            s += v;
        return s;
    }

    inline double mean(const Tensor& a) { return sum(a) / static_cast<double>(a.numel()); }

    inline Tensor broadcast_scalar(double v, const Shape& shape) { return Tensor::full(shape, v); }

    inline Tensor slice_rows(const Tensor& a, std::size_t r0, std::size_t r1)
    {
        if (a.rank() != 2 || r0 >= r1 || r1 > a.rows())
            throw ShapeError("slice_rows: invalid range [" + std::to_string(r0) + ","
                             + std::to_string(r1) + ") for shape " + shape_str(a.shape()));
        Tensor out({r1 - r0, a.cols()});
        for (std::size_t i = r0; i < r1; ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                out.at(i - r0, j) = a.at(i, j);
        return out;
    }

    inline Tensor pad_rows(const Tensor& a, std::size_t total_rows, std::size_t offset)
    {
        if (a.rank() != 2 || offset + a.rows() > total_rows)
            throw ShapeError("pad_rows: block " + shape_str(a.shape()) + " at offset "
                             + std::to_string(offset) + " does not fit in "
                             + std::to_string(total_rows) + " rows");
        Tensor out({total_rows, a.cols()});
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                out.at(offset + i, j) = a.at(i, j);
        return out;
    }

    /// Sum a gradient contribution down to the shape of the operand it belongs
    /// to. Only needed when that operand was broadcast as a scalar.
    inline Tensor reduce_to_shape(const Tensor& g, const Shape& target)
    {
        if (shape_numel(target) == g.numel())
            return g.shape() == target ? g : g.reshaped(target);
        if (shape_numel(target) == 1) {
            Tensor out(target);
            out[0] = sum(g);
            return out;
        }
        throw ShapeError("reduce_to_shape: cannot reduce " + shape_str(g.shape()) + " to "
                         + shape_str(target));
    }

} // namespace tensor_math

} // namespace wgan2d
