#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdrn {

/// Dense n-dimensional array, row-major. Single precision for training,
/// double for gradient checks; pick via the template parameter.
template <typename S>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<S> values;

    Tensor() = default;

    explicit Tensor(std::vector<int64_t> shape_, S fill = S{0})
        : shape(std::move(shape_)) {
        for (int64_t d : shape)
            if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dimension");
        values.assign(static_cast<size_t>(numel_of(shape)), fill);
    }

    Tensor(std::vector<int64_t> shape_, std::vector<S> values_)
        : shape(std::move(shape_)), values(std::move(values_)) {
        if (numel_of(shape) != static_cast<int64_t>(values.size()))
            throw std::invalid_argument("Tensor: shape/value length mismatch");
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        return std::accumulate(s.begin(), s.end(), int64_t{1}, std::multiplies<>());
    }

    int64_t numel() const { return static_cast<int64_t>(values.size()); }
    int64_t dim(size_t i) const { return shape.at(i); }
    size_t rank() const { return shape.size(); }

    S* data() { return values.data(); }
    const S* data() const { return values.data(); }

    S& operator[](int64_t i) { return values[static_cast<size_t>(i)]; }
    const S& operator[](int64_t i) const { return values[static_cast<size_t>(i)]; }

    // [B,C,L] indexing for the 1-d conv stack.
    S& at3(int64_t b, int64_t c, int64_t l) {
        return values[static_cast<size_t>((b * shape[1] + c) * shape[2] + l)];
    }
    const S& at3(int64_t b, int64_t c, int64_t l) const {
        return values[static_cast<size_t>((b * shape[1] + c) * shape[2] + l)];
    }

    S& at2(int64_t r, int64_t c) {
        return values[static_cast<size_t>(r * shape[1] + c)];
    }
    const S& at2(int64_t r, int64_t c) const {
        return values[static_cast<size_t>(r * shape[1] + c)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (S v : values)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill(S v) { std::fill(values.begin(), values.end(), v); }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.values.resize(values.size());
        for (size_t i = 0; i < values.size(); ++i)
            out.values[i] = static_cast<T>(values[i]);
        return out;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }
};

template <typename S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

template <typename S>
void require_finite(const Tensor<S>& t, const char* what) {
    if (!t.all_finite())
        throw std::runtime_error(std::string(what) + ": non-finite values");
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace bdrn
