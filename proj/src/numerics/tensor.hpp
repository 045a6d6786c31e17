#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace hsie::nn {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

/// Dense row-major array. Images are channels-first [C,H,W]; vectors are [L].
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
        for (int d : shape_) require(d >= 0, "tensor extents must be non-negative");
    }
    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        require(data_.size() == shape_numel(shape_),
                "tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
    }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // [C,H,W] accessors.
    int channels() const { return dim(0); }
    int height() const { return dim(1); }
    int width() const { return dim(2); }
    std::size_t plane() const { return static_cast<std::size_t>(dim(1)) * static_cast<std::size_t>(dim(2)); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> span() { return data_; }
    std::span<const T> span() const { return data_; }
    std::vector<T>& vec() & { return data_; }
    const std::vector<T>& vec() const& { return data_; }
    // By value on temporaries, so `for (x : f().vec())` does not dangle.
    std::vector<T> vec() && { return std::move(data_); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    T& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * dim(1) + y) * dim(2) + x]; }
    const T& at(int c, int y, int x) const { return data_[(static_cast<std::size_t>(c) * dim(1) + y) * dim(2) + x]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    template <typename U>
    Tensor<U> cast() const {
        if (shape_.empty() && data_.empty()) return {};
        return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

template <typename T>
void require_shape(const Tensor<T>& t, const Shape& expected, const std::string& what) {
    if (t.shape() != expected)
        throw ValidationError(what + ": expected shape " + shape_str(expected) + ", got " + shape_str(t.shape()));
}

template <typename T>
void require_rank(const Tensor<T>& t, int rank, const std::string& what) {
    if (t.rank() != rank)
        throw ValidationError(what + ": expected rank " + std::to_string(rank) + ", got shape " + shape_str(t.shape()));
}

}  // namespace hsie::nn
