#include "frpt/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace frpt {

std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace {

void check_rank(const Shape& shape) {
    if (shape.empty() || shape.size() > 4) {
        throw ShapeError("tensor rank must be 1..4, got shape " + to_string(shape));
    }
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
    check_rank(shape_);
    data_.assign(numel(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_rank(shape_);
    if (numel(shape_) != data_.size()) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
    }
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
    requires_grad_ = on;
    if (!on) grad_.reset();
    return *this;
}

template <typename T>
std::span<T> Tensor<T>::grad() {
    if (!grad_) throw Error("tensor has no gradient storage");
    return *grad_;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
    if (!grad_) throw Error("tensor has no gradient storage");
    return *grad_;
}

template <typename T>
void Tensor<T>::zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), T(0));
}

template <typename T>
void Tensor<T>::accumulate_grad(std::span<const T> delta) {
    if (!requires_grad_) throw Error("cannot accumulate gradient into a frozen tensor");
    if (delta.size() != data_.size()) throw ShapeError("gradient length does not match tensor");
    if (!grad_) grad_.emplace(data_.size(), T(0));
    auto& g = *grad_;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

template <typename T>
void Tensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
    check_rank(shape);
    if (numel(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    shape_ = std::move(shape);
    if (grad_) grad_->resize(data_.size());
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace frpt
