#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frpt/error.hpp"

namespace frpt {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major array of rank 1..4. A tensor is a plain value; gradient
// storage only exists once a backward pass deposits into a learnable tensor.
template <typename T>
class Tensor {
   public:
    using value_type = T;

    Tensor() : Tensor(Shape{1}) {}
    explicit Tensor(Shape shape, T fill = T(0));
    Tensor(Shape shape, std::vector<T> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    bool requires_grad() const noexcept { return requires_grad_; }
    Tensor& set_requires_grad(bool on);

    bool has_grad() const noexcept { return grad_.has_value(); }
    std::span<T> grad();
    std::span<const T> grad() const;
    void zero_grad();
    void clear_grad() noexcept { grad_.reset(); }
    // Adds `delta` into grad storage, allocating it on first use. Only valid
    // for tensors that require grad.
    void accumulate_grad(std::span<const T> delta);

    void fill(T value);
    void reshape(Shape shape);

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        Tensor<U> t(shape_, std::move(out));
        t.set_requires_grad(requires_grad_);
        return t;
    }

   private:
    Shape shape_;
    std::vector<T> data_;
    bool requires_grad_ = false;
    std::optional<std::vector<T>> grad_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace frpt
