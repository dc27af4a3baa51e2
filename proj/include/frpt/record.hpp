#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "frpt/tensor.hpp"

namespace frpt {

template <typename T>
class Record;

// Handle to a value produced inside a Record.
template <typename T>
struct Var {
    Record<T>* record = nullptr;
    std::size_t id = 0;

    const Shape& shape() const { return record->shape(id); }
    std::span<const T> value() const { return record->value(id); }
    std::size_t size() const { return value().size(); }
    T item() const;
};

// Eager computation record (tape). Operations append nodes in execution
// order, so node order is already topological. A record supports exactly one
// adjoint sweep.
//
// Leaves reference caller-owned tensors. Learnable leaves (requires_grad)
// receive their adjoint on deposit(); frozen leaves never do, though adjoints
// still flow through the operations that consume them.
template <typename T>
class Record {
   public:
    using Backward = std::function<void(Record&, std::size_t self)>;

    Record() = default;
    Record(const Record&) = delete;
    Record& operator=(const Record&) = delete;

    // The tensor must outlive the record and must not be mutated while the
    // record is alive.
    Var<T> leaf(Tensor<T>& tensor);
    Var<T> leaf(const Tensor<T>& tensor);  // always frozen
    Var<T> constant(Tensor<T> tensor);
    Var<T> constant(Shape shape, std::vector<T> value);

    // Appends an operation result. `backward` reads this node's adjoint and
    // accumulates into the adjoints of inputs that need grad. It is dropped
    // when no input needs grad.
    Var<T> emit(Shape shape, std::vector<T> value, std::initializer_list<Var<T>> inputs,
                Backward backward);

    const Shape& shape(std::size_t id) const { return nodes_.at(id).shape; }
    std::span<const T> value(std::size_t id) const;
    bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
    bool needs_grad(Var<T> v) const { return needs_grad(v.id); }

    // Adjoint buffer of a node, zero-allocated on first access.
    std::span<T> adjoint(std::size_t id);
    std::span<T> adjoint(Var<T> v) { return adjoint(v.id); }
    // Empty span when nothing has reached the node.
    std::span<const T> adjoint_view(std::size_t id) const { return nodes_.at(id).adjoint; }

    // Reverse sweep from a scalar. Does not touch any tensor.
    void propagate(Var<T> loss);
    // Adds leaf adjoints into learnable tensors' grad storage. Learnable leaves
    // not reached by the sweep receive zeros.
    void deposit();
    void backward(Var<T> loss) {
        propagate(loss);
        deposit();
    }
    bool propagated() const noexcept { return propagated_; }

    // Ops with piecewise definitions (relu, floor in bilinear sampling, clamps)
    // mix their branch decisions in here. Two evaluations with equal signatures
    // took the same smooth branch everywhere.
    void note_branch(std::uint64_t bits) noexcept {
        signature_ ^= bits + 0x9e3779b97f4a7c15ULL + (signature_ << 6) + (signature_ >> 2);
    }
    std::uint64_t branch_signature() const noexcept { return signature_; }

    std::size_t size() const noexcept { return nodes_.size(); }

    void check_owns(Var<T> v) const;

   private:
    struct Node {
        Shape shape;
        std::vector<T> value;
        const Tensor<T>* external = nullptr;
        Tensor<T>* sink = nullptr;
        bool needs_grad = false;
        std::vector<T> adjoint;
        Backward backward;
    };

    std::deque<Node> nodes_;
    bool propagated_ = false;
    bool deposited_ = false;
    std::uint64_t signature_ = 0;
};

template <typename T>
T Var<T>::item() const {
    auto v = value();
    if (v.size() != 1) throw ShapeError("item() on non-scalar of shape " + to_string(shape()));
    return v[0];
}

extern template class Record<float>;
extern template class Record<double>;

}  // namespace frpt
