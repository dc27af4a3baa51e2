#include "frpt/record.hpp"

#include <algorithm>

namespace frpt {

template <typename T>
Var<T> Record<T>::leaf(Tensor<T>& tensor) {
    Node n;
    n.shape = tensor.shape();
    n.external = &tensor;
    if (tensor.requires_grad()) {
        n.sink = &tensor;
        n.needs_grad = true;
    }
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Record<T>::leaf(const Tensor<T>& tensor) {
    Node n;
    n.shape = tensor.shape();
    n.external = &tensor;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Record<T>::constant(Tensor<T> tensor) {
    Node n;
    n.shape = tensor.shape();
    n.value.assign(tensor.data().begin(), tensor.data().end());
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Record<T>::constant(Shape shape, std::vector<T> value) {
    return constant(Tensor<T>(std::move(shape), std::move(value)));
}

template <typename T>
Var<T> Record<T>::emit(Shape shape, std::vector<T> value, std::initializer_list<Var<T>> inputs,
                       Backward backward) {
    if (propagated_) throw RecordError("cannot extend a record after its backward pass");
    if (numel(shape) != value.size()) {
        throw ShapeError("emitted value does not match shape " + to_string(shape));
    }
    bool needs = false;
    for (const auto& in : inputs) {
        check_owns(in);
        needs = needs || nodes_[in.id].needs_grad;
    }
    Node n;
    n.shape = std::move(shape);
    n.value = std::move(value);
    n.needs_grad = needs;
    if (needs) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

template <typename T>
std::span<const T> Record<T>::value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (n.external) return n.external->data();
    return n.value;
}

template <typename T>
std::span<T> Record<T>::adjoint(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.adjoint.empty()) n.adjoint.assign(numel(n.shape), T(0));
    return n.adjoint;
}

template <typename T>
void Record<T>::propagate(Var<T> loss) {
    check_owns(loss);
    if (propagated_) throw RecordError("backward already ran on this record");
    if (numel(nodes_[loss.id].shape) != 1) {
        throw ShapeError("backward needs a scalar loss, got shape " + to_string(nodes_[loss.id].shape));
    }
    propagated_ = true;
    if (!nodes_[loss.id].needs_grad) return;
    adjoint(loss.id)[0] = T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.adjoint.empty() || !n.backward) continue;
        n.backward(*this, i);
    }
}

template <typename T>
void Record<T>::deposit() {
    if (!propagated_) throw RecordError("deposit() before propagate()");
    if (deposited_) throw RecordError("gradients already deposited from this record");
    deposited_ = true;
    for (auto& n : nodes_) {
        if (!n.sink) continue;
        if (n.adjoint.empty()) n.adjoint.assign(numel(n.shape), T(0));
        n.sink->accumulate_grad(n.adjoint);
    }
}

template <typename T>
void Record<T>::check_owns(Var<T> v) const {
    if (v.record != this || v.id >= nodes_.size()) {
        throw RecordError("variable does not belong to this record");
    }
}

template class Record<float>;
template class Record<double>;

}  // namespace frpt
