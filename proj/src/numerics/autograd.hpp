#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "numerics/tensor.hpp"

namespace hsie::nn {

/// One value in a recorded computation. Nodes that do not depend on any
/// trainable leaf keep no parents and no backward closure, so inference graphs
/// free intermediates as soon as they go out of scope.
template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    Tensor<T>& grad_buffer() {
        if (grad.empty() && !value.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

/// Builds a result node. The backward closure is kept only if some parent needs gradients.
template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    for (const auto& p : parents) {
        if (p && p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward = std::move(backward);
    }
    return n;
}

/// Reverse pass from a scalar root. Nodes are visited in reverse topological order,
/// which is fixed by the order the graph was built, so accumulation order is deterministic.
template <typename T>
void backward(const Var<T>& root, const Tensor<T>* seed = nullptr) {
    require(root != nullptr, "backward: null root");
    if (seed)
        require(seed->shape() == root->value.shape(), "backward: seed shape does not match root");
    else
        require(root->value.size() == 1, "backward: root must be a scalar");
    if (!root->requires_grad) return;

    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    // Iterative post-order DFS.
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p && p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    if (seed)
        root->grad = *seed;
    else
        root->grad_buffer()[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

}  // namespace hsie::nn
