#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace emocorr {

using Shape = std::vector<int>;

namespace detail {

struct TensorNode {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // sized lazily; persists on leaves until zero_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backprop;  // reads own grad, accumulates into parents

    bool is_leaf() const { return parents.empty(); }
};

}  // namespace detail

// Dense 64-bit float tensor with reverse-mode automatic differentiation.
// Copies share the underlying graph node. A graph and its tensors belong to
// one thread; independent graphs can live on separate threads.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor vector_of(std::vector<double> values, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    int rank() const { return static_cast<int>(shape().size()); }
    int size() const;
    bool requires_grad() const;

    const std::vector<double>& values() const;
    std::vector<double>& values_mut();  // in-place edits; meaningful on leaves
    const std::vector<double>& grad() const;
    bool has_grad() const;
    void zero_grad();

    double item() const;  // size-1 tensors only
    double at(int i) const;
    double at(int i, int j) const;

    // Reverse pass from a scalar loss. Gradients of requires-grad leaves
    // accumulate across calls until zero_grad(); intermediate gradients are
    // recomputed per call.
    void backward() const;

    detail::TensorNode* node() const { return node_.get(); }
    std::shared_ptr<detail::TensorNode> node_ptr() const { return node_; }

    static Tensor wrap(std::shared_ptr<detail::TensorNode> node) { return Tensor(std::move(node)); }

private:
    explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::TensorNode> node_;
};

std::string shape_string(const Shape& s);

// ---- arithmetic ----
// Binary ops need equal shapes or a size-1 operand (scalar broadcast only).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor matmul(const Tensor& a, const Tensor& b);

// Scalar cosine similarity of two same-length tensors (treated flat). The
// value is clamped to [-1, 1] before downstream use; norms below 1e-12 raise.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// ---- reductions ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a, int axis);

// ---- structure ----
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);
Tensor element(const Tensor& a, int index);  // size-1 view of a flat element
Tensor slice_rows(const Tensor& a, int start, int count);
Tensor slice_cols(const Tensor& a, int start, int count);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_scalars(const std::vector<Tensor>& parts);

// ---- NN building blocks ----
Tensor add_row_vector(const Tensor& m, const Tensor& v);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

}  // namespace emocorr
