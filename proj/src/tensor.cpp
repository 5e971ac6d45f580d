#include "emocorr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace emocorr {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

int shape_size(const Shape& s) {
    int n = 1;
    for (int d : s) n *= d;
    return n;
}

void check_shape(const Shape& s) {
    if (s.empty()) {
        throw std::invalid_argument("tensor shape must have at least one dimension");
    }
    for (int d : s) {
        if (d <= 0) {
            throw std::invalid_argument("tensor dimensions must be positive, got " + shape_string(s));
        }
    }
}

NodePtr make_node(Shape shape, std::vector<double> values) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    return node;
}

void ensure_grad(TensorNode& n) {
    if (n.grad.size() != n.values.size()) {
        n.grad.assign(n.values.size(), 0.0);
    }
}

const TensorNode& need(const Tensor& t, const char* op) {
    if (!t.defined()) {
        throw std::invalid_argument(std::string(op) + ": undefined tensor");
    }
    return *t.node();
}

// Result node for an op: requires-grad and parent wiring only when some
// input participates in differentiation, so constant subgraphs stay pruned.
Tensor op_result(Shape shape, std::vector<double> values, std::vector<NodePtr> parents,
                 std::function<void(TensorNode&)> backprop) {
    auto node = make_node(std::move(shape), std::move(values));
    bool any = false;
    for (const auto& p : parents) {
        if (p->requires_grad) {
            any = true;
            break;
        }
    }
    if (any) {
        node->requires_grad = true;
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
    }
    return Tensor::wrap(node);
}

enum class Broadcast { none, a_scalar, b_scalar };

Broadcast binary_mode(const TensorNode& a, const TensorNode& b, const char* op) {
    if (a.shape == b.shape) return Broadcast::none;
    if (a.values.size() == 1) return Broadcast::a_scalar;
    if (b.values.size() == 1) return Broadcast::b_scalar;
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a.shape) +
                                " vs " + shape_string(b.shape) + " (equal shapes or scalar broadcast only)");
}

// Accumulate g into the gradient of `p`, summing when p is a broadcast scalar.
void accumulate(TensorNode& p, const std::vector<double>& g, bool p_scalar) {
    if (!p.requires_grad) return;
    ensure_grad(p);
    if (p_scalar && g.size() != 1) {
        double s = 0.0;
        for (double x : g) s += x;
        p.grad[0] += s;
    } else {
        for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
    }
}

template <typename Fwd, typename Bwd>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Bwd bwd) {
    const auto& an = need(a, name);
    const auto& bn = need(b, name);
    const Broadcast mode = binary_mode(an, bn, name);
    const Shape& out_shape = (mode == Broadcast::a_scalar) ? bn.shape : an.shape;
    const std::size_t n = (mode == Broadcast::a_scalar) ? bn.values.size() : an.values.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double av = an.values[mode == Broadcast::a_scalar ? 0 : i];
        const double bv = bn.values[mode == Broadcast::b_scalar ? 0 : i];
        out[i] = fwd(av, bv);
    }
    auto* ap = a.node();
    auto* bp = b.node();
    return op_result(out_shape, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [ap, bp, mode, bwd](TensorNode& self) {
                         const std::size_t n = self.values.size();
                         std::vector<double> ga(n), gb(n);
                         for (std::size_t i = 0; i < n; ++i) {
                             const double av = ap->values[mode == Broadcast::a_scalar ? 0 : i];
                             const double bv = bp->values[mode == Broadcast::b_scalar ? 0 : i];
                             const double g = self.grad[i];
                             double da, db;
                             bwd(av, bv, g, self.values[i], da, db);
                             ga[i] = da;
                             gb[i] = db;
                         }
                         accumulate(*ap, ga, mode == Broadcast::a_scalar);
                         accumulate(*bp, gb, mode == Broadcast::b_scalar);
                     });
}

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& a, const char* name, Fwd fwd, Bwd bwd) {
    const auto& an = need(a, name);
    std::vector<double> out(an.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(an.values[i]);
    auto* ap = a.node();
    return op_result(an.shape, std::move(out), {a.node_ptr()}, [ap, bwd](TensorNode& self) {
        ensure_grad(*ap);
        for (std::size_t i = 0; i < self.values.size(); ++i) {
            ap->grad[i] += bwd(ap->values[i], self.values[i]) * self.grad[i];
        }
    });
}

}  // namespace

std::string shape_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// ---- Tensor ----

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    check_shape(shape);
    const int n = shape_size(shape);
    auto node = make_node(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (static_cast<int>(values.size()) != shape_size(shape)) {
        throw std::invalid_argument("from_values: " + std::to_string(values.size()) +
                                    " values do not fill shape " + shape_string(shape));
    }
    auto node = make_node(std::move(shape), std::move(values));
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values({1}, {value}, requires_grad);
}

Tensor Tensor::vector_of(std::vector<double> values, bool requires_grad) {
    const int n = static_cast<int>(values.size());
    return from_values({n}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return need(*this, "shape").shape; }

int Tensor::size() const { return static_cast<int>(need(*this, "size").values.size()); }

bool Tensor::requires_grad() const { return need(*this, "requires_grad").requires_grad; }

const std::vector<double>& Tensor::values() const { return need(*this, "values").values; }

std::vector<double>& Tensor::values_mut() {
    if (!node_) throw std::invalid_argument("values_mut: undefined tensor");
    return node_->values;
}

const std::vector<double>& Tensor::grad() const {
    const auto& n = need(*this, "grad");
    if (n.grad.size() != n.values.size()) {
        throw std::runtime_error("grad: gradient not populated; call backward() first");
    }
    return n.grad;
}

bool Tensor::has_grad() const {
    const auto& n = need(*this, "has_grad");
    return n.grad.size() == n.values.size();
}

void Tensor::zero_grad() {
    need(*this, "zero_grad");
    node_->grad.assign(node_->values.size(), 0.0);
}

double Tensor::item() const {
    const auto& n = need(*this, "item");
    if (n.values.size() != 1) {
        throw std::invalid_argument("item: tensor of shape " + shape_string(n.shape) + " is not scalar");
    }
    return n.values[0];
}

double Tensor::at(int i) const {
    const auto& n = need(*this, "at");
    if (i < 0 || i >= static_cast<int>(n.values.size())) {
        throw std::out_of_range("at: index " + std::to_string(i) + " out of range");
    }
    return n.values[static_cast<std::size_t>(i)];
}

double Tensor::at(int i, int j) const {
    const auto& n = need(*this, "at");
    if (n.shape.size() != 2) {
        throw std::invalid_argument("at(i,j): tensor rank is not 2");
    }
    if (i < 0 || i >= n.shape[0] || j < 0 || j >= n.shape[1]) {
        throw std::out_of_range("at: index out of range");
    }
    return n.values[static_cast<std::size_t>(i) * n.shape[1] + j];
}

void Tensor::backward() const {
    const auto& root = need(*this, "backward");
    if (root.values.size() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " + shape_string(root.shape));
    }
    if (!root.requires_grad) {
        return;  // nothing differentiable upstream
    }

    // Iterative post-order DFS over the requires-grad subgraph.
    std::vector<TensorNode*> topo;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({node_.get(), 0});
    visited.insert(node_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorNode* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            topo.push_back(f.node);
            stack.pop_back();
        }
    }

    // Interior gradients are per-call scratch; leaf gradients accumulate
    // across calls until zero_grad().
    for (TensorNode* n : topo) {
        if (!n->is_leaf()) {
            n->grad.assign(n->values.size(), 0.0);
        } else {
            ensure_grad(*n);
        }
    }
    ensure_grad(*node_);
    node_->grad[0] += 1.0;

    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backprop) {
            (*it)->backprop(**it);
        }
    }
}

// ---- arithmetic ----

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double, double, double g, double, double& da, double& db) {
            da = g;
            db = g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double, double, double g, double, double& da, double& db) {
            da = g;
            db = -g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double x, double y, double g, double, double& da, double& db) {
            da = g * y;
            db = g * x;
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double x, double y, double g, double, double& da, double& db) {
            da = g / y;
            db = -g * x / (y * y);
        });
}

Tensor neg(const Tensor& a) {
    return unary_op(
        a, "neg", [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor exp(const Tensor& a) {
    return unary_op(
        a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary_op(
        a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(
        a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary_op(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor gelu(const Tensor& a) {
    constexpr double inv_sqrt_2 = 0.7071067811865476;
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return unary_op(
        a, "gelu",
        [&](double x) { return x * 0.5 * std::erfc(-x * inv_sqrt_2); },
        [&](double x, double) {
            const double cdf = 0.5 * std::erfc(-x * inv_sqrt_2);
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary_op(
        a, "clamp",
        [lo, hi](double x) { return std::min(hi, std::max(lo, x)); },
        [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const auto& an = need(a, "matmul");
    const auto& bn = need(b, "matmul");
    if (an.shape.size() != 2 || bn.shape.size() != 2 || an.shape[1] != bn.shape[0]) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_string(an.shape) + " and " +
                                    shape_string(bn.shape));
    }
    const int m = an.shape[0];
    const int k = an.shape[1];
    const int p = bn.shape[1];
    std::vector<double> out(static_cast<std::size_t>(m) * p, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int kk = 0; kk < k; ++kk) {
            const double av = an.values[static_cast<std::size_t>(i) * k + kk];
            const double* brow = &bn.values[static_cast<std::size_t>(kk) * p];
            double* orow = &out[static_cast<std::size_t>(i) * p];
            for (int j = 0; j < p; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    auto* ap = a.node();
    auto* bp = b.node();
    return op_result({m, p}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [ap, bp, m, k, p](TensorNode& self) {
                         if (ap->requires_grad) {
                             ensure_grad(*ap);
                             // dA = G * B^T
                             for (int i = 0; i < m; ++i) {
                                 for (int j = 0; j < p; ++j) {
                                     const double g = self.grad[static_cast<std::size_t>(i) * p + j];
                                     const double* brow = &bp->values[0];
                                     for (int kk = 0; kk < k; ++kk) {
                                         ap->grad[static_cast<std::size_t>(i) * k + kk] +=
                                             g * brow[static_cast<std::size_t>(kk) * p + j];
                                     }
                                 }
                             }
                         }
                         if (bp->requires_grad) {
                             ensure_grad(*bp);
                             // dB = A^T * G
                             for (int kk = 0; kk < k; ++kk) {
                                 for (int i = 0; i < m; ++i) {
                                     const double av = ap->values[static_cast<std::size_t>(i) * k + kk];
                                     const double* grow = &self.grad[static_cast<std::size_t>(i) * p];
                                     double* brow = &bp->grad[static_cast<std::size_t>(kk) * p];
                                     for (int j = 0; j < p; ++j) {
                                         brow[j] += av * grow[j];
                                     }
                                 }
                             }
                         }
                     });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
    const auto& an = need(a, "cosine_similarity");
    const auto& bn = need(b, "cosine_similarity");
    if (an.values.size() != bn.values.size()) {
        throw std::invalid_argument("cosine_similarity: length mismatch " + shape_string(an.shape) +
                                    " vs " + shape_string(bn.shape));
    }
    constexpr double eps = 1e-12;
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < an.values.size(); ++i) {
        dot += an.values[i] * bn.values[i];
        na2 += an.values[i] * an.values[i];
        nb2 += bn.values[i] * bn.values[i];
    }
    const double na = std::sqrt(na2);
    const double nb = std::sqrt(nb2);
    if (na < eps) {
        throw std::domain_error("cosine_similarity: first vector is degenerate (norm " +
                                std::to_string(na) + " below 1e-12)");
    }
    if (nb < eps) {
        throw std::domain_error("cosine_similarity: second vector is degenerate (norm " +
                                std::to_string(nb) + " below 1e-12)");
    }
    const double raw = dot / (na * nb);
    const double clamped = std::min(1.0, std::max(-1.0, raw));
    auto* ap = a.node();
    auto* bp = b.node();
    return op_result({1}, {clamped}, {a.node_ptr(), b.node_ptr()},
                     [ap, bp, raw, na, nb](TensorNode& self) {
                         const double g = self.grad[0];
                         const double denom = na * nb;
                         if (ap->requires_grad) {
                             ensure_grad(*ap);
                             for (std::size_t i = 0; i < ap->values.size(); ++i) {
                                 ap->grad[i] += g * (bp->values[i] / denom - raw * ap->values[i] / (na * na));
                             }
                         }
                         if (bp->requires_grad) {
                             ensure_grad(*bp);
                             for (std::size_t i = 0; i < bp->values.size(); ++i) {
                                 bp->grad[i] += g * (ap->values[i] / denom - raw * bp->values[i] / (nb * nb));
                             }
                         }
                     });
}

// ---- reductions ----

Tensor sum(const Tensor& a) {
    const auto& an = need(a, "sum");
    double s = 0.0;
    for (double x : an.values) s += x;
    auto* ap = a.node();
    return op_result({1}, {s}, {a.node_ptr()}, [ap](TensorNode& self) {
        ensure_grad(*ap);
        for (double& g : ap->grad) g += self.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    const auto& an = need(a, "mean");
    double s = 0.0;
    for (double x : an.values) s += x;
    const double inv = 1.0 / static_cast<double>(an.values.size());
    auto* ap = a.node();
    return op_result({1}, {s * inv}, {a.node_ptr()}, [ap, inv](TensorNode& self) {
        ensure_grad(*ap);
        for (double& g : ap->grad) g += self.grad[0] * inv;
    });
}

namespace {

Tensor reduce_axis(const Tensor& a, int axis, bool take_mean, const char* name) {
    const auto& an = need(a, name);
    const int rank = static_cast<int>(an.shape.size());
    if (axis < 0 || axis >= rank) {
        throw std::invalid_argument(std::string(name) + ": axis " + std::to_string(axis) +
                                    " out of range for rank " + std::to_string(rank));
    }
    int outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= an.shape[i];
    for (int i = axis + 1; i < rank; ++i) inner *= an.shape[i];
    const int count = an.shape[axis];
    Shape out_shape;
    for (int i = 0; i < rank; ++i) {
        if (i != axis) out_shape.push_back(an.shape[i]);
    }
    if (out_shape.empty()) out_shape.push_back(1);
    std::vector<double> out(static_cast<std::size_t>(outer) * inner, 0.0);
    for (int o = 0; o < outer; ++o) {
        for (int kk = 0; kk < count; ++kk) {
            for (int i = 0; i < inner; ++i) {
                out[static_cast<std::size_t>(o) * inner + i] +=
                    an.values[(static_cast<std::size_t>(o) * count + kk) * inner + i];
            }
        }
    }
    const double scale = take_mean ? 1.0 / count : 1.0;
    if (take_mean) {
        for (double& x : out) x *= scale;
    }
    auto* ap = a.node();
    return op_result(out_shape, std::move(out), {a.node_ptr()},
                     [ap, outer, count, inner, scale](TensorNode& self) {
                         ensure_grad(*ap);
                         for (int o = 0; o < outer; ++o) {
                             for (int kk = 0; kk < count; ++kk) {
                                 for (int i = 0; i < inner; ++i) {
                                     ap->grad[(static_cast<std::size_t>(o) * count + kk) * inner + i] +=
                                         self.grad[static_cast<std::size_t>(o) * inner + i] * scale;
                                 }
                             }
                         }
                     });
}

}  // namespace

Tensor sum(const Tensor& a, int axis) { return reduce_axis(a, axis, false, "sum"); }

Tensor mean(const Tensor& a, int axis) { return reduce_axis(a, axis, true, "mean"); }

// ---- structure ----

Tensor reshape(const Tensor& a, Shape shape) {
    const auto& an = need(a, "reshape");
    check_shape(shape);
    if (shape_size(shape) != static_cast<int>(an.values.size())) {
        throw std::invalid_argument("reshape: cannot view " + shape_string(an.shape) + " as " +
                                    shape_string(shape));
    }
    auto* ap = a.node();
    return op_result(std::move(shape), an.values, {a.node_ptr()}, [ap](TensorNode& self) {
        ensure_grad(*ap);
        for (std::size_t i = 0; i < self.grad.size(); ++i) ap->grad[i] += self.grad[i];
    });
}

Tensor transpose(const Tensor& a) {
    const auto& an = need(a, "transpose");
    if (an.shape.size() != 2) {
        throw std::invalid_argument("transpose: rank-2 tensor required, got " + shape_string(an.shape));
    }
    const int m = an.shape[0];
    const int n = an.shape[1];
    std::vector<double> out(an.values.size());
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(j) * m + i] = an.values[static_cast<std::size_t>(i) * n + j];
        }
    }
    auto* ap = a.node();
    return op_result({n, m}, std::move(out), {a.node_ptr()}, [ap, m, n](TensorNode& self) {
        ensure_grad(*ap);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                ap->grad[static_cast<std::size_t>(i) * n + j] +=
                    self.grad[static_cast<std::size_t>(j) * m + i];
            }
        }
    });
}

Tensor element(const Tensor& a, int index) {
    const auto& an = need(a, "element");
    if (index < 0 || index >= static_cast<int>(an.values.size())) {
        throw std::out_of_range("element: index " + std::to_string(index) + " out of range for " +
                                shape_string(an.shape));
    }
    auto* ap = a.node();
    return op_result({1}, {an.values[static_cast<std::size_t>(index)]}, {a.node_ptr()},
                     [ap, index](TensorNode& self) {
                         ensure_grad(*ap);
                         ap->grad[static_cast<std::size_t>(index)] += self.grad[0];
                     });
}

Tensor slice_rows(const Tensor& a, int start, int count) {
    const auto& an = need(a, "slice_rows");
    if (an.shape.size() != 2) {
        throw std::invalid_argument("slice_rows: rank-2 tensor required, got " + shape_string(an.shape));
    }
    const int rows = an.shape[0];
    const int cols = an.shape[1];
    if (start < 0 || count <= 0 || start + count > rows) {
        throw std::out_of_range("slice_rows: span [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") out of bounds for " +
                                shape_string(an.shape));
    }
    std::vector<double> out(an.values.begin() + static_cast<std::size_t>(start) * cols,
                            an.values.begin() + static_cast<std::size_t>(start + count) * cols);
    auto* ap = a.node();
    return op_result({count, cols}, std::move(out), {a.node_ptr()},
                     [ap, start, cols](TensorNode& self) {
                         ensure_grad(*ap);
                         const std::size_t offset = static_cast<std::size_t>(start) * cols;
                         for (std::size_t i = 0; i < self.grad.size(); ++i) {
                             ap->grad[offset + i] += self.grad[i];
                         }
                     });
}

Tensor slice_cols(const Tensor& a, int start, int count) {
    const auto& an = need(a, "slice_cols");
    if (an.shape.size() != 2) {
        throw std::invalid_argument("slice_cols: rank-2 tensor required, got " + shape_string(an.shape));
    }
    const int rows = an.shape[0];
    const int cols = an.shape[1];
    if (start < 0 || count <= 0 || start + count > cols) {
        throw std::out_of_range("slice_cols: span [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") out of bounds for " +
                                shape_string(an.shape));
    }
    std::vector<double> out(static_cast<std::size_t>(rows) * count);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < count; ++j) {
            out[static_cast<std::size_t>(i) * count + j] =
                an.values[static_cast<std::size_t>(i) * cols + start + j];
        }
    }
    auto* ap = a.node();
    return op_result({rows, count}, std::move(out), {a.node_ptr()},
                     [ap, rows, cols, start, count](TensorNode& self) {
                         ensure_grad(*ap);
                         for (int i = 0; i < rows; ++i) {
                             for (int j = 0; j < count; ++j) {
                                 ap->grad[static_cast<std::size_t>(i) * cols + start + j] +=
                                     self.grad[static_cast<std::size_t>(i) * count + j];
                             }
                         }
                     });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw std::invalid_argument("concat_cols: no tensors given");
    }
    const auto& first = need(parts[0], "concat_cols");
    if (first.shape.size() != 2) {
        throw std::invalid_argument("concat_cols: rank-2 tensors required");
    }
    const int rows = first.shape[0];
    int total_cols = 0;
    for (const auto& p : parts) {
        const auto& pn = need(p, "concat_cols");
        if (pn.shape.size() != 2 || pn.shape[0] != rows) {
            throw std::invalid_argument("concat_cols: row count mismatch at " + shape_string(pn.shape));
        }
        total_cols += pn.shape[1];
    }
    std::vector<double> out(static_cast<std::size_t>(rows) * total_cols);
    std::vector<NodePtr> parents;
    std::vector<int> offsets;
    int off = 0;
    for (const auto& p : parts) {
        const int c = p.shape()[1];
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < c; ++j) {
                out[static_cast<std::size_t>(i) * total_cols + off + j] =
                    p.values()[static_cast<std::size_t>(i) * c + j];
            }
        }
        parents.push_back(p.node_ptr());
        offsets.push_back(off);
        off += c;
    }
    std::vector<TensorNode*> raw;
    for (auto& p : parents) raw.push_back(p.get());
    return op_result({rows, total_cols}, std::move(out), std::move(parents),
                     [raw, offsets, rows, total_cols](TensorNode& self) {
                         for (std::size_t k = 0; k < raw.size(); ++k) {
                             TensorNode* p = raw[k];
                             if (!p->requires_grad) continue;
                             ensure_grad(*p);
                             const int c = p->shape[1];
                             for (int i = 0; i < rows; ++i) {
                                 for (int j = 0; j < c; ++j) {
                                     p->grad[static_cast<std::size_t>(i) * c + j] +=
                                         self.grad[static_cast<std::size_t>(i) * total_cols + offsets[k] + j];
                                 }
                             }
                         }
                     });
}

Tensor concat_scalars(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw std::invalid_argument("concat_scalars: no tensors given");
    }
    std::vector<double> out;
    std::vector<NodePtr> parents;
    for (const auto& p : parts) {
        const auto& pn = need(p, "concat_scalars");
        if (pn.values.size() != 1) {
            throw std::invalid_argument("concat_scalars: size-1 tensors required, got " +
                                        shape_string(pn.shape));
        }
        out.push_back(pn.values[0]);
        parents.push_back(p.node_ptr());
    }
    std::vector<TensorNode*> raw;
    for (auto& p : parents) raw.push_back(p.get());
    const int n = static_cast<int>(out.size());
    return op_result({n}, std::move(out), std::move(parents), [raw](TensorNode& self) {
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (!raw[k]->requires_grad) continue;
            ensure_grad(*raw[k]);
            raw[k]->grad[0] += self.grad[k];
        }
    });
}

// ---- NN building blocks ----

Tensor add_row_vector(const Tensor& m, const Tensor& v) {
    const auto& mn = need(m, "add_row_vector");
    const auto& vn = need(v, "add_row_vector");
    if (mn.shape.size() != 2) {
        throw std::invalid_argument("add_row_vector: rank-2 matrix required, got " + shape_string(mn.shape));
    }
    const int rows = mn.shape[0];
    const int cols = mn.shape[1];
    if (static_cast<int>(vn.values.size()) != cols) {
        throw std::invalid_argument("add_row_vector: vector " + shape_string(vn.shape) +
                                    " does not match matrix " + shape_string(mn.shape));
    }
    std::vector<double> out(mn.values.size());
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            out[static_cast<std::size_t>(i) * cols + j] =
                mn.values[static_cast<std::size_t>(i) * cols + j] + vn.values[static_cast<std::size_t>(j)];
        }
    }
    auto* mp = m.node();
    auto* vp = v.node();
    return op_result(mn.shape, std::move(out), {m.node_ptr(), v.node_ptr()},
                     [mp, vp, rows, cols](TensorNode& self) {
                         if (mp->requires_grad) {
                             ensure_grad(*mp);
                             for (std::size_t i = 0; i < self.grad.size(); ++i) mp->grad[i] += self.grad[i];
                         }
                         if (vp->requires_grad) {
                             ensure_grad(*vp);
                             for (int i = 0; i < rows; ++i) {
                                 for (int j = 0; j < cols; ++j) {
                                     vp->grad[static_cast<std::size_t>(j)] +=
                                         self.grad[static_cast<std::size_t>(i) * cols + j];
                                 }
                             }
                         }
                     });
}

Tensor softmax_rows(const Tensor& a) {
    const auto& an = need(a, "softmax_rows");
    if (an.shape.size() != 2) {
        throw std::invalid_argument("softmax_rows: rank-2 tensor required, got " + shape_string(an.shape));
    }
    const int rows = an.shape[0];
    const int cols = an.shape[1];
    std::vector<double> out(an.values.size());
    for (int i = 0; i < rows; ++i) {
        const double* x = &an.values[static_cast<std::size_t>(i) * cols];
        double* y = &out[static_cast<std::size_t>(i) * cols];
        double mx = x[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
        double z = 0.0;
        for (int j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        for (int j = 0; j < cols; ++j) y[j] /= z;
    }
    auto* ap = a.node();
    return op_result(an.shape, std::move(out), {a.node_ptr()}, [ap, rows, cols](TensorNode& self) {
        ensure_grad(*ap);
        for (int i = 0; i < rows; ++i) {
            const double* y = &self.values[static_cast<std::size_t>(i) * cols];
            const double* g = &self.grad[static_cast<std::size_t>(i) * cols];
            double dot = 0.0;
            for (int j = 0; j < cols; ++j) dot += g[j] * y[j];
            double* ga = &ap->grad[static_cast<std::size_t>(i) * cols];
            for (int j = 0; j < cols; ++j) ga[j] += (g[j] - dot) * y[j];
        }
    });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const auto& xn = need(x, "layer_norm_rows");
    const auto& gn = need(gain, "layer_norm_rows");
    const auto& bn = need(bias, "layer_norm_rows");
    if (xn.shape.size() != 2) {
        throw std::invalid_argument("layer_norm_rows: rank-2 tensor required, got " + shape_string(xn.shape));
    }
    const int rows = xn.shape[0];
    const int cols = xn.shape[1];
    if (static_cast<int>(gn.values.size()) != cols || static_cast<int>(bn.values.size()) != cols) {
        throw std::invalid_argument("layer_norm_rows: gain/bias length must equal column count");
    }
    std::vector<double> out(xn.values.size());
    std::vector<double> xhat(xn.values.size());
    std::vector<double> inv_std(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        const double* xr = &xn.values[static_cast<std::size_t>(i) * cols];
        double mu = 0.0;
        for (int j = 0; j < cols; ++j) mu += xr[j];
        mu /= cols;
        double var = 0.0;
        for (int j = 0; j < cols; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= cols;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[static_cast<std::size_t>(i)] = inv;
        for (int j = 0; j < cols; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
            xhat[idx] = (xr[j] - mu) * inv;
            out[idx] = gn.values[static_cast<std::size_t>(j)] * xhat[idx] +
                       bn.values[static_cast<std::size_t>(j)];
        }
    }
    auto* xp = x.node();
    auto* gp = gain.node();
    auto* bp = bias.node();
    return op_result(xn.shape, std::move(out), {x.node_ptr(), gain.node_ptr(), bias.node_ptr()},
                     [xp, gp, bp, rows, cols, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](TensorNode& self) {
                         for (int i = 0; i < rows; ++i) {
                             const std::size_t base = static_cast<std::size_t>(i) * cols;
                             const double* dy = &self.grad[base];
                             if (gp->requires_grad) {
                                 ensure_grad(*gp);
                                 for (int j = 0; j < cols; ++j) {
                                     gp->grad[static_cast<std::size_t>(j)] += dy[j] * xhat[base + j];
                                 }
                             }
                             if (bp->requires_grad) {
                                 ensure_grad(*bp);
                                 for (int j = 0; j < cols; ++j) {
                                     bp->grad[static_cast<std::size_t>(j)] += dy[j];
                                 }
                             }
                             if (xp->requires_grad) {
                                 ensure_grad(*xp);
                                 double mean_dxhat = 0.0;
                                 double mean_dxhat_xhat = 0.0;
                                 for (int j = 0; j < cols; ++j) {
                                     const double dxhat = dy[j] * gp->values[static_cast<std::size_t>(j)];
                                     mean_dxhat += dxhat;
                                     mean_dxhat_xhat += dxhat * xhat[base + j];
                                 }
                                 mean_dxhat /= cols;
                                 mean_dxhat_xhat /= cols;
                                 const double inv = inv_std[static_cast<std::size_t>(i)];
                                 for (int j = 0; j < cols; ++j) {
                                     const double dxhat = dy[j] * gp->values[static_cast<std::size_t>(j)];
                                     xp->grad[base + j] +=
                                         inv * (dxhat - mean_dxhat - xhat[base + j] * mean_dxhat_xhat);
                                 }
                             }
                         }
                     });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
    const auto& tn = need(table, "embedding_lookup");
    if (tn.shape.size() != 2) {
        throw std::invalid_argument("embedding_lookup: rank-2 table required, got " + shape_string(tn.shape));
    }
    const int vocab = tn.shape[0];
    const int dim = tn.shape[1];
    if (ids.empty()) {
        throw std::invalid_argument("embedding_lookup: empty id list");
    }
    std::vector<double> out(ids.size() * static_cast<std::size_t>(dim));
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const int id = ids[r];
        if (id < 0 || id >= vocab) {
            throw std::out_of_range("embedding_lookup: id " + std::to_string(id) +
                                    " out of range for table " + shape_string(tn.shape));
        }
        std::copy_n(&tn.values[static_cast<std::size_t>(id) * dim], dim, &out[r * static_cast<std::size_t>(dim)]);
    }
    auto* tp = table.node();
    return op_result({static_cast<int>(ids.size()), dim}, std::move(out), {table.node_ptr()},
                     [tp, ids, dim](TensorNode& self) {
                         ensure_grad(*tp);
                         for (std::size_t r = 0; r < ids.size(); ++r) {
                             const std::size_t src = r * static_cast<std::size_t>(dim);
                             const std::size_t dst = static_cast<std::size_t>(ids[r]) * dim;
                             for (int j = 0; j < dim; ++j) {
                                 tp->grad[dst + j] += self.grad[src + j];
                             }
                         }
                     });
}

}  // namespace emocorr
