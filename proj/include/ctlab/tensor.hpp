#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

// Dense 64-bit tensors with reverse-mode differentiation on an explicit,
// single-owner tape. A Tensor is a value-semantic handle over shared storage;
// recording happens only while a Tape::Scope is open, and only for results
// whose inputs participate (leaf parameters or tensors produced under the
// same scope). Broadcast is restricted to scalar-vs-tensor.

namespace ctlab {

class Tape;

struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated once the tensor joins a backward pass
    bool requires_grad = false;
    Tape* tape = nullptr;
    std::uint64_t tape_gen = 0;
};

class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(const std::vector<std::size_t>& shape);
    static Tensor full(const std::vector<std::size_t>& shape, double v);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return impl_->shape; }
    std::size_t size() const { return impl_->data.size(); }
    bool is_scalar() const { return size() == 1; }
    double item() const;

    std::vector<double>& data() { return impl_->data; }
    const std::vector<double>& data() const { return impl_->data; }

    bool has_grad() const { return !impl_->grad.empty(); }
    std::vector<double>& grad() { return impl_->grad; }
    const std::vector<double>& grad() const { return impl_->grad; }
    void zero_grad();
    void ensure_grad();

    Tensor& set_requires_grad(bool b);
    bool requires_grad() const { return impl_->requires_grad; }

    const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

private:
    std::shared_ptr<TensorImpl> impl_;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Reverse accumulation from a scalar loss recorded on this tape.
    // A loss that never touched the tape is a constant: nothing is written.
    // The tape is consumed either way.
    void backward(const Tensor& loss);

    void clear();
    std::size_t node_count() const { return nodes_.size(); }
    std::uint64_t generation() const { return gen_; }

    // RAII activation; ops record onto the innermost active tape.
    class Scope {
    public:
        explicit Scope(Tape& t);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Tape* prev_;
    };

    static Tape* active();

    void push_node(std::function<void()> backprop);

private:
    std::vector<std::function<void()>> nodes_;
    std::uint64_t gen_ = 1;
};

// True when x is a leaf parameter or was produced under the active scope.
bool participates(const Tensor& x);

// Detached value copy; gradients never flow through the result.
Tensor stopgrad(const Tensor& x);

// Elementwise; either operand may be a scalar tensor (broadcast).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

// Strict 2-D matrix product (m x k) * (k x n).
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor variance(const Tensor& a);  // population variance over all elements
Tensor square_norm(const Tensor& a);

Tensor sqrt(const Tensor& a);
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor square(const Tensor& a);
Tensor silu(const Tensor& a);

// Row-structured ops over a 2-D tensor X (m x f) and a length-m vector v.
Tensor rowwise_mean(const Tensor& x);
Tensor rowwise_sub(const Tensor& x, const Tensor& v);
Tensor rowwise_scale(const Tensor& x, const Tensor& v);
Tensor rowwise_square_norm(const Tensor& x);

// Column-structured ops with a length-f vector u broadcast across rows.
Tensor rowvec_scale(const Tensor& x, const Tensor& u);
Tensor rowvec_add(const Tensor& x, const Tensor& u);

Tensor reshape(const Tensor& x, const std::vector<std::size_t>& new_shape);
Tensor take_rows(const Tensor& x, const std::vector<std::size_t>& rows);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

}  // namespace ctlab
