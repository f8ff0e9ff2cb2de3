#include "ctlab/tensor.hpp"

#include "ctlab/kernels.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ctlab {

namespace {

Tape*& active_slot() {
    thread_local Tape* current = nullptr;
    return current;
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

bool on_active_tape(const TensorImpl& t) {
    Tape* tp = active_slot();
    return tp != nullptr && t.tape == tp && t.tape_gen == tp->generation();
}

bool part(const Tensor& x) {
    return x.impl()->requires_grad || on_active_tape(*x.impl());
}

// Tape currently running its backward pass; closures consult this so that
// accumulation works even after the recording scope has closed.
struct BackwardCtx {
    const Tape* tape = nullptr;
    std::uint64_t gen = 0;
};

BackwardCtx& backward_ctx() {
    thread_local BackwardCtx ctx;
    return ctx;
}

// Marks `out` as recorded and registers the backward closure. Participating
// inputs get grad buffers now so closures can accumulate unconditionally.
void record(std::function<void()> fn, Tensor& out,
            std::initializer_list<const Tensor*> inputs) {
    Tape* tp = active_slot();
    if (!tp) return;
    bool any = false;
    for (const Tensor* in : inputs) {
        if (part(*in)) {
            const_cast<Tensor*>(in)->ensure_grad();
            any = true;
        }
    }
    if (!any) return;
    out.ensure_grad();
    out.impl()->tape = tp;
    out.impl()->tape_gen = tp->generation();
    tp->push_node(std::move(fn));
}

// Whether grads should be accumulated into this input inside a closure:
// leaves always, intermediates only when they belong to the running tape.
bool wants_grad(const std::shared_ptr<TensorImpl>& t) {
    if (t->grad.empty()) return false;
    if (t->requires_grad) return true;
    const BackwardCtx& ctx = backward_ctx();
    return t->tape == ctx.tape && t->tape_gen == ctx.gen;
}

enum class Cast { Same, AScalar, BScalar };

Cast classify(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return Cast::Same;
    if (a.is_scalar()) return Cast::AScalar;
    if (b.is_scalar()) return Cast::BScalar;
    shape_error(op, a, b);
}

void check_2d(const char* op, const Tensor& x) {
    if (x.shape().size() != 2)
        throw std::invalid_argument(std::string(op) + ": expected 2-D tensor, got " +
                                    shape_str(x.shape()));
}

void check_rowvec(const char* op, const Tensor& x, const Tensor& v, std::size_t want) {
    check_2d(op, x);
    if (v.shape().size() != 1 || v.shape()[0] != want)
        throw std::invalid_argument(std::string(op) + ": vector length " +
                                    shape_str(v.shape()) + " does not match " +
                                    shape_str(x.shape()));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("Tensor: shape " + shape_str(shape) +
                                    " does not match data length " +
                                    std::to_string(data.size()));
    impl_ = std::make_shared<TensorImpl>();
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(const std::vector<std::size_t>& shape) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), 0.0));
}

Tensor Tensor::full(const std::vector<std::size_t>& shape, double v) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), v));
}

double Tensor::item() const {
    if (!is_scalar()) throw std::invalid_argument("item: tensor is not scalar");
    return impl_->data[0];
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::ensure_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor& Tensor::set_requires_grad(bool b) {
    impl_->requires_grad = b;
    if (b) ensure_grad();
    return *this;
}

Tape::Scope::Scope(Tape& t) : prev_(active_slot()) { active_slot() = &t; }
Tape::Scope::~Scope() { active_slot() = prev_; }

Tape* Tape::active() { return active_slot(); }

void Tape::push_node(std::function<void()> backprop) {
    nodes_.push_back(std::move(backprop));
}

void Tape::clear() {
    nodes_.clear();
    ++gen_;  // invalidates everything previously recorded here
}

void Tape::backward(const Tensor& loss) {
    if (!loss.is_scalar()) throw std::invalid_argument("backward: loss must be scalar");
    TensorImpl& li = *loss.impl();
    if (li.tape != nullptr && li.tape != this)
        throw std::invalid_argument("backward: loss recorded on a different tape");
    const bool recorded = li.tape == this && li.tape_gen == gen_;
    if (recorded) {
        li.grad.assign(1, 1.0);
        BackwardCtx& ctx = backward_ctx();
        ctx.tape = this;
        ctx.gen = gen_;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
        ctx = BackwardCtx{};
    }
    clear();
}

bool participates(const Tensor& x) { return part(x); }

Tensor stopgrad(const Tensor& x) {
    return Tensor(x.shape(), x.data());
}

namespace {

template <typename FwdSame, typename FwdAS, typename FwdBS, typename Bwd>
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b,
                 FwdSame fwd_same, FwdAS fwd_as, FwdBS fwd_bs, Bwd make_bwd) {
    const Cast cast = classify(name, a, b);
    Tensor out;
    switch (cast) {
        case Cast::Same: {
            std::vector<double> d(a.size());
            fwd_same(d.data(), a.data().data(), b.data().data(), a.size());
            out = Tensor(a.shape(), std::move(d));
            break;
        }
        case Cast::AScalar: {
            std::vector<double> d(b.size());
            fwd_as(d.data(), a.data()[0], b.data().data(), b.size());
            out = Tensor(b.shape(), std::move(d));
            break;
        }
        case Cast::BScalar: {
            std::vector<double> d(a.size());
            fwd_bs(d.data(), a.data().data(), b.data()[0], a.size());
            out = Tensor(a.shape(), std::move(d));
            break;
        }
    }
    record(make_bwd(cast, a.impl(), b.impl(), out.impl()), out, {&a, &b});
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        "add", a, b, kernels::add,
        [](double* o, double av, const double* bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av + bv[i];
        },
        [](double* o, const double* av, double bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av[i] + bv;
        },
        [](Cast cast, auto ai, auto bi, auto oi) {
            return [=]() {
                const auto& g = oi->grad;
                if (wants_grad(ai)) {
                    if (cast == Cast::AScalar) {
                        double s = 0.0;
                        for (double gv : g) s += gv;
                        ai->grad[0] += s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i) ai->grad[i] += g[i];
                    }
                }
                if (wants_grad(bi)) {
                    if (cast == Cast::BScalar) {
                        double s = 0.0;
                        for (double gv : g) s += gv;
                        bi->grad[0] += s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i) bi->grad[i] += g[i];
                    }
                }
            };
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        "sub", a, b, kernels::sub,
        [](double* o, double av, const double* bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av - bv[i];
        },
        [](double* o, const double* av, double bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av[i] - bv;
        },
        [](Cast cast, auto ai, auto bi, auto oi) {
            return [=]() {
                const auto& g = oi->grad;
                if (wants_grad(ai)) {
                    if (cast == Cast::AScalar) {
                        double s = 0.0;
                        for (double gv : g) s += gv;
                        ai->grad[0] += s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i) ai->grad[i] += g[i];
                    }
                }
                if (wants_grad(bi)) {
                    if (cast == Cast::BScalar) {
                        double s = 0.0;
                        for (double gv : g) s += gv;
                        bi->grad[0] -= s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i) bi->grad[i] -= g[i];
                    }
                }
            };
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        "mul", a, b, kernels::mul,
        [](double* o, double av, const double* bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av * bv[i];
        },
        [](double* o, const double* av, double bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av[i] * bv;
        },
        [](Cast cast, auto ai, auto bi, auto oi) {
            return [=]() {
                const auto& g = oi->grad;
                const auto& ad = ai->data;
                const auto& bd = bi->data;
                if (wants_grad(ai)) {
                    switch (cast) {
                        case Cast::Same:
                            for (std::size_t i = 0; i < g.size(); ++i)
                                ai->grad[i] += g[i] * bd[i];
                            break;
                        case Cast::AScalar: {
                            double s = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * bd[i];
                            ai->grad[0] += s;
                            break;
                        }
                        case Cast::BScalar:
                            for (std::size_t i = 0; i < g.size(); ++i)
                                ai->grad[i] += g[i] * bd[0];
                            break;
                    }
                }
                if (wants_grad(bi)) {
                    switch (cast) {
                        case Cast::Same:
                            for (std::size_t i = 0; i < g.size(); ++i)
                                bi->grad[i] += g[i] * ad[i];
                            break;
                        case Cast::BScalar: {
                            double s = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * ad[i];
                            bi->grad[0] += s;
                            break;
                        }
                        case Cast::AScalar:
                            for (std::size_t i = 0; i < g.size(); ++i)
                                bi->grad[i] += g[i] * ad[0];
                            break;
                    }
                }
            };
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_op(
        "div", a, b, kernels::div,
        [](double* o, double av, const double* bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av / bv[i];
        },
        [](double* o, const double* av, double bv, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) o[i] = av[i] / bv;
        },
        [](Cast cast, auto ai, auto bi, auto oi) {
            return [=]() {
                const auto& g = oi->grad;
                const auto& ad = ai->data;
                const auto& bd = bi->data;
                auto bval = [&](std::size_t i) {
                    return cast == Cast::BScalar ? bd[0] : bd[i];
                };
                auto aval = [&](std::size_t i) {
                    return cast == Cast::AScalar ? ad[0] : ad[i];
                };
                if (wants_grad(ai)) {
                    if (cast == Cast::AScalar) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < g.size(); ++i) s += g[i] / bd[i];
                        ai->grad[0] += s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i)
                            ai->grad[i] += g[i] / bval(i);
                    }
                }
                if (wants_grad(bi)) {
                    if (cast == Cast::BScalar) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < g.size(); ++i)
                            s -= g[i] * ad[i] / (bd[0] * bd[0]);
                        bi->grad[0] += s;
                    } else {
                        for (std::size_t i = 0; i < g.size(); ++i)
                            bi->grad[i] -= g[i] * aval(i) / (bd[i] * bd[i]);
                    }
                }
            };
        });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> d(a.size());
    const auto& ad = a.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ad[i] * s;
    Tensor out(a.shape(), std::move(d));
    record(
        [ai = a.impl(), oi = out.impl(), s]() {
            if (!wants_grad(ai)) return;
            for (std::size_t i = 0; i < oi->grad.size(); ++i)
                ai->grad[i] += oi->grad[i] * s;
        },
        out, {&a});
    return out;
}

Tensor add_scalar(const Tensor& a, double s) {
    std::vector<double> d(a.size());
    const auto& ad = a.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ad[i] + s;
    Tensor out(a.shape(), std::move(d));
    record(
        [ai = a.impl(), oi = out.impl()]() {
            if (!wants_grad(ai)) return;
            for (std::size_t i = 0; i < oi->grad.size(); ++i)
                ai->grad[i] += oi->grad[i];
        },
        out, {&a});
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_2d("matmul", a);
    check_2d("matmul", b);
    const std::size_t m = a.shape()[0], k = a.shape()[1];
    const std::size_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2) shape_error("matmul", a, b);
    std::vector<double> d(m * n);
    kernels::matmul_nn(d.data(), a.data().data(), b.data().data(), m, k, n);
    Tensor out({m, n}, std::move(d));
    record(
        [ai = a.impl(), bi = b.impl(), oi = out.impl(), m, k, n]() {
            const double* g = oi->grad.data();
            if (wants_grad(ai)) {
                std::vector<double> da(m * k);
                kernels::matmul_nt(da.data(), g, bi->data.data(), m, n, k);
                for (std::size_t i = 0; i < da.size(); ++i) ai->grad[i] += da[i];
            }
            if (wants_grad(bi)) {
                std::vector<double> db(k * n);
                kernels::matmul_tn(db.data(), ai->data.data(), g, k, m, n);
                for (std::size_t i = 0; i < db.size(); ++i) bi->grad[i] += db[i];
            }
        },
        out, {&a, &b});
    return out;
}

namespace {

template <typename FwdOne, typename Grad>
Tensor reduce_op(const Tensor& a, FwdOne fwd, Grad grad_fn) {
    Tensor out = Tensor::scalar(fwd(a.data()));
    record(
        [ai = a.impl(), oi = out.impl(), grad_fn]() {
            if (!wants_grad(ai)) return;
            grad_fn(*ai, oi->grad[0]);
        },
        out, {&a});
    return out;
}

}  // namespace

Tensor sum(const Tensor& a) {
    return reduce_op(
        a,
        [](const std::vector<double>& d) {
            double s = 0.0;
            for (double v : d) s += v;
            return s;
        },
        [](TensorImpl& ai, double g) {
            for (double& gv : ai.grad) gv += g;
        });
}

Tensor mean(const Tensor& a) {
    const double inv_n = 1.0 / static_cast<double>(a.size());
    return reduce_op(
        a,
        [inv_n](const std::vector<double>& d) {
            double s = 0.0;
            for (double v : d) s += v;
            return s * inv_n;
        },
        [inv_n](TensorImpl& ai, double g) {
            for (double& gv : ai.grad) gv += g * inv_n;
        });
}

Tensor variance(const Tensor& a) {
    const double inv_n = 1.0 / static_cast<double>(a.size());
    return reduce_op(
        a,
        [inv_n](const std::vector<double>& d) {
            double mu = 0.0;
            for (double v : d) mu += v;
            mu *= inv_n;
            double s = 0.0;
            for (double v : d) s += (v - mu) * (v - mu);
            return s * inv_n;
        },
        [inv_n](TensorImpl& ai, double g) {
            double mu = 0.0;
            for (double v : ai.data) mu += v;
            mu *= inv_n;
            for (std::size_t i = 0; i < ai.grad.size(); ++i)
                ai.grad[i] += g * 2.0 * (ai.data[i] - mu) * inv_n;
        });
}

Tensor square_norm(const Tensor& a) {
    return reduce_op(
        a,
        [](const std::vector<double>& d) {
            double s = 0.0;
            for (double v : d) s += v * v;
            return s;
        },
        [](TensorImpl& ai, double g) {
            for (std::size_t i = 0; i < ai.grad.size(); ++i)
                ai.grad[i] += 2.0 * ai.data[i] * g;
        });
}

namespace {

template <typename Fwd, typename Grad>
Tensor unary_op(const char* name, const Tensor& a, Fwd fwd, Grad grad_fn,
                bool domain_nonneg = false, bool domain_pos = false) {
    const auto& ad = a.data();
    std::vector<double> d(ad.size());
    for (std::size_t i = 0; i < ad.size(); ++i) {
        if (domain_nonneg && ad[i] < 0.0)
            throw std::domain_error(std::string(name) + ": negative input " +
                                    std::to_string(ad[i]));
        if (domain_pos && ad[i] <= 0.0)
            throw std::domain_error(std::string(name) + ": non-positive input " +
                                    std::to_string(ad[i]));
        d[i] = fwd(ad[i]);
    }
    Tensor out(a.shape(), std::move(d));
    record(
        [ai = a.impl(), oi = out.impl(), grad_fn]() {
            if (!wants_grad(ai)) return;
            for (std::size_t i = 0; i < oi->grad.size(); ++i)
                ai->grad[i] += oi->grad[i] * grad_fn(ai->data[i], oi->data[i]);
        },
        out, {&a});
    return out;
}

}  // namespace

Tensor sqrt(const Tensor& a) {
    return unary_op(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; }, /*nonneg=*/true);
}

Tensor log(const Tensor& a) {
    return unary_op(
        "log", a, [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; }, false, /*pos=*/true);
}

Tensor exp(const Tensor& a) {
    return unary_op(
        "exp", a, [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

Tensor square(const Tensor& a) {
    return unary_op(
        "square", a, [](double x) { return x * x; },
        [](double x, double) { return 2.0 * x; });
}

Tensor silu(const Tensor& a) {
    return unary_op(
        "silu", a,
        [](double x) { return x / (1.0 + std::exp(-x)); },
        [](double x, double) {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        });
}

Tensor rowwise_mean(const Tensor& x) {
    check_2d("rowwise_mean", x);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m);
    const double* xd = x.data().data();
    for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < f; ++c) s += xd[r * f + c];
        d[r] = s / static_cast<double>(f);
    }
    Tensor out({m}, std::move(d));
    record(
        [xi = x.impl(), oi = out.impl(), m, f]() {
            if (!wants_grad(xi)) return;
            const double inv_f = 1.0 / static_cast<double>(f);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < f; ++c)
                    xi->grad[r * f + c] += oi->grad[r] * inv_f;
        },
        out, {&x});
    return out;
}

Tensor rowwise_sub(const Tensor& x, const Tensor& v) {
    check_rowvec("rowwise_sub", x, v, x.shape()[0]);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m * f);
    const double* xd = x.data().data();
    const double* vd = v.data().data();
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < f; ++c) d[r * f + c] = xd[r * f + c] - vd[r];
    Tensor out(x.shape(), std::move(d));
    record(
        [xi = x.impl(), vi = v.impl(), oi = out.impl(), m, f]() {
            if (wants_grad(xi))
                for (std::size_t i = 0; i < oi->grad.size(); ++i)
                    xi->grad[i] += oi->grad[i];
            if (wants_grad(vi))
                for (std::size_t r = 0; r < m; ++r) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < f; ++c) s += oi->grad[r * f + c];
                    vi->grad[r] -= s;
                }
        },
        out, {&x, &v});
    return out;
}

Tensor rowwise_scale(const Tensor& x, const Tensor& v) {
    check_rowvec("rowwise_scale", x, v, x.shape()[0]);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m * f);
    const double* xd = x.data().data();
    const double* vd = v.data().data();
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < f; ++c) d[r * f + c] = xd[r * f + c] * vd[r];
    Tensor out(x.shape(), std::move(d));
    record(
        [xi = x.impl(), vi = v.impl(), oi = out.impl(), m, f]() {
            if (wants_grad(xi))
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < f; ++c)
                        xi->grad[r * f + c] += oi->grad[r * f + c] * vi->data[r];
            if (wants_grad(vi))
                for (std::size_t r = 0; r < m; ++r) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < f; ++c)
                        s += oi->grad[r * f + c] * xi->data[r * f + c];
                    vi->grad[r] += s;
                }
        },
        out, {&x, &v});
    return out;
}

Tensor rowwise_square_norm(const Tensor& x) {
    check_2d("rowwise_square_norm", x);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m);
    const double* xd = x.data().data();
    for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < f; ++c) s += xd[r * f + c] * xd[r * f + c];
        d[r] = s;
    }
    Tensor out({m}, std::move(d));
    record(
        [xi = x.impl(), oi = out.impl(), m, f]() {
            if (!wants_grad(xi)) return;
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < f; ++c)
                    xi->grad[r * f + c] += 2.0 * xi->data[r * f + c] * oi->grad[r];
        },
        out, {&x});
    return out;
}

Tensor rowvec_scale(const Tensor& x, const Tensor& u) {
    check_rowvec("rowvec_scale", x, u, x.shape()[1]);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m * f);
    const double* xd = x.data().data();
    const double* ud = u.data().data();
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < f; ++c) d[r * f + c] = xd[r * f + c] * ud[c];
    Tensor out(x.shape(), std::move(d));
    record(
        [xi = x.impl(), ui = u.impl(), oi = out.impl(), m, f]() {
            if (wants_grad(xi))
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < f; ++c)
                        xi->grad[r * f + c] += oi->grad[r * f + c] * ui->data[c];
            if (wants_grad(ui))
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < f; ++c)
                        ui->grad[c] += oi->grad[r * f + c] * xi->data[r * f + c];
        },
        out, {&x, &u});
    return out;
}

Tensor rowvec_add(const Tensor& x, const Tensor& u) {
    check_rowvec("rowvec_add", x, u, x.shape()[1]);
    const std::size_t m = x.shape()[0], f = x.shape()[1];
    std::vector<double> d(m * f);
    const double* xd = x.data().data();
    const double* ud = u.data().data();
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < f; ++c) d[r * f + c] = xd[r * f + c] + ud[c];
    Tensor out(x.shape(), std::move(d));
    record(
        [xi = x.impl(), ui = u.impl(), oi = out.impl(), m, f]() {
            if (wants_grad(xi))
                for (std::size_t i = 0; i < oi->grad.size(); ++i)
                    xi->grad[i] += oi->grad[i];
            if (wants_grad(ui))
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < f; ++c)
                        ui->grad[c] += oi->grad[r * f + c];
        },
        out, {&x, &u});
    return out;
}

Tensor reshape(const Tensor& x, const std::vector<std::size_t>& new_shape) {
    if (shape_numel(new_shape) != x.size())
        throw std::invalid_argument("reshape: size mismatch " + shape_str(x.shape()) +
                                    " -> " + shape_str(new_shape));
    Tensor out(new_shape, x.data());
    record(
        [xi = x.impl(), oi = out.impl()]() {
            if (!wants_grad(xi)) return;
            for (std::size_t i = 0; i < oi->grad.size(); ++i)
                xi->grad[i] += oi->grad[i];
        },
        out, {&x});
    return out;
}

Tensor take_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
    check_2d("take_rows", x);
    const std::size_t f = x.shape()[1];
    for (std::size_t r : rows)
        if (r >= x.shape()[0])
            throw std::invalid_argument("take_rows: row index " + std::to_string(r) +
                                        " out of range");
    std::vector<double> d(rows.size() * f);
    const double* xd = x.data().data();
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < f; ++c) d[r * f + c] = xd[rows[r] * f + c];
    Tensor out({rows.size(), f}, std::move(d));
    record(
        [xi = x.impl(), oi = out.impl(), rows, f]() {
            if (!wants_grad(xi)) return;
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < f; ++c)
                    xi->grad[rows[r] * f + c] += oi->grad[r * f + c];
        },
        out, {&x});
    return out;
}

}  // namespace ctlab
