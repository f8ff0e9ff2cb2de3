#include "ctlab/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace ctlab {

const char* loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::L2: return "l2";
        case LossKind::PseudoHuber: return "pseudo_huber";
        case LossKind::Cauchy: return "cauchy";
        case LossKind::GemanMcClure: return "geman_mcclure";
    }
    return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "l2") return LossKind::L2;
    if (name == "pseudo_huber" || name == "huber") return LossKind::PseudoHuber;
    if (name == "cauchy") return LossKind::Cauchy;
    if (name == "geman_mcclure") return LossKind::GemanMcClure;
    throw std::invalid_argument("unknown loss kind: " + name);
}

namespace {

void check_c(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("metric: scaling parameter c must be > 0");
}

// Maps the (tensor-valued) squared residual norm through the chosen form.
Tensor apply_form(LossKind kind, const Tensor& r2, double c) {
    switch (kind) {
        case LossKind::L2:
            return r2;
        case LossKind::PseudoHuber:
            return add_scalar(sqrt(add_scalar(r2, c * c)), -c);
        case LossKind::Cauchy:
            return log(add_scalar(scale(r2, 1.0 / (2.0 * c * c)), 1.0));
        case LossKind::GemanMcClure:
            return div(scale(r2, 2.0), add_scalar(r2, 4.0 * c * c));
    }
    throw std::logic_error("unreachable loss kind");
}

}  // namespace

Tensor metric(const LossSpec& spec, const Tensor& x, const Tensor& y, double c) {
    check_c(c);
    return apply_form(spec.kind, square_norm(sub(x, y)), c);
}

Tensor metric_rowwise(const LossSpec& spec, const Tensor& x, const Tensor& y, double c) {
    check_c(c);
    return apply_form(spec.kind, rowwise_square_norm(sub(x, y)), c);
}

double metric_value(LossKind kind, double residual_sq, double c) {
    check_c(c);
    switch (kind) {
        case LossKind::L2: return residual_sq;
        case LossKind::PseudoHuber: return std::sqrt(residual_sq + c * c) - c;
        case LossKind::Cauchy: return std::log(1.0 + residual_sq / (2.0 * c * c));
        case LossKind::GemanMcClure: return 2.0 * residual_sq / (residual_sq + 4.0 * c * c);
    }
    throw std::logic_error("unreachable loss kind");
}

double metric_gradient_norm(LossKind kind, double residual_norm, double c) {
    check_c(c);
    if (residual_norm < 0.0)
        throw std::invalid_argument("metric_gradient_norm: residual norm must be >= 0");
    const double r = residual_norm;
    switch (kind) {
        case LossKind::L2: return 2.0 * r;
        case LossKind::PseudoHuber: return r / std::sqrt(r * r + c * c);
        case LossKind::Cauchy: return 2.0 * r / (2.0 * c * c + r * r);
        case LossKind::GemanMcClure: {
            const double den = r * r + 4.0 * c * c;
            return 16.0 * r * c * c / (den * den);
        }
    }
    throw std::logic_error("unreachable loss kind");
}

Tensor consistency_loss(const Tensor& online_out, const Tensor& target_out,
                        double lambda, const LossSpec& spec, double c) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("consistency_loss: lambda must be > 0");
    return scale(metric(spec, online_out, target_out, c), lambda);
}

Tensor diffusion_loss(const Tensor& model_out, const Tensor& x0) {
    return square_norm(sub(model_out, x0));
}

bool diffusion_active(std::size_t i, std::size_t n, double r) {
    if (i < 1 || i >= n)
        throw std::invalid_argument("diffusion_active: interval index out of range");
    if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("diffusion_active: threshold r must lie in [0, 1]");
    return i <= static_cast<std::size_t>(static_cast<double>(n) * r);
}

}  // namespace ctlab
