#pragma once

#include "ctlab/schedules.hpp"
#include "ctlab/tensor.hpp"

#include <string>

// The robust metric family d(.,.), the small-timestep diffusion regularizer,
// and the assembled consistency objective. All metrics act on the full-tensor
// Euclidean residual norm; the rowwise variants treat each row of a 2-D
// tensor as one sample.

namespace ctlab {

enum class LossKind { L2, PseudoHuber, Cauchy, GemanMcClure };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

struct LossSpec {
    LossKind kind = LossKind::Cauchy;
    CScheduler c_sched = CScheduler::adaptive();
};

struct DiffusionRegularizer {
    double r = 0.25;
    bool enabled = true;
};

// d(x, y) as a differentiable scalar; gradient flows through both arguments.
Tensor metric(const LossSpec& spec, const Tensor& x, const Tensor& y, double c);

// Per-row d values for batched x, y of shape (B x F); returns a length-B vector.
Tensor metric_rowwise(const LossSpec& spec, const Tensor& x, const Tensor& y, double c);

// Closed form on the squared residual norm; the scalar oracle the tensor
// paths are checked against.
double metric_value(LossKind kind, double residual_sq, double c);

// |d/d||x-y||| of the metric at the given residual norm.
double metric_gradient_norm(LossKind kind, double residual_norm, double c);

// lambda * d(online, target); the target is stopgrad-detached upstream.
Tensor consistency_loss(const Tensor& online_out, const Tensor& target_out,
                        double lambda, const LossSpec& spec, double c);

// Plain squared error against clean data.
Tensor diffusion_loss(const Tensor& model_out, const Tensor& x0);

// True iff interval index i (1-based) falls in the small-noise band i <= int(N*r).
bool diffusion_active(std::size_t i, std::size_t n, double r);

}  // namespace ctlab
