#include "ctlab/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ctlab {

const char* norm_kind_name(NormKind kind) {
    switch (kind) {
        case NormKind::GroupNorm: return "gn";
        case NormKind::InstanceNorm: return "in";
        case NormKind::LayerNorm: return "ln";
        case NormKind::RMSNorm: return "rms";
        case NormKind::NonScalingLayerNorm: return "nsln";
    }
    return "?";
}

NormKind norm_kind_from_name(const std::string& name) {
    if (name == "gn") return NormKind::GroupNorm;
    if (name == "in") return NormKind::InstanceNorm;
    if (name == "ln") return NormKind::LayerNorm;
    if (name == "rms") return NormKind::RMSNorm;
    if (name == "nsln") return NormKind::NonScalingLayerNorm;
    throw std::invalid_argument("unknown norm kind: " + name);
}

NormLayer NormLayer::make(NormKind kind, std::size_t features, std::size_t gn_groups,
                          std::size_t in_channels, double eps) {
    NormLayer layer;
    layer.kind = kind;
    layer.features = features;
    layer.epsilon = eps;
    switch (kind) {
        case NormKind::GroupNorm: layer.groups = gn_groups; break;
        case NormKind::InstanceNorm: layer.groups = in_channels; break;
        default: layer.groups = 1; break;
    }
    if (layer.groups == 0 || features % layer.groups != 0)
        throw std::invalid_argument("NormLayer: feature dim " + std::to_string(features) +
                                    " not divisible into " + std::to_string(layer.groups) +
                                    " groups");
    if (kind != NormKind::NonScalingLayerNorm)
        layer.gamma = Tensor::full({features}, 1.0).set_requires_grad(true);
    if (kind != NormKind::RMSNorm)
        layer.beta = Tensor::zeros({features}).set_requires_grad(true);
    return layer;
}

namespace {

// Per-group standardization of (B x F) rows via a (B*G x F/G) view.
Tensor standardize(const Tensor& x, std::size_t groups, double eps) {
    const std::size_t rows = x.shape()[0], f = x.shape()[1];
    Tensor xg = reshape(x, {rows * groups, f / groups});
    Tensor mu = rowwise_mean(xg);
    Tensor centered = rowwise_sub(xg, mu);
    Tensor var = rowwise_mean(square(centered));
    Tensor rstd = div(Tensor::scalar(1.0), sqrt(add_scalar(var, eps)));
    return reshape(rowwise_scale(centered, rstd), {rows, f});
}

}  // namespace

Tensor NormLayer::forward(const Tensor& x) const {
    if (x.shape().size() != 2 || x.shape()[1] != features)
        throw std::invalid_argument("NormLayer: expected (B x " + std::to_string(features) +
                                    ") input");
    switch (kind) {
        case NormKind::LayerNorm:
            return rowvec_add(rowvec_scale(standardize(x, 1, epsilon), gamma), beta);
        case NormKind::NonScalingLayerNorm:
            return rowvec_add(standardize(x, 1, epsilon), beta);
        case NormKind::GroupNorm:
        case NormKind::InstanceNorm:
            return rowvec_add(rowvec_scale(standardize(x, groups, epsilon), gamma), beta);
        case NormKind::RMSNorm: {
            Tensor ms = rowwise_mean(square(x));
            Tensor rrms = div(Tensor::scalar(1.0), sqrt(add_scalar(ms, epsilon)));
            return rowvec_scale(rowwise_scale(x, rrms), gamma);
        }
    }
    throw std::logic_error("unreachable norm kind");
}

std::vector<Tensor> NormLayer::trainable_params() const {
    std::vector<Tensor> out;
    if (gamma.defined()) out.push_back(gamma);
    if (beta.defined()) out.push_back(beta);
    return out;
}

std::size_t NormLayer::param_count() const {
    return (gamma.defined() ? features : 0) + (beta.defined() ? features : 0);
}

Tensor TimeEmbedding::embed_batch(const std::vector<double>& ts) const {
    const std::size_t b = ts.size(), f = omega.size();
    std::vector<double> d(b * 2 * f);
    for (std::size_t r = 0; r < b; ++r) {
        if (!(ts[r] > 0.0))
            throw std::invalid_argument("time_embedding: t must be positive, got " +
                                        std::to_string(ts[r]));
        const double lt = std::log(ts[r]);
        for (std::size_t j = 0; j < f; ++j) {
            d[r * 2 * f + j] = std::sin(omega[j] * lt);
            d[r * 2 * f + f + j] = std::cos(omega[j] * lt);
        }
    }
    return Tensor({b, 2 * f}, std::move(d));
}

std::pair<double, double> cskip_cout(double t, double sigma_data, double sigma_min) {
    if (t < sigma_min)
        throw std::invalid_argument("cskip_cout: t below sigma_min");
    const double sd2 = sigma_data * sigma_data;
    const double shifted = t - sigma_min;
    const double c_skip = sd2 / (shifted * shifted + sd2);
    const double c_out = sigma_data * shifted / std::sqrt(sd2 + t * t);
    return {c_skip, c_out};
}

namespace {

Tensor init_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (double)rows));
    std::vector<double> d(rows * cols);
    for (auto& v : d) v = dist(rng);
    return Tensor({rows, cols}, std::move(d)).set_requires_grad(true);
}

}  // namespace

ConsistencyModel::ConsistencyModel(const ModelConfig& cfg) : cfg_(cfg) {
    if (cfg.blocks < 1) throw std::invalid_argument("ConsistencyModel: need >= 1 block");
    std::mt19937_64 rng(cfg.init_seed);

    temb_.omega.resize(cfg.time_freqs);
    std::normal_distribution<double> freq_dist(0.0, 1.0);
    for (auto& w : temb_.omega)
        w = 2.0 * std::numbers::pi * cfg.time_scale * freq_dist(rng);

    const std::size_t emb = 2 * cfg.time_freqs;
    blocks_.reserve(cfg.blocks);
    for (std::size_t l = 0; l < cfg.blocks; ++l) {
        Block blk;
        const std::size_t in = l == 0 ? cfg.data_dim : cfg.hidden;
        blk.W = init_matrix(in, cfg.hidden, rng);
        blk.U = init_matrix(emb, cfg.hidden, rng);
        blk.b = Tensor::zeros({cfg.hidden}).set_requires_grad(true);
        blk.norm = NormLayer::make(cfg.norm_kind, cfg.hidden, cfg.gn_groups,
                                   cfg.in_channels, cfg.norm_eps);
        blocks_.push_back(std::move(blk));
    }
    // zero-initialized head keeps f close to the skip path at the start
    w_out_ = Tensor::zeros({cfg.hidden, cfg.data_dim}).set_requires_grad(true);
    b_out_ = Tensor::zeros({cfg.data_dim}).set_requires_grad(true);

    for (auto& blk : blocks_) {
        params_.push_back(blk.W);
        params_.push_back(blk.U);
        params_.push_back(blk.b);
        for (auto& p : blk.norm.trainable_params()) params_.push_back(p);
    }
    params_.push_back(w_out_);
    params_.push_back(b_out_);
}

std::size_t ConsistencyModel::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

Tensor ConsistencyModel::trunk(const Tensor& x_t, const Tensor& temb,
                               std::mt19937_64* dropout_rng) const {
    const std::size_t batch = x_t.shape()[0];
    Tensor h = x_t;
    for (const auto& blk : blocks_) {
        Tensor pre = rowvec_add(add(matmul(h, blk.W), matmul(temb, blk.U)), blk.b);
        h = silu(blk.norm.forward(pre));
        if (dropout_rng != nullptr && cfg_.dropout > 0.0) {
            std::bernoulli_distribution keep(1.0 - cfg_.dropout);
            std::vector<double> mask(batch * cfg_.hidden);
            const double inv_keep = 1.0 / (1.0 - cfg_.dropout);
            for (auto& m : mask) m = keep(*dropout_rng) ? inv_keep : 0.0;
            h = mul(h, Tensor({batch, cfg_.hidden}, std::move(mask)));
        }
    }
    return rowvec_add(matmul(h, w_out_), b_out_);
}

Tensor ConsistencyModel::forward(const Tensor& x_t, const std::vector<double>& ts,
                                 std::mt19937_64* dropout_rng) const {
    if (x_t.shape().size() != 2 || x_t.shape()[1] != cfg_.data_dim)
        throw std::invalid_argument("forward: expected (B x " +
                                    std::to_string(cfg_.data_dim) + ") input");
    if (ts.size() != x_t.shape()[0])
        throw std::invalid_argument("forward: one noise level per row required");

    const std::size_t batch = ts.size();
    std::vector<double> skip(batch), out(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        const auto [cs, co] = cskip_cout(ts[r], cfg_.sigma_data, cfg_.sigma_min);
        skip[r] = cs;
        out[r] = co;
    }
    Tensor net = trunk(x_t, temb_.embed_batch(ts), dropout_rng);
    return add(rowwise_scale(x_t, Tensor({batch}, std::move(skip))),
               rowwise_scale(net, Tensor({batch}, std::move(out))));
}

Tensor ConsistencyModel::forward_one(const Tensor& x_t, double t) const {
    if (x_t.shape().size() != 1)
        throw std::invalid_argument("forward_one: expected a flat sample");
    Tensor row = reshape(x_t, {1, x_t.size()});
    return reshape(forward(row, {t}), {x_t.size()});
}

std::vector<double> ConsistencyModel::flatten_params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const auto& p : params_)
        flat.insert(flat.end(), p.data().begin(), p.data().end());
    return flat;
}

void ConsistencyModel::load_params(const std::vector<double>& flat) {
    if (flat.size() != param_count())
        throw std::invalid_argument("load_params: expected " +
                                    std::to_string(param_count()) + " values, got " +
                                    std::to_string(flat.size()));
    std::size_t off = 0;
    for (auto& p : params_) {
        std::copy(flat.begin() + off, flat.begin() + off + p.size(), p.data().begin());
        off += p.size();
    }
}

void ConsistencyModel::copy_params_from(const ConsistencyModel& other) {
    if (other.param_count() != param_count())
        throw std::invalid_argument("copy_params_from: parameter layout mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i)
        params_[i].data() = other.params_[i].data();
}

}  // namespace ctlab
