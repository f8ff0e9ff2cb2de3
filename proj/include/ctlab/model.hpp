#pragma once

#include "ctlab/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

// The consistency network: a small feed-forward trunk with Fourier time
// embedding, pluggable normalization layers, and the boundary-condition
// parameterization f(x, t) = c_skip(t) * x + c_out(t) * F(x, t).

namespace ctlab {

enum class NormKind { GroupNorm, InstanceNorm, LayerNorm, RMSNorm, NonScalingLayerNorm };

const char* norm_kind_name(NormKind kind);
NormKind norm_kind_from_name(const std::string& name);

// Hidden vectors are viewed as channels of width > 1 so that per-channel
// statistics stay non-degenerate: GroupNorm pools `gn_groups` groups,
// InstanceNorm pools one group per channel (`in_channels` of them), and the
// layer-wide kinds pool everything.
struct NormLayer {
    NormKind kind = NormKind::NonScalingLayerNorm;
    std::size_t features = 0;
    std::size_t groups = 1;  // statistic groups over the feature vector
    double epsilon = 1e-5;
    Tensor gamma;  // absent for NsLN
    Tensor beta;   // absent for RMS

    static NormLayer make(NormKind kind, std::size_t features, std::size_t gn_groups,
                          std::size_t in_channels, double eps = 1e-5);

    // x: (B x features)
    Tensor forward(const Tensor& x) const;

    std::vector<Tensor> trainable_params() const;
    std::size_t param_count() const;
};

struct ModelConfig {
    std::size_t data_dim = 2;
    std::size_t hidden = 256;
    std::size_t blocks = 4;       // hidden layers
    std::size_t time_freqs = 16;  // embedding width is 2 * time_freqs
    double time_scale = 0.02;
    NormKind norm_kind = NormKind::NonScalingLayerNorm;
    std::size_t gn_groups = 8;
    std::size_t in_channels = 16;
    double norm_eps = 1e-5;
    double dropout = 0.0;
    double sigma_data = 1.0;
    double sigma_min = 0.002;
    std::uint64_t init_seed = 1;
};

struct TimeEmbedding {
    std::vector<double> omega;  // 2*pi*scale*f_j over fixed random frequencies

    // [sin(w_j ln t), cos(w_j ln t)]; t must be positive.
    Tensor embed_batch(const std::vector<double>& ts) const;
};

// EDM-lineage coefficients with the sigma_min shift; (1, 0) at t = sigma_min.
std::pair<double, double> cskip_cout(double t, double sigma_data, double sigma_min);

class ConsistencyModel {
public:
    explicit ConsistencyModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const TimeEmbedding& time_embedding() const { return temb_; }

    // Trainable parameters in checkpoint enumeration order.
    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::size_t param_count() const;

    // Batched consistency output for x_t (B x dim) at per-row noise levels.
    // dropout_rng enables the configured dropout (training only).
    Tensor forward(const Tensor& x_t, const std::vector<double>& ts,
                   std::mt19937_64* dropout_rng = nullptr) const;
    Tensor forward_one(const Tensor& x_t, double t) const;

    std::vector<double> flatten_params() const;
    void load_params(const std::vector<double>& flat);
    void copy_params_from(const ConsistencyModel& other);

private:
    struct Block {
        Tensor W;   // (in x hidden)
        Tensor U;   // (emb x hidden) time projection
        Tensor b;   // (hidden)
        NormLayer norm;
    };

    Tensor trunk(const Tensor& x_t, const Tensor& temb,
                 std::mt19937_64* dropout_rng) const;

    ModelConfig cfg_;
    TimeEmbedding temb_;
    std::vector<Block> blocks_;
    Tensor w_out_;
    Tensor b_out_;
    std::vector<Tensor> params_;
};

}  // namespace ctlab
