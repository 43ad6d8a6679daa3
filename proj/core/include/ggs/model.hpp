#ifndef GGS_MODEL_HPP
#define GGS_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "ggs/nn.hpp"
#include "ggs/tensor.hpp"

namespace ggs {

/// Spatial feature extractor. forward(C x H x W) yields the final
/// pre-pooling map of shape D x ceil(H/stride) x ceil(W/stride).
struct EncoderSpec {
    std::string architecture = "toy-convnet"; // or "resnet-style"
    int feature_dim = 32;                     // D
    int stride = 8;                           // power of two
    int input_channels = 3;
    int input_size = 64;
    bool bias = true;

    void validate() const;
};

struct ProjectorSpec {
    int output_dim = 16; // D', L2-normalized
    int hidden_dim = 32;

    void validate() const;
};

class Encoder {
public:
    Encoder(const EncoderSpec& spec, Rng& init_rng);

    /// tape == nullptr runs inference only.
    Tensor forward(const Tensor& view, Tape* tape);
    /// Accumulates parameter gradients from d(feature map).
    void backward(const Tensor& d_feature, Tape& tape);

    std::vector<Param*> params();
    const EncoderSpec& spec() const { return spec_; }

private:
    EncoderSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Global average pooling, two fully connected layers with a relu between,
/// then L2 normalization. A degenerate zero vector before normalization
/// maps to the first basis vector with zero gradient.
class Projector {
public:
    struct Saved {
        int feat_h = 0, feat_w = 0, feat_d = 0;
        std::vector<std::vector<double>> linear_inputs;
        std::vector<double> hidden_pre;
        std::vector<double> pre_norm;
        double norm = 0.0;
        bool valid = false;
    };

    Projector(int feature_dim, const ProjectorSpec& spec, Rng& init_rng);

    std::vector<double> forward(const Tensor& feature, Saved* saved);
    /// Returns d(feature map); parameter gradients only when accumulate.
    Tensor backward(const std::vector<double>& d_projection, Saved& saved, bool accumulate);

    std::vector<Param*> params();
    int output_dim() const { return fc2_.out_dim(); }

private:
    int feature_dim_;
    Linear fc1_, fc2_;
};

/// Encoder + projector with explicit per-view passes so the gradient of a
/// downstream scalar with respect to the feature map stays reachable.
class ContrastiveModel {
public:
    struct ViewPass {
        Tensor feature;                 // F
        std::vector<double> projection; // f, unit norm
        Tape encoder_tape;
        Projector::Saved projector_saved;
    };

    ContrastiveModel(const EncoderSpec& enc, const ProjectorSpec& proj, std::uint64_t seed);

    /// encode + project, caching activations for backward.
    ViewPass run_view(const Tensor& view);

    /// Inference-only encode (no cache). Checks the configured input size.
    Tensor encode(const Tensor& view);

    /// Backpropagates d(projection) through the projector only; returns
    /// dL/dF. Parameters are never updated here; projector gradients are
    /// accumulated only when requested.
    Tensor grad_wrt_feature(const std::vector<double>& d_projection, ViewPass& pass,
                            bool accumulate_projector_grads);

    /// Continues a grad_wrt_feature result through the encoder, accumulating
    /// encoder parameter gradients.
    void encoder_backward(const Tensor& d_feature, ViewPass& pass);

    std::vector<Param*> params();
    std::uint64_t param_hash() const;
    void zero_grad();

    Encoder& encoder() { return encoder_; }
    Projector& projector() { return projector_; }
    const EncoderSpec& encoder_spec() const { return encoder_.spec(); }

private:
    Encoder encoder_;
    Projector projector_;
};

} // namespace ggs

#endif
