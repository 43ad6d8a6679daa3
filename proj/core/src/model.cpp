#include "ggs/model.hpp"

#include <cmath>

namespace ggs {

namespace {

constexpr std::uint64_t kTagInit = 0x696e6974ULL;
constexpr double kNormEps = 1e-12;

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace

void EncoderSpec::validate() const {
    if (architecture != "toy-convnet" && architecture != "resnet-style")
        throw ConfigError("unknown encoder architecture '" + architecture + "'");
    if (feature_dim < 1) throw ConfigError("encoder feature_dim must be >= 1");
    if (!power_of_two(stride) || stride < 2)
        throw ConfigError("encoder stride must be a power of two >= 2");
    if (input_channels < 1) throw ConfigError("encoder input_channels must be >= 1");
    if (input_size < 8) throw ConfigError("encoder input_size must be >= 8");
}

void ProjectorSpec::validate() const {
    if (output_dim < 1 || hidden_dim < 1) throw ConfigError("projector dimensions must be >= 1");
}

Encoder::Encoder(const EncoderSpec& spec, Rng& init_rng) : spec_(spec) {
    spec_.validate();

    int blocks = 0;
    for (int s = spec.stride; s > 1; s /= 2) ++blocks;

    // channel ramp ending at feature_dim, e.g. 8 -> 16 -> 32 for stride 8
    std::vector<int> channels(blocks);
    for (int b = 0; b < blocks; ++b)
        channels[b] = std::max(4, spec.feature_dim >> (blocks - 1 - b));
    channels[blocks - 1] = spec.feature_dim;

    int in_ch = spec.input_channels;
    for (int b = 0; b < blocks; ++b) {
        layers_.push_back(std::make_unique<Conv2d>(in_ch, channels[b], 3, 2, 1, spec.bias));
        layers_.push_back(std::make_unique<ReLU>());
        if (spec.architecture == "resnet-style")
            layers_.push_back(std::make_unique<ResidualBlock>(channels[b], spec.bias));
        in_ch = channels[b];
    }

    for (auto& l : layers_) l->init(init_rng);
}

Tensor Encoder::forward(const Tensor& view, Tape* tape) {
    if (view.channels() != spec_.input_channels)
        throw ModelError("encoder expects " + std::to_string(spec_.input_channels) +
                         " input channels, got " + std::to_string(view.channels()));
    if (view.height() != spec_.input_size || view.width() != spec_.input_size)
        throw ModelError("encoder expects " + std::to_string(spec_.input_size) + "x" +
                         std::to_string(spec_.input_size) + " input, got " + view.shape_str());
    Tensor x = view;
    for (auto& l : layers_) x = l->forward(x, tape);
    return x;
}

void Encoder::backward(const Tensor& d_feature, Tape& tape) {
    Tensor g = d_feature;
    for (std::size_t i = layers_.size(); i-- > 0;)
        g = layers_[i]->backward(g, tape, /*accumulate=*/true, /*need_dinput=*/i > 0);
}

std::vector<Param*> Encoder::params() {
    std::vector<Param*> out;
    for (auto& l : layers_)
        for (auto* p : l->params()) out.push_back(p);
    return out;
}

Projector::Projector(int feature_dim, const ProjectorSpec& spec, Rng& init_rng)
    : feature_dim_(feature_dim), fc1_(feature_dim, spec.hidden_dim),
      fc2_(spec.hidden_dim, spec.output_dim) {
    spec.validate();
    fc1_.init(init_rng);
    fc2_.init(init_rng);
}

std::vector<double> Projector::forward(const Tensor& feature, Saved* saved) {
    if (feature.channels() != feature_dim_)
        throw ModelError("projector expects feature_dim " + std::to_string(feature_dim_));
    const int area = feature.height() * feature.width();

    std::vector<double> pooled(feature_dim_);
    for (int d = 0; d < feature_dim_; ++d) {
        const double* plane = feature.plane(d);
        double acc = 0.0;
        for (int i = 0; i < area; ++i) acc += plane[i];
        pooled[d] = acc / area;
    }

    Saved local;
    Saved& s = saved ? *saved : local;
    s = Saved{};
    s.feat_d = feature.channels();
    s.feat_h = feature.height();
    s.feat_w = feature.width();

    std::vector<double> hidden = fc1_.forward(pooled, saved ? &s.linear_inputs : nullptr);
    s.hidden_pre = hidden;
    for (double& v : hidden)
        if (v < 0.0) v = 0.0;
    std::vector<double> z = fc2_.forward(hidden, saved ? &s.linear_inputs : nullptr);

    double norm = 0.0;
    for (double v : z) norm += v * v;
    norm = std::sqrt(norm);
    s.pre_norm = z;
    s.norm = norm;
    s.valid = saved != nullptr;

    std::vector<double> f(z.size(), 0.0);
    if (norm < kNormEps) {
        f[0] = 1.0; // degenerate input: fixed unit vector, zero gradient
    } else {
        for (std::size_t i = 0; i < z.size(); ++i) f[i] = z[i] / norm;
    }
    return f;
}

Tensor Projector::backward(const std::vector<double>& d_projection, Saved& s, bool accumulate) {
    if (!s.valid) throw UsageError("projector backward without a cached forward pass");
    s.valid = false;

    std::vector<double> d_z(s.pre_norm.size(), 0.0);
    if (s.norm >= kNormEps) {
        // f = z / |z|; dz = (df - f (f . df)) / |z|
        double fdot = 0.0;
        for (std::size_t i = 0; i < d_z.size(); ++i)
            fdot += (s.pre_norm[i] / s.norm) * d_projection[i];
        for (std::size_t i = 0; i < d_z.size(); ++i)
            d_z[i] = (d_projection[i] - (s.pre_norm[i] / s.norm) * fdot) / s.norm;
    }

    std::vector<double> d_hidden = fc2_.backward(d_z, s.linear_inputs, accumulate);
    for (std::size_t i = 0; i < d_hidden.size(); ++i)
        if (s.hidden_pre[i] <= 0.0) d_hidden[i] = 0.0;
    std::vector<double> d_pooled = fc1_.backward(d_hidden, s.linear_inputs, accumulate);

    Tensor d_feature(s.feat_d, s.feat_h, s.feat_w);
    const double inv_area = 1.0 / (double(s.feat_h) * s.feat_w);
    for (int d = 0; d < s.feat_d; ++d) {
        const double g = d_pooled[d] * inv_area;
        double* plane = d_feature.plane(d);
        for (int i = 0; i < s.feat_h * s.feat_w; ++i) plane[i] = g;
    }
    return d_feature;
}

std::vector<Param*> Projector::params() {
    auto p = fc1_.params();
    for (auto* q : fc2_.params()) p.push_back(q);
    return p;
}

namespace {

Encoder build_encoder(const EncoderSpec& spec, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {kTagInit, 0});
    return Encoder(spec, rng);
}

Projector build_projector(int feature_dim, const ProjectorSpec& spec, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {kTagInit, 1});
    return Projector(feature_dim, spec, rng);
}

} // namespace

ContrastiveModel::ContrastiveModel(const EncoderSpec& enc, const ProjectorSpec& proj,
                                   std::uint64_t seed)
    : encoder_(build_encoder(enc, seed)),
      projector_(build_projector(enc.feature_dim, proj, seed)) {}

ContrastiveModel::ViewPass ContrastiveModel::run_view(const Tensor& view) {
    ViewPass pass;
    pass.feature = encoder_.forward(view, &pass.encoder_tape);
    pass.projection = projector_.forward(pass.feature, &pass.projector_saved);
    return pass;
}

Tensor ContrastiveModel::encode(const Tensor& view) { return encoder_.forward(view, nullptr); }

Tensor ContrastiveModel::grad_wrt_feature(const std::vector<double>& d_projection, ViewPass& pass,
                                          bool accumulate_projector_grads) {
    if (d_projection.size() != pass.projection.size())
        throw UsageError("grad_wrt_feature: projection gradient size mismatch");
    return projector_.backward(d_projection, pass.projector_saved, accumulate_projector_grads);
}

void ContrastiveModel::encoder_backward(const Tensor& d_feature, ViewPass& pass) {
    if (!d_feature.same_shape(pass.feature))
        throw UsageError("encoder_backward: gradient shape mismatch");
    encoder_.backward(d_feature, pass.encoder_tape);
}

std::vector<Param*> ContrastiveModel::params() {
    auto p = encoder_.params();
    for (auto* q : projector_.params()) p.push_back(q);
    return p;
}

std::uint64_t ContrastiveModel::param_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto& self = const_cast<ContrastiveModel&>(*this);
    for (const Param* p : self.params()) h = hash_doubles(p->value, h);
    return h;
}

void ContrastiveModel::zero_grad() {
    for (Param* p : params()) p->zero_grad();
}

} // namespace ggs
