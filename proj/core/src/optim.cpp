#include "ggs/optim.hpp"

namespace ggs {

void OptimizerConfig::validate() const {
    if (kind != "sgd-momentum") throw ConfigError("unknown optimizer kind '" + kind + "'");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

SgdMomentum::SgdMomentum(const OptimizerConfig& cfg, std::vector<Param*> params)
    : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
    velocity_.reserve(params_.size());
    for (const Param* p : params_) velocity_.emplace_back(p->value.size(), 0.0);
}

void SgdMomentum::step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        std::vector<double>& v = velocity_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            double g = p.grad[j];
            if (cfg_.weight_decay > 0.0) g += cfg_.weight_decay * p.value[j];
            v[j] = cfg_.momentum * v[j] + g;
            p.value[j] -= cfg_.learning_rate * v[j];
        }
    }
}

void SgdMomentum::restore_velocity(const std::vector<std::vector<double>>& v) {
    if (v.size() != velocity_.size()) throw UsageError("velocity snapshot shape mismatch");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i].size() != velocity_[i].size())
            throw UsageError("velocity snapshot shape mismatch");
    velocity_ = v;
}

} // namespace ggs
