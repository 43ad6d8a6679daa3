#ifndef GGS_OPTIM_HPP
#define GGS_OPTIM_HPP

#include <string>
#include <vector>

#include "ggs/errors.hpp"
#include "ggs/nn.hpp"

namespace ggs {

struct OptimizerConfig {
    std::string kind = "sgd-momentum";
    double learning_rate = 0.05;
    double momentum = 0.9;
    double weight_decay = 0.0;

    void validate() const;
};

/// v <- momentum * v + grad (+ weight_decay * w); w <- w - lr * v.
/// Gradients are left untouched; callers zero them between steps.
class SgdMomentum {
public:
    SgdMomentum(const OptimizerConfig& cfg, std::vector<Param*> params);

    void step();

    std::vector<std::vector<double>> velocity_snapshot() const { return velocity_; }
    void restore_velocity(const std::vector<std::vector<double>>& v);

private:
    OptimizerConfig cfg_;
    std::vector<Param*> params_;
    std::vector<std::vector<double>> velocity_;
};

} // namespace ggs

#endif
