#ifndef GGS_CONTRASTIVE_HPP
#define GGS_CONTRASTIVE_HPP

#include <string>
#include <vector>

#include "ggs/errors.hpp"

namespace ggs {

/// Two formulations over a batch of N instances with K views each:
///  - "summed-positives": the anchor's positives are summed in the numerator
///    and the denominator covers all views of other instances only. The
///    value can be negative.
///  - "standard-ntxent": canonical multi-positive NT-Xent, averaging over
///    positives of -log softmax taken over every view except the anchor.
struct LossConfig {
    double temperature = 0.5;
    std::string formulation = "summed-positives";

    void validate() const;
};

/// Cosine similarity for unit-norm inputs (plain dot product).
double similarity(const std::vector<double>& a, const std::vector<double>& b);

/// l_{ij} for anchor view j of instance i. projections are row-major, index
/// i*k + j, all unit norm.
double instance_loss(const std::vector<std::vector<double>>& projections, int n, int k, int i,
                     int j, const LossConfig& cfg);

struct BatchLoss {
    double loss = 0.0;
    std::vector<double> instance_losses; // l_{ij}, row-major
};

/// L = mean of the N*K instance losses.
BatchLoss batch_loss(const std::vector<std::vector<double>>& projections, int n, int k,
                     const LossConfig& cfg);

struct BatchLossGrad {
    double loss = 0.0;
    std::vector<double> instance_losses;
    std::vector<std::vector<double>> d_projections; // dL/df, row-major
};

/// Loss plus its analytic gradient with respect to every projection.
BatchLossGrad batch_loss_with_grad(const std::vector<std::vector<double>>& projections, int n,
                                   int k, const LossConfig& cfg);

} // namespace ggs

#endif
