#include "ggs/contrastive.hpp"

#include <cmath>
#include <limits>

namespace ggs {

void LossConfig::validate() const {
    if (!(temperature > 0.0)) throw ConfigError("loss temperature must be > 0");
    if (formulation != "summed-positives" && formulation != "standard-ntxent")
        throw ConfigError("unknown loss formulation '" + formulation + "'");
}

double similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw UsageError("similarity expects equal-length non-empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

namespace {

int check_batch(const std::vector<std::vector<double>>& projections, int n, int k) {
    if (n < 2) throw ConfigError("contrastive loss needs at least 2 instances");
    if (k < 2) throw ConfigError("contrastive loss needs at least 2 views per instance");
    if (projections.size() != std::size_t(n) * std::size_t(k))
        throw UsageError("projection count does not match n*k");
    const std::size_t dim = projections.front().size();
    if (dim == 0) throw UsageError("empty projection vectors");
    for (const auto& f : projections)
        if (f.size() != dim) throw UsageError("inconsistent projection dimensions");
    return int(dim);
}

std::vector<double> scaled_similarities(const std::vector<std::vector<double>>& f, int total,
                                        double tau) {
    std::vector<double> s(std::size_t(total) * total, 0.0);
    for (int a = 0; a < total; ++a)
        for (int b = a + 1; b < total; ++b) {
            const double v = similarity(f[a], f[b]) / tau;
            s[std::size_t(a) * total + b] = v;
            s[std::size_t(b) * total + a] = v;
        }
    return s;
}

/// Loss of one anchor; optionally also d l / d s(a, b) for every b.
/// Stabilized by subtracting the row max before exponentiation.
double anchor_loss(const std::vector<double>& s, int total, int k, int a, const LossConfig& cfg,
                   std::vector<double>* dlds) {
    const int lo = (a / k) * k, hi = lo + k;
    const double* row = s.data() + std::size_t(a) * total;

    double smax = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < total; ++b)
        if (b != a && row[b] > smax) smax = row[b];

    if (cfg.formulation == "summed-positives") {
        double pos = 0.0, den = 0.0;
        for (int b = 0; b < total; ++b) {
            if (b == a) continue;
            const double e = std::exp(row[b] - smax);
            if (b >= lo && b < hi)
                pos += e;
            else
                den += e;
        }
        if (dlds) {
            dlds->assign(total, 0.0);
            for (int b = 0; b < total; ++b) {
                if (b == a) continue;
                const double e = std::exp(row[b] - smax);
                (*dlds)[b] = (b >= lo && b < hi) ? -e / pos : e / den;
            }
        }
        return std::log(den) - std::log(pos);
    }

    double den = 0.0;
    for (int b = 0; b < total; ++b)
        if (b != a) den += std::exp(row[b] - smax);
    const double logden = std::log(den) + smax;

    double l = 0.0;
    for (int b = lo; b < hi; ++b)
        if (b != a) l += logden - row[b];
    l /= k - 1;

    if (dlds) {
        dlds->assign(total, 0.0);
        for (int b = 0; b < total; ++b) {
            if (b == a) continue;
            double c = std::exp(row[b] - smax) / den;
            if (b >= lo && b < hi) c -= 1.0 / (k - 1);
            (*dlds)[b] = c;
        }
    }
    return l;
}

} // namespace

double instance_loss(const std::vector<std::vector<double>>& projections, int n, int k, int i,
                     int j, const LossConfig& cfg) {
    cfg.validate();
    check_batch(projections, n, k);
    if (i < 0 || i >= n || j < 0 || j >= k) throw UsageError("instance_loss index out of range");
    const int total = n * k;
    const auto s = scaled_similarities(projections, total, cfg.temperature);
    return anchor_loss(s, total, k, i * k + j, cfg, nullptr);
}

BatchLoss batch_loss(const std::vector<std::vector<double>>& projections, int n, int k,
                     const LossConfig& cfg) {
    cfg.validate();
    check_batch(projections, n, k);
    const int total = n * k;
    const auto s = scaled_similarities(projections, total, cfg.temperature);

    BatchLoss out;
    out.instance_losses.resize(total);
    double acc = 0.0;
    for (int a = 0; a < total; ++a) {
        out.instance_losses[a] = anchor_loss(s, total, k, a, cfg, nullptr);
        acc += out.instance_losses[a];
    }
    out.loss = acc / total;
    return out;
}

BatchLossGrad batch_loss_with_grad(const std::vector<std::vector<double>>& projections, int n,
                                   int k, const LossConfig& cfg) {
    cfg.validate();
    const int dim = check_batch(projections, n, k);
    const int total = n * k;
    const auto s = scaled_similarities(projections, total, cfg.temperature);

    BatchLossGrad out;
    out.instance_losses.resize(total);
    out.d_projections.assign(total, std::vector<double>(dim, 0.0));

    const double scale = 1.0 / (cfg.temperature * total); // dL/dl * ds/d(sim)
    std::vector<double> dlds;
    double acc = 0.0;
    for (int a = 0; a < total; ++a) {
        out.instance_losses[a] = anchor_loss(s, total, k, a, cfg, &dlds);
        acc += out.instance_losses[a];

        const auto& fa = projections[a];
        auto& da = out.d_projections[a];
        for (int b = 0; b < total; ++b) {
            const double c = dlds[b] * scale;
            if (c == 0.0) continue;
            const auto& fb = projections[b];
            auto& db = out.d_projections[b];
            for (int d = 0; d < dim; ++d) {
                da[d] += c * fb[d];
                db[d] += c * fa[d];
            }
        }
    }
    out.loss = acc / total;
    return out;
}

} // namespace ggs
