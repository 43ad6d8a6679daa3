#include <benchmark/benchmark.h>

#include <vector>

#include "ggs/contrastive.hpp"
#include "ggs/lamcore.hpp"
#include "ggs/model.hpp"
#include "ggs/rng.hpp"
#include "ggs/synthdata.hpp"
#include "ggs/tensor.hpp"

namespace {

using namespace ggs;

std::vector<std::vector<double>> random_projections(int n, int k, int dim,
                                                    std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(std::size_t(n) * k);
    for (int i = 0; i < n * k; ++i) {
        std::vector<double> v(dim);
        double ss = 0.0;
        for (double& x : v) {
            x = rng.normal();
            ss += x * x;
        }
        const double inv = 1.0 / std::sqrt(ss);
        for (double& x : v) x *= inv;
        out.push_back(std::move(v));
    }
    return out;
}

void BM_BatchLoss(benchmark::State& state) {
    const int n = int(state.range(0));
    auto projs = random_projections(n, 2, 32, 7);
    LossConfig cfg;
    for (auto _ : state) {
        BatchLoss bl = batch_loss(projs, n, 2, cfg);
        benchmark::DoNotOptimize(bl.loss);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_BatchLoss)->Arg(8)->Arg(32)->Arg(128)->Complexity();

void BM_BatchLossGrad(benchmark::State& state) {
    const int n = int(state.range(0));
    auto projs = random_projections(n, 2, 32, 7);
    LossConfig cfg;
    for (auto _ : state) {
        BatchLossGrad g = batch_loss_with_grad(projs, n, 2, cfg);
        benchmark::DoNotOptimize(g.loss);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_BatchLossGrad)->Arg(8)->Arg(32)->Arg(128)->Complexity();

void BM_LamAndRegion(benchmark::State& state) {
    Rng rng(11);
    Tensor feat(32, 8, 8), grad(32, 8, 8);
    for (double& v : feat.raw()) v = rng.normal();
    for (double& v : grad.raw()) v = 0.01 * rng.normal();
    for (auto _ : state) {
        LossAttentionMap lam = compute_lam(feat, grad, 64, 64, false);
        DiscriminationAttentionRegion dar = extract_dar(lam, 0.5);
        benchmark::DoNotOptimize(dar.box.h);
    }
}
BENCHMARK(BM_LamAndRegion);

void BM_EncoderForward(benchmark::State& state) {
    EncoderSpec enc;
    ProjectorSpec proj;
    proj.output_dim = 32;
    proj.hidden_dim = 64;
    ContrastiveModel model(enc, proj, 3);
    Rng rng(5);
    Tensor view(3, 64, 64);
    for (double& v : view.raw()) v = rng.uniform();
    for (auto _ : state) {
        Tensor f = model.encode(view);
        benchmark::DoNotOptimize(f.data());
    }
}
BENCHMARK(BM_EncoderForward);

void BM_EncoderForwardBackward(benchmark::State& state) {
    EncoderSpec enc;
    ProjectorSpec proj;
    proj.output_dim = 32;
    proj.hidden_dim = 64;
    ContrastiveModel model(enc, proj, 3);
    Rng rng(5);
    Tensor view(3, 64, 64);
    for (double& v : view.raw()) v = rng.uniform();
    std::vector<double> d_proj(32, 0.01);
    for (auto _ : state) {
        ContrastiveModel::ViewPass pass = model.run_view(view);
        Tensor d_feat = model.grad_wrt_feature(d_proj, pass, true);
        model.encoder_backward(d_feat, pass);
        model.zero_grad();
        benchmark::DoNotOptimize(d_feat.data());
    }
}
BENCHMARK(BM_EncoderForwardBackward);

void BM_GenerateMosaic(benchmark::State& state) {
    MosaicSpec spec;
    spec.image_size = int(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        ImagePatch p = generate_mosaic(spec, ++seed);
        benchmark::DoNotOptimize(p.pixels.data());
    }
}
BENCHMARK(BM_GenerateMosaic)->Arg(64)->Arg(128);

} // namespace

BENCHMARK_MAIN();
