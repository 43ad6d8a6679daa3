#include "ggs/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace ggs {

namespace {

constexpr std::uint64_t kTagShuffle = 0x73687566ULL;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

} // namespace

std::string epoch_record_to_json(const EpochRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["stage"] = rec.guided ? "guided" : "warmup";
    j["mean_loss"] = rec.mean_loss;
    if (rec.probe_loss) j["probe_loss"] = *rec.probe_loss;
    j["wall_seconds"] = rec.wall_seconds;
    j["batches"] = rec.batches;
    j["mean_box_area_frac"] = rec.mean_box_area_frac;
    j["fallbacks"] = rec.fallbacks;
    return j.dump();
}

Trainer::Trainer(const TrainConfig& cfg, std::vector<ImagePatch> dataset)
    : cfg_(cfg), data_(std::move(dataset)),
      model_(cfg.encoder, cfg.projector, cfg.seed),
      opt_(cfg.optimizer, model_.params()) {
    cfg_.validate();
    if (data_.size() < 2) throw DataError("training needs at least 2 samples");
    for (const ImagePatch& p : data_)
        if (p.pixels.height() != cfg_.encoder.input_size ||
            p.pixels.width() != cfg_.encoder.input_size ||
            p.pixels.channels() != cfg_.encoder.input_channels)
            throw ConfigError("dataset sample '" + p.source_id +
                              "' does not match the encoder input shape");
}

void Trainer::resume(const Checkpoint& ckpt) {
    if (ckpt.epoch < 0 || ckpt.epoch > cfg_.total_epochs)
        throw DataError("checkpoint epoch outside this run's range");
    restore_params(model_.params(), ckpt.params);
    opt_.restore_velocity(ckpt.velocity);
    epochs_done_ = ckpt.epoch;
}

Checkpoint Trainer::make_checkpoint() {
    Checkpoint ckpt;
    ckpt.config = cfg_;
    ckpt.epoch = epochs_done_;
    ckpt.params = snapshot_params(model_.params());
    ckpt.velocity = opt_.velocity_snapshot();
    return ckpt;
}

double Trainer::train_batch_warmup(const ViewBatch& vb) {
    const int total = vb.n * vb.k;
    std::vector<ContrastiveModel::ViewPass> passes;
    passes.reserve(total);
    std::vector<std::vector<double>> projections;
    projections.reserve(total);
    for (int a = 0; a < total; ++a) {
        passes.push_back(model_.run_view(vb.views[a]));
        projections.push_back(passes.back().projection);
    }

    BatchLossGrad res = batch_loss_with_grad(projections, vb.n, vb.k, cfg_.loss);

    model_.zero_grad();
    for (int a = 0; a < total; ++a) {
        Tensor df = model_.grad_wrt_feature(res.d_projections[a], passes[a], true);
        model_.encoder_backward(df, passes[a]);
    }
    opt_.step();
    return res.loss;
}

double Trainer::train_batch_guided(const ViewBatch& vb, GuidedResampleStats& stats,
                                   double& probe_loss) {
    const int total = vb.n * vb.k;

    // first loss computation: gradients reach the feature maps only
    std::vector<Tensor> features;
    features.reserve(total);
    std::vector<Projector::Saved> saved(total);
    std::vector<std::vector<double>> projections;
    projections.reserve(total);
    for (int a = 0; a < total; ++a) {
        features.push_back(model_.encode(vb.views[a]));
        projections.push_back(model_.projector().forward(features.back(), &saved[a]));
    }
    BatchLossGrad probe = batch_loss_with_grad(projections, vb.n, vb.k, cfg_.loss);
    probe_loss = probe.loss;

    std::vector<Tensor> feature_grads;
    feature_grads.reserve(total);
    for (int a = 0; a < total; ++a)
        feature_grads.push_back(
            model_.projector().backward(probe.d_projections[a], saved[a], false));

    std::vector<Tensor> resampled = guided_resample(vb.views, features, feature_grads,
                                                    cfg_.threshold,
                                                    cfg_.rectify_lam, cfg_.min_crop_px, &stats);
    features.clear();
    feature_grads.clear();

    // second loss computation on the resampled views drives the update
    std::vector<ContrastiveModel::ViewPass> passes;
    passes.reserve(total);
    projections.clear();
    for (int a = 0; a < total; ++a) {
        passes.push_back(model_.run_view(resampled[a]));
        projections.push_back(passes.back().projection);
    }
    BatchLossGrad res = batch_loss_with_grad(projections, vb.n, vb.k, cfg_.loss);

    model_.zero_grad();
    for (int a = 0; a < total; ++a) {
        Tensor df = model_.grad_wrt_feature(res.d_projections[a], passes[a], true);
        model_.encoder_backward(df, passes[a]);
    }
    opt_.step();
    return res.loss;
}

EpochRecord Trainer::run_epoch() {
    if (epochs_done_ >= cfg_.total_epochs) throw UsageError("training already complete");
    const int e_c = epochs_done_ + 1;
    const bool guided = e_c > cfg_.warmup_epochs;
    const double t0 = now_seconds();

    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = Rng::stream(cfg_.seed, {kTagShuffle, std::uint64_t(e_c)});
    shuffle_rng.shuffle(order);

    EpochRecord rec;
    rec.epoch = e_c;
    rec.guided = guided;

    double loss_acc = 0.0, probe_acc = 0.0, area_acc = 0.0;
    for (std::size_t start = 0; start + 1 < order.size(); start += cfg_.batch_size) {
        const std::size_t stop = std::min(order.size(), start + cfg_.batch_size);

        std::vector<std::size_t> indices(order.begin() + start, order.begin() + stop);
        std::vector<ImagePatch> patches;
        patches.reserve(indices.size());
        for (std::size_t idx : indices) patches.push_back(data_[idx]);

        AugmentStream stream{cfg_.seed, std::uint64_t(e_c), std::uint64_t(start)};
        ViewBatch vb = augment_batch(patches, cfg_.augment, stream);

        double loss = 0.0;
        GuidedResampleStats stats;
        if (guided) {
            double probe = 0.0;
            loss = train_batch_guided(vb, stats, probe);
            probe_acc += probe;
            area_acc += stats.mean_box_area_frac;
            rec.fallbacks += stats.fallback_count;
        } else {
            loss = train_batch_warmup(vb);
            area_acc += 1.0;
        }
        if (!std::isfinite(loss))
            throw NumericError("non-finite loss at epoch " + std::to_string(e_c) + ", batch " +
                               std::to_string(rec.batches));
        loss_acc += loss;
        ++rec.batches;

        if (start == 0 && observer_) {
            FirstBatchInfo info;
            info.epoch = e_c;
            info.guided = guided;
            info.indices = &indices;
            info.views = &vb;
            info.resample = guided ? &stats : nullptr;
            observer_(info);
        }
    }

    if (rec.batches == 0) throw DataError("no batch with at least 2 samples this epoch");
    rec.mean_loss = loss_acc / rec.batches;
    if (guided) rec.probe_loss = probe_acc / rec.batches;
    rec.mean_box_area_frac = area_acc / rec.batches;
    rec.wall_seconds = now_seconds() - t0;
    epochs_done_ = e_c;
    return rec;
}

void Trainer::run(const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    save_train_config(cfg_, (fs::path(out_dir) / "resolved_config.json").string());

    std::ofstream log(fs::path(out_dir) / "runlog.jsonl", std::ios::app);
    if (!log) throw DataError("cannot open run log in '" + out_dir + "'");

    while (epochs_done_ < cfg_.total_epochs) {
        EpochRecord rec = run_epoch();
        log << epoch_record_to_json(rec) << '\n';
        log.flush();
        if (rec.epoch % cfg_.checkpoint_every == 0 && rec.epoch != cfg_.total_epochs) {
            Checkpoint ckpt = make_checkpoint();
            save_checkpoint(ckpt, (fs::path(out_dir) / ("ckpt_epoch_" + std::to_string(rec.epoch) +
                                                        ".bin")).string());
        }
    }
    Checkpoint final_ckpt = make_checkpoint();
    save_checkpoint(final_ckpt, (fs::path(out_dir) / "ckpt_final.bin").string());
}

} // namespace ggs
