#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "ggs/evalseg.hpp"
#include "ggs/synthdata.hpp"

using namespace ggs;
namespace fs = std::filesystem;

namespace {

Mask random_mask(int h, int w, int classes, Rng& rng) {
    Mask m(h, w);
    for (auto& v : m.raw()) v = int(rng.uniform_index(classes));
    return m;
}

// per-pixel set-based reference: intersections and unions counted from the
// rasters directly, no confusion matrix involved
SegMetrics oracle_metrics(const std::vector<std::pair<Mask, Mask>>& pairs, int classes) {
    std::vector<long long> inter(classes, 0), in_truth(classes, 0), in_pred(classes, 0);
    long long agree = 0, total = 0;
    for (const auto& [truth, pred] : pairs)
        for (int y = 0; y < truth.height(); ++y)
            for (int x = 0; x < truth.width(); ++x) {
                const int t = truth.at(y, x), p = pred.at(y, x);
                ++in_truth[t];
                ++in_pred[p];
                if (t == p) {
                    ++inter[t];
                    ++agree;
                }
                ++total;
            }
    SegMetrics m;
    double iou_sum = 0.0, acc_sum = 0.0;
    int iou_n = 0, acc_n = 0;
    for (int c = 0; c < classes; ++c) {
        const long long uni = in_truth[c] + in_pred[c] - inter[c];
        if (uni > 0) {
            m.iou.push_back(double(inter[c]) / double(uni));
            iou_sum += m.iou.back();
            ++iou_n;
        } else {
            m.iou.push_back(std::nan(""));
        }
        if (in_truth[c] > 0) {
            m.acc.push_back(double(inter[c]) / double(in_truth[c]));
            acc_sum += m.acc.back();
            ++acc_n;
        } else {
            m.acc.push_back(std::nan(""));
        }
    }
    m.miou = iou_sum / iou_n;
    m.oa = double(agree) / double(total);
    m.macc = acc_sum / acc_n;
    return m;
}

TrainConfig probe_config() {
    TrainConfig cfg;
    cfg.seed = 4;
    cfg.encoder.feature_dim = 8;
    cfg.encoder.stride = 4;
    cfg.encoder.input_size = 16;
    cfg.projector.output_dim = 6;
    cfg.projector.hidden_dim = 8;
    cfg.finetune.epochs = 12;
    cfg.finetune.batch_size = 4;
    cfg.finetune.subset_fraction = 0.6;
    cfg.finetune.learning_rate = 0.2;
    cfg.finetune.decoder_hidden = 8;
    return cfg;
}

std::vector<ImagePatch> labeled_data(int n, std::uint64_t seed = 50) {
    MosaicSpec spec;
    spec.image_size = 16;
    spec.num_classes = 4;
    return generate_dataset(spec, n, seed);
}

} // namespace

TEST_SUITE("evalseg") {

TEST_CASE("hand-checked two-class example") {
    // truth row 0: one pixel right, one called class 1; truth row 1: both
    // class-1 pixels correct
    ConfusionMatrix cm(2);
    cm.add(0, 0, 1);
    cm.add(0, 1, 1);
    cm.add(1, 1, 2);
    SegMetrics m = metrics_from_confusion(cm);
    CHECK(m.iou[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.iou[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.miou == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(m.oa == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(m.acc[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.acc[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.macc == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("confusion-matrix metrics equal the per-pixel oracle") {
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int classes = 2 + int(rng.uniform_index(4));
        std::vector<std::pair<Mask, Mask>> pairs;
        ConfusionMatrix cm(classes);
        for (int i = 0; i < 3; ++i) {
            Mask truth = random_mask(7, 9, classes, rng);
            Mask pred = random_mask(7, 9, classes, rng);
            cm.add_image(truth, pred);
            pairs.emplace_back(truth, pred);
        }
        SegMetrics got = metrics_from_confusion(cm);
        SegMetrics want = oracle_metrics(pairs, classes);
        CHECK(got.oa == want.oa);
        CHECK(got.miou == want.miou);
        CHECK(got.macc == want.macc);
        for (int c = 0; c < classes; ++c) {
            CHECK(std::isnan(got.iou[c]) == std::isnan(want.iou[c]));
            if (!std::isnan(want.iou[c])) CHECK(got.iou[c] == want.iou[c]);
            CHECK(std::isnan(got.acc[c]) == std::isnan(want.acc[c]));
            if (!std::isnan(want.acc[c])) CHECK(got.acc[c] == want.acc[c]);
        }
    }
}

TEST_CASE("classes absent from truth and prediction are excluded") {
    ConfusionMatrix cm(4);
    cm.add(0, 0, 10);
    cm.add(1, 0, 2);
    cm.add(1, 1, 8);
    // classes 2 and 3 never appear
    SegMetrics m = metrics_from_confusion(cm);
    CHECK(std::isnan(m.iou[2]));
    CHECK(std::isnan(m.iou[3]));
    CHECK(std::isnan(m.acc[2]));
    const double iou0 = 10.0 / 12.0, iou1 = 8.0 / 10.0;
    CHECK(m.miou == doctest::Approx((iou0 + iou1) / 2.0).epsilon(1e-15));
    CHECK(m.macc == doctest::Approx((1.0 + 0.8) / 2.0).epsilon(1e-15));
}

TEST_CASE("a predicted-only class counts for iou but not for acc") {
    ConfusionMatrix cm(3);
    cm.add(0, 0, 4);
    cm.add(0, 2, 4); // class 2 predicted, never true
    cm.add(1, 1, 2);
    SegMetrics m = metrics_from_confusion(cm);
    CHECK(m.iou[2] == 0.0); // defined: union is non-empty
    CHECK(std::isnan(m.acc[2]));
    CHECK(m.miou == doctest::Approx((0.5 + 1.0 + 0.0) / 3.0).epsilon(1e-15));
    CHECK(m.macc == doctest::Approx((0.5 + 1.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("empty matrices and out-of-range labels are rejected") {
    ConfusionMatrix cm(3);
    CHECK_THROWS_AS(metrics_from_confusion(cm), UndefinedMetricsError);
    CHECK_THROWS_AS(cm.add(3, 0), DataError);
    CHECK_THROWS_AS(cm.add(0, -1), DataError);
    Mask a(2, 2), b(3, 2);
    CHECK_THROWS_AS(cm.add_image(a, b), UsageError);
}

TEST_CASE("merge equals single-pass accumulation") {
    Rng rng(71);
    ConfusionMatrix whole(3), left(3), right(3);
    for (int i = 0; i < 6; ++i) {
        Mask t = random_mask(5, 5, 3, rng), p = random_mask(5, 5, 3, rng);
        whole.add_image(t, p);
        (i < 3 ? left : right).add_image(t, p);
    }
    left.merge(right);
    for (int t = 0; t < 3; ++t)
        for (int p = 0; p < 3; ++p) CHECK(left.at(t, p) == whole.at(t, p));
}

TEST_CASE("consistent relabeling permutes per-class metrics") {
    Rng rng(81);
    Mask truth = random_mask(8, 8, 3, rng), pred = random_mask(8, 8, 3, rng);
    ConfusionMatrix cm(3);
    cm.add_image(truth, pred);
    SegMetrics base = metrics_from_confusion(cm);

    const int perm[3] = {2, 0, 1};
    Mask truth2 = truth, pred2 = pred;
    for (auto& v : truth2.raw()) v = perm[v];
    for (auto& v : pred2.raw()) v = perm[v];
    ConfusionMatrix cm2(3);
    cm2.add_image(truth2, pred2);
    SegMetrics moved = metrics_from_confusion(cm2);
    for (int c = 0; c < 3; ++c) {
        CHECK(moved.iou[perm[c]] == doctest::Approx(base.iou[c]).epsilon(1e-15));
        CHECK(moved.acc[perm[c]] == doctest::Approx(base.acc[c]).epsilon(1e-15));
    }
    CHECK(moved.oa == doctest::Approx(base.oa).epsilon(1e-15));
    CHECK(moved.miou == doctest::Approx(base.miou).epsilon(1e-12));
}

TEST_CASE("report and json render undefined entries distinctly") {
    ConfusionMatrix cm(3);
    cm.add(0, 0, 3);
    cm.add(1, 1, 1);
    SegMetrics m = metrics_from_confusion(cm);
    const std::string rep = metrics_report(m);
    CHECK(rep.find("OA / mIoU / mAcc") != std::string::npos);
    const std::string js = metrics_to_json(m);
    CHECK(js.find("null") != std::string::npos); // NaN entries become null
}

TEST_CASE("decoder output covers the image and classes") {
    TrainConfig cfg = probe_config();
    SegModel model(cfg, 4);
    auto data = labeled_data(1);
    Tensor logits = model.logits(data[0].pixels);
    CHECK(logits.channels() == 4);
    CHECK(logits.height() == 16);
    CHECK(logits.width() == 16);
    Mask pred = model.predict(data[0].pixels);
    CHECK(pred.height() == 16);
    for (auto v : pred.raw()) {
        CHECK(v >= 0);
        CHECK(v < 4);
    }
}

TEST_CASE("decoder fine-tuning trains the head and never touches the encoder") {
    TrainConfig cfg = probe_config();
    SegModel model(cfg, 4);
    const std::uint64_t enc_before = model.backbone.param_hash();
    auto data = labeled_data(10);
    FinetuneResult res = finetune_decoder(model, data, cfg.finetune, cfg.seed);

    CHECK(res.encoder_hash_before == res.encoder_hash_after);
    CHECK(model.backbone.param_hash() == enc_before);
    CHECK(res.subset_size == 6); // ceil(0.6 * 10)
    REQUIRE(int(res.epoch_losses.size()) == cfg.finetune.epochs);
    for (double l : res.epoch_losses) CHECK(std::isfinite(l));
    CHECK(res.epoch_losses.back() < res.epoch_losses.front());
}

TEST_CASE("subset selection keeps at least one sample") {
    TrainConfig cfg = probe_config();
    cfg.finetune.subset_fraction = 0.01;
    cfg.finetune.epochs = 2;
    SegModel model(cfg, 4);
    FinetuneResult res = finetune_decoder(model, labeled_data(10), cfg.finetune, cfg.seed);
    CHECK(res.subset_size == 1);
}

TEST_CASE("masks with labels beyond the decoder's classes are rejected") {
    TrainConfig cfg = probe_config();
    SegModel model(cfg, 3); // data holds 4 classes
    auto data = labeled_data(8);
    bool has_high = false;
    for (const auto& p : data)
        for (auto v : p.mask.raw())
            if (v >= 3) has_high = true;
    REQUIRE(has_high);
    CHECK_THROWS_AS(finetune_decoder(model, data, cfg.finetune, cfg.seed), ConfigError);
}

TEST_CASE("segmentation model survives a disk round trip") {
    const fs::path dir = fs::temp_directory_path() / "ggs_test_segmodel";
    fs::remove_all(dir);
    fs::create_directories(dir);

    TrainConfig cfg = probe_config();
    cfg.finetune.epochs = 3;
    SegModel model(cfg, 4);
    auto data = labeled_data(6);
    finetune_decoder(model, data, cfg.finetune, cfg.seed);

    const std::string path = (dir / "m.bin").string();
    save_seg_model(model, path);
    SegModel back = load_seg_model(path);
    CHECK(back.classes == 4);
    for (const auto& p : data)
        CHECK(back.predict(p.pixels).raw() == model.predict(p.pixels).raw());

    CHECK_THROWS_AS(load_seg_model((dir / "missing.bin").string()), DataError);
    fs::remove_all(dir);
}

TEST_CASE("dataset evaluation accumulates one matrix over all pixels") {
    TrainConfig cfg = probe_config();
    SegModel model(cfg, 4);
    auto data = labeled_data(5);
    ConfusionMatrix cm(4);
    SegMetrics m = evaluate_dataset(model, data, &cm);
    CHECK(cm.total() == 5 * 16 * 16);
    CHECK(m.oa >= 0.0);
    CHECK(m.oa <= 1.0);

    auto unlabeled = data;
    for (auto& p : unlabeled) p.mask = Mask();
    CHECK_THROWS_AS(evaluate_dataset(model, unlabeled), DataError);
}

TEST_CASE("scan_num_classes finds the largest label") {
    auto data = labeled_data(6);
    CHECK(scan_num_classes(data) == 4);
    for (auto& p : data) p.mask = Mask();
    CHECK(scan_num_classes(data) == 0);
}

TEST_CASE("object counts follow the three arms") {
    MosaicSpec spec;
    spec.image_size = 16;
    spec.num_classes = 4;
    auto data = generate_dataset(spec, 6, 33);

    TrainConfig cfg = probe_config();
    cfg.total_epochs = 2;
    cfg.warmup_epochs = 1;
    cfg.batch_size = 6;
    cfg.threshold = 0.5;
    cfg.augment = AugmentConfig::identity(2);

    Trainer trainer(cfg, data);
    ObjectCountAnalyzer analyzer(&trainer.dataset());
    trainer.set_first_batch_observer(
        [&](const FirstBatchInfo& info) { analyzer.observe(info); });
    trainer.run_epoch();
    trainer.run_epoch();

    REQUIRE(analyzer.records().size() == 2);
    const ObjectCountRecord& warm = analyzer.records()[0];
    CHECK_FALSE(warm.guided);
    CHECK(warm.samples == 6);
    CHECK(warm.views == 12);
    // identity views carry the full source mask, so all three arms agree
    CHECK(warm.mean_rrc == doctest::Approx(warm.mean_original).epsilon(1e-12));
    CHECK(warm.mean_guided == doctest::Approx(warm.mean_rrc).epsilon(1e-12));
    CHECK(warm.singles_rrc == warm.singles_original * 2); // per view vs per sample

    const ObjectCountRecord& guided = analyzer.records()[1];
    CHECK(guided.guided);
    CHECK(guided.mean_guided <= guided.mean_rrc + 1e-12); // crops cannot add classes
}

TEST_CASE("object counting requires masks") {
    auto data = labeled_data(4);
    for (auto& p : data) p.mask = Mask();
    TrainConfig cfg = probe_config();
    cfg.total_epochs = 1;
    cfg.warmup_epochs = 1;
    cfg.batch_size = 4;
    Trainer trainer(cfg, data);
    ObjectCountAnalyzer analyzer(&trainer.dataset());
    trainer.set_first_batch_observer(
        [&](const FirstBatchInfo& info) { analyzer.observe(info); });
    CHECK_THROWS_AS(trainer.run_epoch(), DataError);
}

} // TEST_SUITE
