// Command line driver for the gradient-guided sampling pipeline:
// data generation, two-stage pretraining, frozen-encoder fine-tuning,
// evaluation, object-count analysis, attention visualization, reporting.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ggs/checkpoint.hpp"
#include "ggs/config.hpp"
#include "ggs/evalseg.hpp"
#include "ggs/io.hpp"
#include "ggs/lamcore.hpp"
#include "ggs/synthdata.hpp"
#include "ggs/trainer.hpp"
#include "ggs/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve_out(const std::string& flag, const std::string& leaf) {
    if (!flag.empty()) return flag;
    const char* root = std::getenv("GGS_OUT_ROOT");
    return (fs::path(root && *root ? root : "ggs-out") / leaf).string();
}

/// Marks a run directory until the command finishes cleanly, so aborted
/// runs are recognizable by the leftover file.
class RunMarker {
public:
    explicit RunMarker(const fs::path& dir) : file_(dir / "INCOMPLETE") {
        fs::create_directories(dir);
        std::ofstream out(file_);
        out << "run in progress\n";
    }
    void done() {
        std::error_code ec;
        fs::remove(file_, ec);
    }

private:
    fs::path file_;
};

std::vector<std::pair<std::string, std::string>> parse_override_pairs(
    const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string tok = extras[i];
        if (tok.rfind("--", 0) != 0)
            throw ggs::UsageError("unexpected argument '" + tok + "' (overrides look like --train.batch_size 32)");
        tok = tok.substr(2);
        std::string value;
        if (auto eq = tok.find('='); eq != std::string::npos) {
            value = tok.substr(eq + 1);
            tok = tok.substr(0, eq);
        } else {
            if (i + 1 >= extras.size())
                throw ggs::UsageError("config override '--" + tok + "' is missing a value");
            value = extras[++i];
        }
        out.emplace_back(tok, value);
    }
    return out;
}

ggs::TrainConfig resolve_config(const std::string& config_path,
                                const std::vector<std::string>& extras,
                                std::optional<std::uint64_t> seed_override,
                                std::optional<ggs::TrainConfig> base = std::nullopt) {
    ggs::TrainConfig cfg = base ? *base : ggs::TrainConfig{};
    if (!config_path.empty()) cfg = ggs::load_train_config(config_path);
    std::string text = ggs::train_config_to_json(cfg);
    for (const auto& [key, value] : parse_override_pairs(extras))
        text = ggs::apply_override(text, key, value);
    cfg = ggs::train_config_from_json(text);
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();
    return cfg;
}

ggs::ContrastiveModel model_from_checkpoint(const ggs::Checkpoint& ckpt) {
    ggs::ContrastiveModel model(ckpt.config.encoder, ckpt.config.projector, ckpt.config.seed);
    ggs::restore_params(model.params(), ckpt.params);
    return model;
}

struct SweepSpec {
    std::string key; // "warmup" or "threshold"
    std::vector<std::string> values;
};

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ggs::UsageError("--sweep expects key=v1,v2,... (keys: warmup, threshold)");
    SweepSpec spec;
    spec.key = text.substr(0, eq);
    if (spec.key != "warmup" && spec.key != "threshold")
        throw ggs::UsageError("unknown sweep key '" + spec.key + "' (keys: warmup, threshold)");
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) spec.values.push_back(item);
    if (spec.values.empty()) throw ggs::UsageError("--sweep has no values");
    return spec;
}

int cmd_make_data(const std::string& out_flag, int count, ggs::MosaicSpec spec,
                  std::uint64_t seed, double holdout) {
    const std::string out = resolve_out(out_flag, "dataset");
    RunMarker marker(out);

    spec.validate();
    if (count < 1) throw ggs::UsageError("--count must be >= 1");

    const int train_count = holdout > 0.0
                                ? std::max(1, count - int(std::lround(holdout * count)))
                                : count;
    std::vector<ggs::ImagePatch> all = ggs::generate_dataset(spec, count, seed);

    std::vector<ggs::ImagePatch> train(all.begin(), all.begin() + train_count);
    ggs::save_dataset(out, train);
    if (train_count < count) {
        std::vector<ggs::ImagePatch> test(all.begin() + train_count, all.end());
        ggs::save_dataset((fs::path(out) / "holdout").string(), test);
    }

    json j;
    j["count"] = count;
    j["holdout_fraction"] = holdout;
    j["seed"] = seed;
    j["image_size"] = spec.image_size;
    j["num_classes"] = spec.num_classes;
    j["tiles_min"] = spec.tiles_min;
    j["tiles_max"] = spec.tiles_max;
    j["texture_seed"] = spec.texture_seed;
    j["distinct_tile_classes"] = spec.distinct_tile_classes;
    j["small_objects_max"] = spec.small_objects_max;
    j["small_object_radius_min"] = spec.small_object_radius_min;
    j["small_object_radius_max"] = spec.small_object_radius_max;
    std::ofstream(fs::path(out) / "resolved_config.json") << j.dump(2) << "\n";

    marker.done();
    std::cout << "wrote " << train_count << " training patches to " << out;
    if (train_count < count)
        std::cout << " and " << count - train_count << " holdout patches to " << out
                  << "/holdout";
    std::cout << "\n";
    return 0;
}

int cmd_pretrain(const ggs::TrainConfig& cfg, const std::string& out_flag,
                 const std::string& resume_path, const std::string& sweep_text) {
    std::vector<ggs::ImagePatch> data =
        ggs::load_dataset(cfg.data.dir, false, cfg.encoder.input_size, cfg.data.limit);

    if (!sweep_text.empty()) {
        const SweepSpec sweep = parse_sweep(sweep_text);
        if (!resume_path.empty())
            throw ggs::UsageError("--resume cannot be combined with --sweep");
        const std::string root = resolve_out(out_flag, "pretrain-sweep");
        for (const std::string& value : sweep.values) {
            ggs::TrainConfig run_cfg = cfg;
            if (sweep.key == "warmup")
                run_cfg.warmup_epochs = std::stoi(value);
            else
                run_cfg.threshold = std::stod(value);
            run_cfg.validate();
            const fs::path run_dir = fs::path(root) / (sweep.key + "_" + value);
            RunMarker marker(run_dir);
            ggs::Trainer trainer(run_cfg, data);
            trainer.run(run_dir.string());
            marker.done();
            std::cout << "finished " << run_dir.string() << "\n";
        }
        return 0;
    }

    const std::string out = resolve_out(out_flag, "pretrain");
    RunMarker marker(out);
    ggs::Trainer trainer(cfg, std::move(data));
    if (!resume_path.empty()) {
        const ggs::Checkpoint ckpt = ggs::load_checkpoint(resume_path);
        trainer.resume(ckpt);
        std::cout << "resumed at epoch " << ckpt.epoch << "\n";
    }
    trainer.run(out);
    marker.done();
    std::cout << "pretraining complete: " << out << "\n";
    return 0;
}

int cmd_finetune(const std::string& ckpt_path, const std::string& data_dir,
                 const std::string& out_flag, const std::vector<std::string>& extras,
                 std::optional<std::uint64_t> seed_override, const std::string& config_path) {
    const ggs::Checkpoint ckpt = ggs::load_checkpoint(ckpt_path);
    ggs::TrainConfig cfg = resolve_config(config_path, extras, seed_override, ckpt.config);
    if (!data_dir.empty()) cfg.data.dir = data_dir;

    std::vector<ggs::ImagePatch> labeled =
        ggs::load_dataset(cfg.data.dir, true, cfg.encoder.input_size, cfg.data.limit);
    const int classes = ggs::scan_num_classes(labeled);
    if (classes < 2) throw ggs::DataError("labeled data shows fewer than 2 classes");

    const std::string out = resolve_out(out_flag, "finetune");
    RunMarker marker(out);
    ggs::save_train_config(cfg, (fs::path(out) / "resolved_config.json").string());

    ggs::SegModel model = ggs::seg_model_from_checkpoint(
        ggs::Checkpoint{cfg, ckpt.epoch, ckpt.params, ckpt.velocity}, classes);
    const ggs::FinetuneResult res =
        ggs::finetune_decoder(model, labeled, cfg.finetune, cfg.seed);
    ggs::save_seg_model(model, (fs::path(out) / "seg_model.bin").string());

    json j;
    j["subset_size"] = res.subset_size;
    j["epochs"] = cfg.finetune.epochs;
    j["encoder_hash_before"] = res.encoder_hash_before;
    j["encoder_hash_after"] = res.encoder_hash_after;
    j["final_loss"] = res.epoch_losses.empty() ? 0.0 : res.epoch_losses.back();
    j["epoch_losses"] = res.epoch_losses;
    std::ofstream(fs::path(out) / "finetune_log.json") << j.dump(2) << "\n";

    marker.done();
    std::cout << "decoder trained on " << res.subset_size << " labeled patches; model at " << out
              << "/seg_model.bin\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_dir,
                 const std::string& out_flag) {
    ggs::SegModel model = ggs::load_seg_model(model_path);
    const std::string dir = data_dir.empty() ? model.config.data.dir : data_dir;
    std::vector<ggs::ImagePatch> test =
        ggs::load_dataset(dir, true, model.config.encoder.input_size, 0);

    const std::string out = resolve_out(out_flag, "evaluate");
    RunMarker marker(out);
    ggs::save_train_config(model.config, (fs::path(out) / "resolved_config.json").string());

    ggs::ConfusionMatrix cm(model.classes);
    const ggs::SegMetrics metrics = ggs::evaluate_dataset(model, test, &cm);

    std::ofstream(fs::path(out) / "metrics.json") << ggs::metrics_to_json(metrics);
    json jc;
    for (int t = 0; t < cm.num_classes(); ++t) {
        json row = json::array();
        for (int p = 0; p < cm.num_classes(); ++p) row.push_back(cm.at(t, p));
        jc.push_back(row);
    }
    std::ofstream(fs::path(out) / "confusion.json") << jc.dump() << "\n";

    const std::string report = ggs::metrics_report(metrics);
    std::ofstream(fs::path(out) / "metrics.txt") << report;
    std::cout << report;

    marker.done();
    return 0;
}

int cmd_analyze_objects(const ggs::TrainConfig& cfg, const std::string& out_flag,
                        const std::string& resume_path) {
    std::vector<ggs::ImagePatch> data =
        ggs::load_dataset(cfg.data.dir, true, cfg.encoder.input_size, cfg.data.limit);

    const std::string out = resolve_out(out_flag, "analyze-objects");
    RunMarker marker(out);
    ggs::save_train_config(cfg, (fs::path(out) / "resolved_config.json").string());

    ggs::Trainer trainer(cfg, std::move(data));
    if (!resume_path.empty()) trainer.resume(ggs::load_checkpoint(resume_path));

    ggs::ObjectCountAnalyzer analyzer(&trainer.dataset());
    trainer.set_first_batch_observer(
        [&analyzer](const ggs::FirstBatchInfo& info) { analyzer.observe(info); });

    std::ofstream log(fs::path(out) / "runlog.jsonl", std::ios::app);
    while (trainer.epochs_done() < cfg.total_epochs) {
        const ggs::EpochRecord rec = trainer.run_epoch();
        json line = json::parse(ggs::epoch_record_to_json(rec));
        if (!analyzer.records().empty() && analyzer.records().back().epoch == rec.epoch) {
            json counts = json::parse(
                ggs::object_count_record_to_json(analyzer.records().back()));
            counts.erase("epoch");
            counts.erase("stage");
            line["object_counts"] = counts;
        }
        log << line.dump() << "\n";
        log.flush();
    }
    ggs::Checkpoint final_ckpt = trainer.make_checkpoint();
    ggs::save_checkpoint(final_ckpt, (fs::path(out) / "ckpt_final.bin").string());

    std::ofstream counts_log(fs::path(out) / "counts.jsonl");
    for (const auto& rec : analyzer.records())
        counts_log << ggs::object_count_record_to_json(rec) << "\n";

    std::vector<ggs::Series> mean_series(3), single_series(3);
    mean_series[0].label = "original";
    mean_series[1].label = "random crop";
    mean_series[2].label = "guided crop";
    for (int i = 0; i < 3; ++i) single_series[i].label = mean_series[i].label;
    for (const auto& rec : analyzer.records()) {
        const double e = rec.epoch;
        mean_series[0].x.push_back(e);
        mean_series[0].y.push_back(rec.mean_original);
        mean_series[1].x.push_back(e);
        mean_series[1].y.push_back(rec.mean_rrc);
        mean_series[2].x.push_back(e);
        mean_series[2].y.push_back(rec.mean_guided);
        single_series[0].x.push_back(e);
        single_series[0].y.push_back(rec.singles_original);
        single_series[1].x.push_back(e);
        single_series[1].y.push_back(rec.singles_rrc);
        single_series[2].x.push_back(e);
        single_series[2].y.push_back(rec.singles_guided);
    }
    if (!analyzer.records().empty()) {
        ggs::write_line_plot((fs::path(out) / "mean_objects.png").string(),
                             "mean ground objects per sample", mean_series);
        ggs::write_line_plot((fs::path(out) / "single_object_samples.png").string(),
                             "single-object samples per first batch", single_series);
    }

    marker.done();
    std::cout << "object-count analysis complete: " << out << "\n";
    return 0;
}

int cmd_visualize_lam(const std::string& ckpt_path, const std::string& data_dir, int count,
                      std::optional<double> threshold, const std::string& out_flag,
                      std::optional<std::uint64_t> seed_override) {
    const ggs::Checkpoint ckpt = ggs::load_checkpoint(ckpt_path);
    ggs::TrainConfig cfg = ckpt.config;
    if (seed_override) cfg.seed = *seed_override;
    const double t = threshold ? *threshold : cfg.threshold;
    if (!(t >= 0.0 && t < 1.0)) throw ggs::ConfigError("threshold must lie in [0, 1)");

    if (count < 2) throw ggs::UsageError("--count must be >= 2 (the loss needs a batch)");
    const std::string dir = data_dir.empty() ? cfg.data.dir : data_dir;
    std::vector<ggs::ImagePatch> data =
        ggs::load_dataset(dir, false, cfg.encoder.input_size, count);
    if (int(data.size()) < 2) throw ggs::DataError("need at least 2 images");

    const std::string out = resolve_out(out_flag, "visualize-lam");
    RunMarker marker(out);

    ggs::ContrastiveModel model = model_from_checkpoint(ckpt);

    const ggs::AugmentStream stream{cfg.seed, 1, 0};
    const ggs::ViewBatch vb = ggs::augment_batch(data, cfg.augment, stream);
    const int total = vb.n * vb.k;

    std::vector<ggs::Tensor> features;
    std::vector<ggs::Projector::Saved> saved(total);
    std::vector<std::vector<double>> projections;
    for (int a = 0; a < total; ++a) {
        features.push_back(model.encode(vb.views[a]));
        projections.push_back(model.projector().forward(features.back(), &saved[a]));
    }
    const ggs::BatchLossGrad grad =
        ggs::batch_loss_with_grad(projections, vb.n, vb.k, cfg.loss);

    json index = json::array();
    for (int i = 0; i < vb.n; ++i)
        for (int j = 0; j < vb.k; ++j) {
            const int a = i * vb.k + j;
            ggs::Tensor dfeat = model.projector().backward(grad.d_projections[a], saved[a], false);
            const ggs::Tensor& view = vb.views[a];
            const int h = view.height(), w = view.width();

            const ggs::LossAttentionMap lam =
                ggs::compute_lam(features[a], dfeat, h, w, cfg.rectify_lam);
            const ggs::DiscriminationAttentionRegion dar = ggs::extract_dar(lam, t);

            ggs::Box box{0, 0, h, w};
            ggs::Tensor cropped = view;
            if (t > 0.0) {
                box = ggs::clamp_box(dar.box, h, w, cfg.min_crop_px);
                ggs::ImagePatch patch;
                patch.pixels = view;
                cropped = ggs::dacrop(patch, dar, cfg.min_crop_px).pixels;
            }

            ggs::Tensor boxed = view;
            ggs::draw_dashed_box(boxed, box);
            const ggs::Tensor strip = ggs::hconcat_panels(
                {view, ggs::overlay_heatmap(view, lam), boxed, cropped});
            const std::string name =
                "lam_" + std::to_string(i) + "_" + std::to_string(j) + ".png";
            ggs::write_image((fs::path(out) / name).string(), strip);

            json entry;
            entry["file"] = name;
            entry["source"] = data[i].source_id;
            entry["view"] = j;
            entry["peak"] = dar.peak;
            entry["fallback"] = dar.full_image_fallback;
            entry["box"] = {box.x, box.y, box.h, box.w};
            index.push_back(entry);
        }
    std::ofstream(fs::path(out) / "index.json") << index.dump(2) << "\n";
    json meta;
    meta["threshold"] = t;
    meta["checkpoint_epoch"] = ckpt.epoch;
    meta["seed"] = cfg.seed;
    std::ofstream(fs::path(out) / "resolved_config.json") << meta.dump(2) << "\n";

    marker.done();
    std::cout << "wrote " << total << " panel strips to " << out << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_flag) {
    if (run_dirs.empty()) throw ggs::UsageError("report needs at least one run directory");

    struct Row {
        std::string dir;
        std::optional<int> warmup;
        std::optional<double> threshold;
        std::optional<std::uint64_t> seed;
        std::optional<double> final_loss;
        std::optional<double> miou, oa, macc;
    };
    std::vector<Row> rows;

    for (const std::string& dir : run_dirs) {
        Row row;
        row.dir = dir;
        const fs::path cfg_path = fs::path(dir) / "resolved_config.json";
        if (fs::exists(cfg_path)) {
            std::ifstream in(cfg_path);
            json j = json::parse(in, nullptr, false);
            if (!j.is_discarded() && j.is_object()) {
                if (j.contains("train") && j["train"].is_object()) {
                    if (j["train"].contains("warmup_epochs"))
                        row.warmup = j["train"]["warmup_epochs"].get<int>();
                    if (j["train"].contains("threshold"))
                        row.threshold = j["train"]["threshold"].get<double>();
                }
                if (j.contains("seed")) row.seed = j["seed"].get<std::uint64_t>();
            }
        }
        const fs::path log_path = fs::path(dir) / "runlog.jsonl";
        if (fs::exists(log_path)) {
            std::ifstream in(log_path);
            std::string line, last;
            while (std::getline(in, line))
                if (!line.empty()) last = line;
            if (!last.empty()) {
                json j = json::parse(last, nullptr, false);
                if (!j.is_discarded() && j.contains("mean_loss"))
                    row.final_loss = j["mean_loss"].get<double>();
            }
        }
        const fs::path metrics_path = fs::path(dir) / "metrics.json";
        if (fs::exists(metrics_path)) {
            std::ifstream in(metrics_path);
            json j = json::parse(in, nullptr, false);
            if (!j.is_discarded() && j.is_object()) {
                if (j.contains("miou")) row.miou = j["miou"].get<double>();
                if (j.contains("oa")) row.oa = j["oa"].get<double>();
                if (j.contains("macc")) row.macc = j["macc"].get<double>();
            }
        }
        rows.push_back(row);
    }

    const std::string out = resolve_out(out_flag, "report");
    RunMarker marker(out);

    std::ostringstream table;
    table << "run                              warmup  thresh   seed    final_loss   mIoU     OA       mAcc\n";
    auto cell = [](const auto& opt, const char* fmt) {
        char buf[32];
        if (!opt) return std::string("-");
        std::snprintf(buf, sizeof(buf), fmt, double(*opt));
        return std::string(buf);
    };
    for (const Row& r : rows) {
        std::string name = r.dir;
        if (name.size() > 32) name = "..." + name.substr(name.size() - 29);
        char line[256];
        std::snprintf(line, sizeof(line), "%-32s %-7s %-7s %-7s %-12s %-8s %-8s %-8s\n",
                      name.c_str(), r.warmup ? std::to_string(*r.warmup).c_str() : "-",
                      cell(r.threshold, "%.2f").c_str(),
                      r.seed ? std::to_string(*r.seed).c_str() : "-",
                      cell(r.final_loss, "%.4f").c_str(), cell(r.miou, "%.4f").c_str(),
                      cell(r.oa, "%.4f").c_str(), cell(r.macc, "%.4f").c_str());
        table << line;
    }
    std::cout << table.str();
    std::ofstream(fs::path(out) / "report.txt") << table.str();

    json jr = json::array();
    for (const Row& r : rows) {
        json j;
        j["dir"] = r.dir;
        if (r.warmup) j["warmup_epochs"] = *r.warmup;
        if (r.threshold) j["threshold"] = *r.threshold;
        if (r.seed) j["seed"] = *r.seed;
        if (r.final_loss) j["final_loss"] = *r.final_loss;
        if (r.miou) j["miou"] = *r.miou;
        if (r.oa) j["oa"] = *r.oa;
        if (r.macc) j["macc"] = *r.macc;
        jr.push_back(j);
    }
    std::ofstream(fs::path(out) / "report.json") << jr.dump(2) << "\n";

    ggs::Series by_warmup{"mIoU", {}, {}}, by_threshold{"mIoU", {}, {}};
    for (const Row& r : rows) {
        if (r.miou && r.warmup) {
            by_warmup.x.push_back(double(*r.warmup));
            by_warmup.y.push_back(*r.miou);
        }
        if (r.miou && r.threshold) {
            by_threshold.x.push_back(*r.threshold);
            by_threshold.y.push_back(*r.miou);
        }
    }
    if (by_warmup.x.size() >= 2)
        ggs::write_line_plot((fs::path(out) / "miou_vs_warmup.png").string(),
                             "mIoU vs warm-up epochs", {by_warmup});
    if (by_threshold.x.size() >= 2)
        ggs::write_line_plot((fs::path(out) / "miou_vs_threshold.png").string(),
                             "mIoU vs threshold", {by_threshold});

    marker.done();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-guided sampling for self-supervised pretraining"};
    app.require_subcommand(1);

    std::string config_path, out_flag, data_flag, resume_path, sweep_text, ckpt_path, model_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<double> threshold_flag;
    int count = 256;
    double holdout = 0.0;
    int viz_count = 8;
    std::vector<std::string> run_dirs;
    ggs::MosaicSpec mosaic;

    auto* mk = app.add_subcommand("make-data", "generate a labeled synthetic mosaic dataset");
    mk->add_option("--out", out_flag, "output directory");
    mk->add_option("--count", count, "number of patches")->capture_default_str();
    mk->add_option("--holdout", holdout, "fraction reserved as a holdout split")
        ->check(CLI::Range(0.0, 0.9))
        ->capture_default_str();
    mk->add_option("--image-size", mosaic.image_size)->capture_default_str();
    mk->add_option("--num-classes", mosaic.num_classes)->capture_default_str();
    mk->add_option("--tiles-min", mosaic.tiles_min)->capture_default_str();
    mk->add_option("--tiles-max", mosaic.tiles_max)->capture_default_str();
    mk->add_option("--small-objects", mosaic.small_objects_max)->capture_default_str();
    mk->add_flag("--distinct-tiles", mosaic.distinct_tile_classes,
                 "force distinct classes across tiles");
    std::uint64_t mk_seed = 1;
    mk->add_option("--seed", mk_seed)->capture_default_str();

    auto* pt = app.add_subcommand("pretrain", "two-stage contrastive pretraining");
    pt->add_option("--config", config_path, "json config file");
    pt->add_option("--out", out_flag);
    pt->add_option("--data", data_flag, "dataset directory (overrides data.dir)");
    pt->add_option("--seed", seed_override, "master seed (overrides config)");
    pt->add_option("--resume", resume_path, "checkpoint to resume from");
    pt->add_option("--sweep", sweep_text, "warmup=v1,v2,... or threshold=v1,v2,...");
    pt->allow_extras();

    auto* ft = app.add_subcommand("finetune", "train a segmentation decoder on a frozen encoder");
    ft->add_option("--checkpoint", ckpt_path)->required();
    ft->add_option("--config", config_path, "json config file (defaults to the checkpoint's)");
    ft->add_option("--data", data_flag, "labeled dataset directory");
    ft->add_option("--out", out_flag);
    ft->add_option("--seed", seed_override);
    ft->allow_extras();

    auto* ev = app.add_subcommand("evaluate", "evaluate a segmentation model");
    ev->add_option("--model", model_path)->required();
    ev->add_option("--data", data_flag, "labeled test dataset directory");
    ev->add_option("--out", out_flag);

    auto* an = app.add_subcommand("analyze-objects", "object-count statistics per epoch");
    an->add_option("--config", config_path);
    an->add_option("--data", data_flag, "labeled dataset directory");
    an->add_option("--out", out_flag);
    an->add_option("--seed", seed_override);
    an->add_option("--checkpoint", resume_path, "checkpoint to resume from");
    an->allow_extras();

    auto* vz = app.add_subcommand("visualize-lam", "attention map and crop box panels");
    vz->add_option("--checkpoint", ckpt_path)->required();
    vz->add_option("--data", data_flag, "image directory");
    vz->add_option("--count", viz_count, "images in the probe batch")->capture_default_str();
    vz->add_option("--threshold", threshold_flag, "region threshold (defaults to config)");
    vz->add_option("--out", out_flag);
    vz->add_option("--seed", seed_override);

    auto* rp = app.add_subcommand("report", "aggregate run directories into one table");
    rp->add_option("dirs", run_dirs, "run directories");
    rp->add_option("--out", out_flag);

    try {
        app.parse(argc, argv);

        if (mk->parsed()) return cmd_make_data(out_flag, count, mosaic, mk_seed, holdout);

        if (pt->parsed()) {
            ggs::TrainConfig cfg = resolve_config(config_path, pt->remaining(), seed_override);
            if (!data_flag.empty()) cfg.data.dir = data_flag;
            return cmd_pretrain(cfg, out_flag, resume_path, sweep_text);
        }
        if (ft->parsed())
            return cmd_finetune(ckpt_path, data_flag, out_flag, ft->remaining(), seed_override,
                                config_path);
        if (ev->parsed()) return cmd_evaluate(model_path, data_flag, out_flag);
        if (an->parsed()) {
            ggs::TrainConfig cfg = resolve_config(config_path, an->remaining(), seed_override);
            if (!data_flag.empty()) cfg.data.dir = data_flag;
            return cmd_analyze_objects(cfg, out_flag, resume_path);
        }
        if (vz->parsed())
            return cmd_visualize_lam(ckpt_path, data_flag, viz_count, threshold_flag, out_flag,
                                     seed_override);
        if (rp->parsed()) return cmd_report(run_dirs, out_flag);

        throw ggs::UsageError("no subcommand");
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
