#include "ggs/evalseg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ggs/imageops.hpp"
#include "json.hpp"

namespace ggs {

namespace {

constexpr std::uint64_t kTagDecoderInit = 0x64656364ULL;
constexpr std::uint64_t kTagSubset = 0x73756273ULL;
constexpr std::uint64_t kTagFtShuffle = 0x66747368ULL;

std::uint64_t params_hash(const std::vector<Param*>& ps) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Param* p : ps) h = hash_doubles(p->value, h);
    return h;
}

} // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes) : nc_(num_classes) {
    if (num_classes < 1) throw UsageError("confusion matrix needs at least one class");
    counts_.assign(std::size_t(nc_) * nc_, 0);
}

void ConfusionMatrix::add(int truth, int pred, long long count) {
    if (truth < 0 || truth >= nc_ || pred < 0 || pred >= nc_)
        throw DataError("class index outside the confusion matrix");
    if (count < 0) throw UsageError("negative confusion count");
    counts_[std::size_t(truth) * nc_ + pred] += count;
}

void ConfusionMatrix::add_image(const Mask& truth, const Mask& pred) {
    if (!truth.same_shape(pred)) throw UsageError("truth and prediction shapes differ");
    const auto& t = truth.raw();
    const auto& p = pred.raw();
    for (std::size_t i = 0; i < t.size(); ++i) add(t[i], p[i]);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.nc_ != nc_) throw UsageError("confusion matrix class counts differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

long long ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

SegMetrics metrics_from_confusion(const ConfusionMatrix& cm) {
    const int nc = cm.num_classes();
    const long long tot = cm.total();
    if (tot == 0) throw UndefinedMetricsError("confusion matrix holds no pixels");

    SegMetrics m;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.iou.assign(nc, nan);
    m.acc.assign(nc, nan);

    long long trace = 0;
    double iou_sum = 0.0, acc_sum = 0.0;
    int iou_n = 0, acc_n = 0;
    for (int c = 0; c < nc; ++c) {
        long long row = 0, col = 0;
        for (int k = 0; k < nc; ++k) {
            row += cm.at(c, k);
            col += cm.at(k, c);
        }
        const long long diag = cm.at(c, c);
        trace += diag;
        if (row + col > 0) { // class present somewhere
            m.iou[c] = double(diag) / double(row + col - diag);
            iou_sum += m.iou[c];
            ++iou_n;
        }
        if (row > 0) {
            m.acc[c] = double(diag) / double(row);
            acc_sum += m.acc[c];
            ++acc_n;
        }
    }
    m.oa = double(trace) / double(tot);
    m.miou = iou_sum / iou_n;
    m.macc = acc_sum / acc_n;
    return m;
}

std::string metrics_report(const SegMetrics& m) {
    std::ostringstream os;
    os << "class        IoU        Acc\n";
    char line[96];
    for (std::size_t c = 0; c < m.iou.size(); ++c) {
        const bool has_iou = std::isfinite(m.iou[c]);
        const bool has_acc = std::isfinite(m.acc[c]);
        std::snprintf(line, sizeof(line), "%5zu    %7s    %7s\n", c,
                      has_iou ? (std::to_string(m.iou[c]).substr(0, 6)).c_str() : "-",
                      has_acc ? (std::to_string(m.acc[c]).substr(0, 6)).c_str() : "-");
        os << line;
    }
    std::snprintf(line, sizeof(line), "OA / mIoU / mAcc: %.4f / %.4f / %.4f\n", m.oa, m.miou,
                  m.macc);
    os << line;
    return os.str();
}

std::string metrics_to_json(const SegMetrics& m) {
    nlohmann::json j;
    j["oa"] = m.oa;
    j["miou"] = m.miou;
    j["macc"] = m.macc;
    j["iou"] = m.iou; // NaN serializes as null
    j["acc"] = m.acc;
    return j.dump(2) + "\n";
}

SegDecoder::SegDecoder(int feature_dim, int hidden, int num_classes, std::uint64_t seed)
    : classes_(num_classes), conv1_(feature_dim, hidden, 3, 1, 1, true),
      conv2_(hidden, num_classes, 1, 1, 0, true) {
    if (num_classes < 2) throw ConfigError("decoder needs at least 2 classes");
    Rng rng = Rng::stream(seed, {kTagDecoderInit});
    conv1_.init(rng);
    conv2_.init(rng);
}

Tensor SegDecoder::forward(const Tensor& feature, Tape* tape) {
    Tensor x = conv1_.forward(feature, tape);
    x = relu_.forward(x, tape);
    return conv2_.forward(x, tape);
}

void SegDecoder::backward(const Tensor& d_logits, Tape& tape) {
    Tensor d = conv2_.backward(d_logits, tape, true, true);
    d = relu_.backward(d, tape, true, true);
    conv1_.backward(d, tape, true, false);
}

std::vector<Param*> SegDecoder::params() {
    auto p = conv1_.params();
    for (auto* q : conv2_.params()) p.push_back(q);
    return p;
}

SegModel::SegModel(const TrainConfig& cfg, int num_classes)
    : config(cfg), classes(num_classes), backbone(cfg.encoder, cfg.projector, cfg.seed),
      decoder(cfg.encoder.feature_dim, cfg.finetune.decoder_hidden, num_classes, cfg.seed) {}

Tensor SegModel::logits(const Tensor& image) {
    Tensor f = backbone.encode(image);
    Tensor low = decoder.forward(f, nullptr);
    return bilinear_resize(low, image.height(), image.width());
}

Mask SegModel::predict(const Tensor& image) {
    Tensor lg = logits(image);
    Mask out(lg.height(), lg.width());
    for (int y = 0; y < lg.height(); ++y)
        for (int x = 0; x < lg.width(); ++x) {
            int best = 0;
            double bv = lg.at(0, y, x);
            for (int c = 1; c < lg.channels(); ++c)
                if (lg.at(c, y, x) > bv) {
                    bv = lg.at(c, y, x);
                    best = c;
                }
            out.at(y, x) = best;
        }
    return out;
}

SegModel seg_model_from_checkpoint(const Checkpoint& ckpt, int num_classes) {
    SegModel model(ckpt.config, num_classes);
    restore_params(model.backbone.params(), ckpt.params);
    return model;
}

namespace {

constexpr char kSegMagic[8] = {'G', 'G', 'S', 'S', 'E', 'G', 'M', '1'};

} // namespace

void save_seg_model(SegModel& model, const std::string& path) {
    std::string buf;
    buf.append(kSegMagic, 8);

    const std::string cfg = train_config_to_json(model.config);
    std::uint64_t v = cfg.size();
    buf.append(reinterpret_cast<const char*>(&v), 8);
    buf.append(cfg);
    v = std::uint64_t(model.classes);
    buf.append(reinterpret_cast<const char*>(&v), 8);

    auto all = model.backbone.params();
    for (auto* p : model.decoder.params()) all.push_back(p);
    v = all.size();
    buf.append(reinterpret_cast<const char*>(&v), 8);
    for (const Param* p : all) {
        v = p->value.size();
        buf.append(reinterpret_cast<const char*>(&v), 8);
        buf.append(reinterpret_cast<const char*>(p->value.data()),
                   p->value.size() * sizeof(double));
    }
    v = hash_bytes(buf.data(), buf.size());
    buf.append(reinterpret_cast<const char*>(&v), 8);

    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw DataError("short write on model file '" + path + "'");
}

SegModel load_seg_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 24 || std::memcmp(buf.data(), kSegMagic, 8) != 0)
        throw DataError("'" + path + "' is not a segmentation model file");

    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
    if (stored != hash_bytes(buf.data(), buf.size() - 8))
        throw DataError("model file '" + path + "' failed its integrity check");

    std::size_t pos = 8;
    auto read_u64 = [&]() {
        if (pos + 8 > buf.size()) throw DataError("model file truncated");
        std::uint64_t x;
        std::memcpy(&x, buf.data() + pos, 8);
        pos += 8;
        return x;
    };

    const std::uint64_t cfg_len = read_u64();
    if (pos + cfg_len > buf.size()) throw DataError("model file truncated");
    const TrainConfig cfg = train_config_from_json(buf.substr(pos, cfg_len));
    pos += cfg_len;
    const int classes = int(read_u64());

    SegModel model(cfg, classes);
    auto all = model.backbone.params();
    for (auto* p : model.decoder.params()) all.push_back(p);

    const std::uint64_t np = read_u64();
    if (np != all.size()) throw DataError("model file parameter count mismatch");
    for (Param* p : all) {
        const std::uint64_t n = read_u64();
        if (n != p->value.size()) throw DataError("model file parameter shape mismatch");
        if (pos + n * sizeof(double) > buf.size()) throw DataError("model file truncated");
        std::memcpy(p->value.data(), buf.data() + pos, n * sizeof(double));
        pos += n * sizeof(double);
    }
    return model;
}

FinetuneResult finetune_decoder(SegModel& model, const std::vector<ImagePatch>& labeled,
                                const FinetuneConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (labeled.empty()) throw DataError("fine-tuning needs labeled samples");
    for (const ImagePatch& p : labeled) {
        if (!p.has_mask()) throw DataError("sample '" + p.source_id + "' lacks a mask");
        for (std::int32_t v : p.mask.raw())
            if (v < 0 || v >= model.classes)
                throw ConfigError("mask class " + std::to_string(v) +
                                  " does not fit a " + std::to_string(model.classes) +
                                  "-class decoder");
    }

    std::vector<std::size_t> order(labeled.size());
    std::iota(order.begin(), order.end(), 0);
    Rng subset_rng = Rng::stream(seed, {kTagSubset});
    subset_rng.shuffle(order);
    const std::size_t keep = std::max<std::size_t>(
        1, std::size_t(std::ceil(cfg.subset_fraction * double(labeled.size()))));
    order.resize(std::min(order.size(), keep));

    FinetuneResult res;
    res.subset_size = int(order.size());
    res.encoder_hash_before = params_hash(model.backbone.encoder().params());

    SgdMomentum opt(OptimizerConfig{"sgd-momentum", cfg.learning_rate, cfg.momentum, 0.0},
                    model.decoder.params());
    const auto dec_params = model.decoder.params();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::size_t> shuffled = order;
        Rng erng = Rng::stream(seed, {kTagFtShuffle, std::uint64_t(epoch)});
        erng.shuffle(shuffled);

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < shuffled.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(shuffled.size(), start + std::size_t(cfg.batch_size));

            long long px_total = 0;
            for (std::size_t b = start; b < stop; ++b)
                px_total += (long long)labeled[shuffled[b]].mask.size();

            for (Param* p : dec_params) p->zero_grad();

            double batch_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const ImagePatch& sample = labeled[shuffled[b]];
                const int ih = sample.pixels.height(), iw = sample.pixels.width();

                Tensor f = model.backbone.encode(sample.pixels);
                Tape tape;
                Tensor low = model.decoder.forward(f, &tape);
                Tensor lg = bilinear_resize(low, ih, iw);

                Tensor dlg(lg.channels(), ih, iw);
                const int nc = lg.channels();
                for (int y = 0; y < ih; ++y)
                    for (int x = 0; x < iw; ++x) {
                        double mx = lg.at(0, y, x);
                        for (int c = 1; c < nc; ++c) mx = std::max(mx, lg.at(c, y, x));
                        double denom = 0.0;
                        for (int c = 0; c < nc; ++c) denom += std::exp(lg.at(c, y, x) - mx);
                        const int gt = sample.mask.at(y, x);
                        batch_loss -= lg.at(gt, y, x) - mx - std::log(denom);
                        for (int c = 0; c < nc; ++c) {
                            const double p = std::exp(lg.at(c, y, x) - mx) / denom;
                            dlg.at(c, y, x) = (p - (c == gt ? 1.0 : 0.0)) / double(px_total);
                        }
                    }

                Tensor dlow(low.channels(), low.height(), low.width());
                bilinear_resize_backward(dlg, dlow);
                model.decoder.backward(dlow, tape);
            }
            opt.step();
            epoch_loss += batch_loss / double(px_total);
            ++batches;
        }
        res.epoch_losses.push_back(epoch_loss / batches);
    }

    res.encoder_hash_after = params_hash(model.backbone.encoder().params());
    if (res.encoder_hash_before != res.encoder_hash_after)
        throw ModelError("encoder changed during decoder fine-tuning");
    return res;
}

SegMetrics evaluate_dataset(SegModel& model, const std::vector<ImagePatch>& test,
                            ConfusionMatrix* cm_out) {
    if (test.empty()) throw DataError("evaluation needs at least one sample");
    ConfusionMatrix cm(model.classes);
    for (const ImagePatch& p : test) {
        if (!p.has_mask()) throw DataError("sample '" + p.source_id + "' lacks a mask");
        cm.add_image(p.mask, model.predict(p.pixels));
    }
    if (cm_out) *cm_out = cm;
    return metrics_from_confusion(cm);
}

int scan_num_classes(const std::vector<ImagePatch>& patches) {
    std::int32_t top = -1;
    for (const ImagePatch& p : patches)
        for (std::int32_t v : p.mask.raw()) top = std::max(top, v);
    return int(top) + 1;
}

std::string object_count_record_to_json(const ObjectCountRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["stage"] = rec.guided ? "guided" : "warmup";
    j["samples"] = rec.samples;
    j["views"] = rec.views;
    j["mean_original"] = rec.mean_original;
    j["mean_rrc"] = rec.mean_rrc;
    j["mean_guided"] = rec.mean_guided;
    j["singles_original"] = rec.singles_original;
    j["singles_rrc"] = rec.singles_rrc;
    j["singles_guided"] = rec.singles_guided;
    return j.dump();
}

void ObjectCountAnalyzer::observe(const FirstBatchInfo& info) {
    if (!data_ || !info.views || !info.indices)
        throw UsageError("object-count analyzer observed an incomplete batch");
    const ViewBatch& vb = *info.views;

    ObjectCountRecord rec;
    rec.epoch = info.epoch;
    rec.guided = info.guided;
    rec.samples = vb.n;
    rec.views = vb.n * vb.k;

    for (int i = 0; i < vb.n; ++i) {
        const ImagePatch& src = (*data_)[(*info.indices)[i]];
        if (!src.has_mask())
            throw DataError("object-count analysis needs masks ('" + src.source_id + "')");
        const int c = count_classes(src.mask);
        rec.mean_original += c;
        rec.singles_original += c == 1 ? 1 : 0;
    }
    rec.mean_original /= rec.samples;

    for (int i = 0; i < vb.n; ++i)
        for (int j = 0; j < vb.k; ++j) {
            const std::size_t a = std::size_t(i) * vb.k + j;
            const ImagePatch& src = (*data_)[(*info.indices)[i]];
            const Mask viewed = transport_mask(vb.records[a], src.mask);
            const int c_rrc = count_classes(viewed);
            rec.mean_rrc += c_rrc;
            rec.singles_rrc += c_rrc == 1 ? 1 : 0;

            int c_guided = c_rrc;
            if (info.resample) {
                const Box& b = info.resample->boxes[a];
                const Mask g = nearest_resize(crop(viewed, b.x, b.y, b.h, b.w), viewed.height(),
                                              viewed.width());
                c_guided = count_classes(g);
            }
            rec.mean_guided += c_guided;
            rec.singles_guided += c_guided == 1 ? 1 : 0;
        }
    rec.mean_rrc /= rec.views;
    rec.mean_guided /= rec.views;
    records_.push_back(rec);
}

} // namespace ggs
