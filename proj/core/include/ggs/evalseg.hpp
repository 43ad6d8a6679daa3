#ifndef GGS_EVALSEG_HPP
#define GGS_EVALSEG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ggs/checkpoint.hpp"
#include "ggs/config.hpp"
#include "ggs/model.hpp"
#include "ggs/synthdata.hpp"
#include "ggs/trainer.hpp"

namespace ggs {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void add(int truth, int pred, long long count = 1);
    void add_image(const Mask& truth, const Mask& pred);
    void merge(const ConfusionMatrix& other);

    long long at(int truth, int pred) const { return counts_[std::size_t(truth) * nc_ + pred]; }
    long long total() const;
    int num_classes() const { return nc_; }

private:
    int nc_;
    std::vector<long long> counts_;
};

/// Per-class entries are NaN where the metric is undefined (class absent
/// from both truth and prediction for iou, empty truth row for acc);
/// the means skip those classes.
struct SegMetrics {
    std::vector<double> iou;
    std::vector<double> acc;
    double miou = 0.0;
    double oa = 0.0;
    double macc = 0.0;
};

SegMetrics metrics_from_confusion(const ConfusionMatrix& cm);

std::string metrics_report(const SegMetrics& m);
std::string metrics_to_json(const SegMetrics& m);

/// conv3x3 -> relu -> conv1x1 over the frozen feature map; callers
/// bilinearly upsample the low-resolution logits to image size.
class SegDecoder {
public:
    SegDecoder(int feature_dim, int hidden, int num_classes, std::uint64_t seed);

    Tensor forward(const Tensor& feature, Tape* tape);
    void backward(const Tensor& d_logits, Tape& tape);
    std::vector<Param*> params();
    int num_classes() const { return classes_; }

private:
    int classes_;
    Conv2d conv1_, conv2_;
    ReLU relu_;
};

/// Frozen pretrained backbone plus trainable decoder head.
struct SegModel {
    TrainConfig config;
    int classes;
    ContrastiveModel backbone;
    SegDecoder decoder;

    SegModel(const TrainConfig& cfg, int num_classes);

    /// Image-size logits (bilinear upsample of the decoder output).
    Tensor logits(const Tensor& image);
    Mask predict(const Tensor& image);
};

SegModel seg_model_from_checkpoint(const Checkpoint& ckpt, int num_classes);
void save_seg_model(SegModel& model, const std::string& path);
SegModel load_seg_model(const std::string& path);

struct FinetuneResult {
    std::vector<double> epoch_losses;
    int subset_size = 0;
    std::uint64_t encoder_hash_before = 0;
    std::uint64_t encoder_hash_after = 0;
};

/// Trains only the decoder with softmax cross entropy on a seeded random
/// fraction of the labeled set. The encoder is never touched; the returned
/// hashes prove it.
FinetuneResult finetune_decoder(SegModel& model, const std::vector<ImagePatch>& labeled,
                                const FinetuneConfig& cfg, std::uint64_t seed);

/// Single confusion matrix accumulated over every test pixel.
SegMetrics evaluate_dataset(SegModel& model, const std::vector<ImagePatch>& test,
                            ConfusionMatrix* cm_out = nullptr);

/// Largest class index present in any mask, plus one. 0 when unlabeled.
int scan_num_classes(const std::vector<ImagePatch>& patches);

/// Distinct-class statistics for the first batch of an epoch, for three
/// arms: the untouched source patch, the augmented view, and the view
/// after gradient-guided cropping (identical to the view during warm-up).
struct ObjectCountRecord {
    int epoch = 0;
    bool guided = false;
    int samples = 0;
    int views = 0;
    double mean_original = 0.0;
    double mean_rrc = 0.0;
    double mean_guided = 0.0;
    int singles_original = 0;
    int singles_rrc = 0;
    int singles_guided = 0;
};

std::string object_count_record_to_json(const ObjectCountRecord& rec);

class ObjectCountAnalyzer {
public:
    explicit ObjectCountAnalyzer(const std::vector<ImagePatch>* dataset) : data_(dataset) {}

    /// Plug into Trainer::set_first_batch_observer.
    void observe(const FirstBatchInfo& info);

    const std::vector<ObjectCountRecord>& records() const { return records_; }

private:
    const std::vector<ImagePatch>* data_;
    std::vector<ObjectCountRecord> records_;
};

} // namespace ggs

#endif
