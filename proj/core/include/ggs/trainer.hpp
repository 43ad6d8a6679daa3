#ifndef GGS_TRAINER_HPP
#define GGS_TRAINER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ggs/augment.hpp"
#include "ggs/checkpoint.hpp"
#include "ggs/config.hpp"
#include "ggs/lamcore.hpp"
#include "ggs/model.hpp"
#include "ggs/optim.hpp"

namespace ggs {

/// One run-log line. mean_loss is the loss that drove the update; in
/// guided epochs probe_loss carries the first (pre-resample) computation.
struct EpochRecord {
    int epoch = 0;
    bool guided = false;
    double mean_loss = 0.0;
    std::optional<double> probe_loss;
    double wall_seconds = 0.0;
    int batches = 0;
    double mean_box_area_frac = 1.0;
    int fallbacks = 0;
};

std::string epoch_record_to_json(const EpochRecord& rec);

/// Handed to the first-batch observer once per epoch; enough to replay
/// every view's geometry against dataset masks.
struct FirstBatchInfo {
    int epoch = 0;
    bool guided = false;
    const std::vector<std::size_t>* indices = nullptr; // dataset index per instance
    const ViewBatch* views = nullptr;                  // pass-1 views with records
    const GuidedResampleStats* resample = nullptr;     // null during warm-up
};

/// Two-stage loop: plain instance discrimination while the epoch counter
/// is at most warmup_epochs, afterwards each batch computes the loss twice
/// (once to harvest feature gradients for resampling, once on the
/// resampled views to update the parameters).
class Trainer {
public:
    using FirstBatchObserver = std::function<void(const FirstBatchInfo&)>;

    Trainer(const TrainConfig& cfg, std::vector<ImagePatch> dataset);

    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    /// Restores weights, optimizer state and epoch counter. The caller is
    /// responsible for constructing the trainer from the same config.
    void resume(const Checkpoint& ckpt);
    Checkpoint make_checkpoint();

    /// Runs epoch epochs_done()+1.
    EpochRecord run_epoch();

    /// Full loop: every epoch appended to <out_dir>/runlog.jsonl,
    /// checkpoints every checkpoint_every epochs plus a final one.
    void run(const std::string& out_dir);

    void set_first_batch_observer(FirstBatchObserver obs) { observer_ = std::move(obs); }

    int epochs_done() const { return epochs_done_; }
    ContrastiveModel& model() { return model_; }
    const TrainConfig& config() const { return cfg_; }
    const std::vector<ImagePatch>& dataset() const { return data_; }

private:
    double train_batch_warmup(const ViewBatch& vb);
    double train_batch_guided(const ViewBatch& vb, GuidedResampleStats& stats,
                              double& probe_loss);

    TrainConfig cfg_;
    std::vector<ImagePatch> data_;
    ContrastiveModel model_;
    SgdMomentum opt_;
    int epochs_done_ = 0;
    FirstBatchObserver observer_;
};

} // namespace ggs

#endif
