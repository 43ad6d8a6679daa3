#ifndef GGS_CONFIG_HPP
#define GGS_CONFIG_HPP

#include <cstdint>
#include <string>

#include "ggs/augment.hpp"
#include "ggs/contrastive.hpp"
#include "ggs/model.hpp"
#include "ggs/optim.hpp"

namespace ggs {

struct DataConfig {
    std::string dir = "data";
    int limit = 0; // 0 loads everything

    void validate() const;
};

struct FinetuneConfig {
    int epochs = 150;
    int batch_size = 16;
    double subset_fraction = 0.01;
    double learning_rate = 0.1;
    double momentum = 0.9;
    int decoder_hidden = 64;

    void validate() const;
};

/// Full description of a pretraining run. JSON layout nests the loop
/// fields under "train" and each sub-config under its own section, which
/// is also the dotted-override namespace ("train.batch_size").
struct TrainConfig {
    std::uint64_t seed = 1;

    int total_epochs = 350;
    int warmup_epochs = 150;
    int batch_size = 256;
    double threshold = 0.5;
    bool rectify_lam = false;
    int min_crop_px = 8;
    int checkpoint_every = 50;

    LossConfig loss;
    AugmentConfig augment;
    EncoderSpec encoder;
    ProjectorSpec projector;
    OptimizerConfig optimizer;
    FinetuneConfig finetune;
    DataConfig data;

    void validate() const;
};

/// Serializes every field explicitly so the written config is a complete
/// record of the run, defaults included.
std::string train_config_to_json(const TrainConfig& cfg);

/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const std::string& text);

TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);

/// Applies one dotted-path override ("train.batch_size" = "32") onto a JSON
/// config text. The value is parsed as JSON when possible, else kept as a
/// string. Unknown paths surface once the result is parsed back.
std::string apply_override(const std::string& json_text, const std::string& dotted_key,
                           const std::string& value);

} // namespace ggs

#endif
