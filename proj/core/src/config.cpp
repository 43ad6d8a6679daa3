#include "ggs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ggs {

using nlohmann::json;

void DataConfig::validate() const {
    if (dir.empty()) throw ConfigError("data.dir must not be empty");
    if (limit < 0) throw ConfigError("data.limit must be >= 0");
}

void FinetuneConfig::validate() const {
    if (epochs < 1) throw ConfigError("finetune.epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("finetune.batch_size must be >= 1");
    if (!(subset_fraction > 0.0 && subset_fraction <= 1.0))
        throw ConfigError("finetune.subset_fraction must lie in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("finetune.learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("finetune.momentum must lie in [0, 1)");
    if (decoder_hidden < 1) throw ConfigError("finetune.decoder_hidden must be >= 1");
}

void TrainConfig::validate() const {
    if (total_epochs < 0) throw ConfigError("train.total_epochs must be >= 0");
    if (warmup_epochs < 0 || warmup_epochs > total_epochs)
        throw ConfigError("train.warmup_epochs must lie in [0, total_epochs]");
    if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw ConfigError("train.threshold must lie in [0, 1)");
    if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
    if (min_crop_px < 1) throw ConfigError("train.min_crop_px must be >= 1");
    loss.validate();
    augment.validate();
    encoder.validate();
    projector.validate();
    optimizer.validate();
    finetune.validate();
    data.validate();
}

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown config key '" + key + "' in section '" + section + "'");
    }
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

json augment_to_json(const AugmentConfig& a) {
    return json{{"views", a.views},
                {"crop_scale_min", a.crop_scale_min},
                {"crop_scale_max", a.crop_scale_max},
                {"crop_aspect_min", a.crop_aspect_min},
                {"crop_aspect_max", a.crop_aspect_max},
                {"hflip_prob", a.hflip_prob},
                {"vflip_prob", a.vflip_prob},
                {"brightness", a.brightness},
                {"contrast", a.contrast},
                {"saturation", a.saturation},
                {"grayscale_prob", a.grayscale_prob},
                {"blur_prob", a.blur_prob},
                {"blur_sigma_min", a.blur_sigma_min},
                {"blur_sigma_max", a.blur_sigma_max}};
}

void augment_from_json(const json& obj, AugmentConfig& a) {
    reject_unknown(obj, "augment",
                   {"views", "crop_scale_min", "crop_scale_max", "crop_aspect_min",
                    "crop_aspect_max", "hflip_prob", "vflip_prob", "brightness", "contrast",
                    "saturation", "grayscale_prob", "blur_prob", "blur_sigma_min",
                    "blur_sigma_max"});
    get_if(obj, "views", a.views);
    get_if(obj, "crop_scale_min", a.crop_scale_min);
    get_if(obj, "crop_scale_max", a.crop_scale_max);
    get_if(obj, "crop_aspect_min", a.crop_aspect_min);
    get_if(obj, "crop_aspect_max", a.crop_aspect_max);
    get_if(obj, "hflip_prob", a.hflip_prob);
    get_if(obj, "vflip_prob", a.vflip_prob);
    get_if(obj, "brightness", a.brightness);
    get_if(obj, "contrast", a.contrast);
    get_if(obj, "saturation", a.saturation);
    get_if(obj, "grayscale_prob", a.grayscale_prob);
    get_if(obj, "blur_prob", a.blur_prob);
    get_if(obj, "blur_sigma_min", a.blur_sigma_min);
    get_if(obj, "blur_sigma_max", a.blur_sigma_max);
}

} // namespace

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["train"] = {{"total_epochs", cfg.total_epochs},
                  {"warmup_epochs", cfg.warmup_epochs},
                  {"batch_size", cfg.batch_size},
                  {"threshold", cfg.threshold},
                  {"rectify_lam", cfg.rectify_lam},
                  {"min_crop_px", cfg.min_crop_px},
                  {"checkpoint_every", cfg.checkpoint_every}};
    j["loss"] = {{"temperature", cfg.loss.temperature}, {"formulation", cfg.loss.formulation}};
    j["augment"] = augment_to_json(cfg.augment);
    j["encoder"] = {{"architecture", cfg.encoder.architecture},
                    {"feature_dim", cfg.encoder.feature_dim},
                    {"stride", cfg.encoder.stride},
                    {"input_channels", cfg.encoder.input_channels},
                    {"input_size", cfg.encoder.input_size},
                    {"bias", cfg.encoder.bias}};
    j["projector"] = {{"output_dim", cfg.projector.output_dim},
                      {"hidden_dim", cfg.projector.hidden_dim}};
    j["optimizer"] = {{"kind", cfg.optimizer.kind},
                      {"learning_rate", cfg.optimizer.learning_rate},
                      {"momentum", cfg.optimizer.momentum},
                      {"weight_decay", cfg.optimizer.weight_decay}};
    j["finetune"] = {{"epochs", cfg.finetune.epochs},
                     {"batch_size", cfg.finetune.batch_size},
                     {"subset_fraction", cfg.finetune.subset_fraction},
                     {"learning_rate", cfg.finetune.learning_rate},
                     {"momentum", cfg.finetune.momentum},
                     {"decoder_hidden", cfg.finetune.decoder_hidden}};
    j["data"] = {{"dir", cfg.data.dir}, {"limit", cfg.data.limit}};
    return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid json: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(j, "<root>",
                   {"seed", "train", "loss", "augment", "encoder", "projector", "optimizer",
                    "finetune", "data"});

    TrainConfig cfg;
    get_if(j, "seed", cfg.seed);

    if (auto it = j.find("train"); it != j.end()) {
        reject_unknown(*it, "train",
                       {"total_epochs", "warmup_epochs", "batch_size", "threshold",
                        "rectify_lam", "min_crop_px", "checkpoint_every"});
        get_if(*it, "total_epochs", cfg.total_epochs);
        get_if(*it, "warmup_epochs", cfg.warmup_epochs);
        get_if(*it, "batch_size", cfg.batch_size);
        get_if(*it, "threshold", cfg.threshold);
        get_if(*it, "rectify_lam", cfg.rectify_lam);
        get_if(*it, "min_crop_px", cfg.min_crop_px);
        get_if(*it, "checkpoint_every", cfg.checkpoint_every);
    }
    if (auto it = j.find("loss"); it != j.end()) {
        reject_unknown(*it, "loss", {"temperature", "formulation"});
        get_if(*it, "temperature", cfg.loss.temperature);
        get_if(*it, "formulation", cfg.loss.formulation);
    }
    if (auto it = j.find("augment"); it != j.end()) augment_from_json(*it, cfg.augment);
    if (auto it = j.find("encoder"); it != j.end()) {
        reject_unknown(*it, "encoder",
                       {"architecture", "feature_dim", "stride", "input_channels", "input_size",
                        "bias"});
        get_if(*it, "architecture", cfg.encoder.architecture);
        get_if(*it, "feature_dim", cfg.encoder.feature_dim);
        get_if(*it, "stride", cfg.encoder.stride);
        get_if(*it, "input_channels", cfg.encoder.input_channels);
        get_if(*it, "input_size", cfg.encoder.input_size);
        get_if(*it, "bias", cfg.encoder.bias);
    }
    if (auto it = j.find("projector"); it != j.end()) {
        reject_unknown(*it, "projector", {"output_dim", "hidden_dim"});
        get_if(*it, "output_dim", cfg.projector.output_dim);
        get_if(*it, "hidden_dim", cfg.projector.hidden_dim);
    }
    if (auto it = j.find("optimizer"); it != j.end()) {
        reject_unknown(*it, "optimizer", {"kind", "learning_rate", "momentum", "weight_decay"});
        get_if(*it, "kind", cfg.optimizer.kind);
        get_if(*it, "learning_rate", cfg.optimizer.learning_rate);
        get_if(*it, "momentum", cfg.optimizer.momentum);
        get_if(*it, "weight_decay", cfg.optimizer.weight_decay);
    }
    if (auto it = j.find("finetune"); it != j.end()) {
        reject_unknown(*it, "finetune",
                       {"epochs", "batch_size", "subset_fraction", "learning_rate", "momentum",
                        "decoder_hidden"});
        get_if(*it, "epochs", cfg.finetune.epochs);
        get_if(*it, "batch_size", cfg.finetune.batch_size);
        get_if(*it, "subset_fraction", cfg.finetune.subset_fraction);
        get_if(*it, "learning_rate", cfg.finetune.learning_rate);
        get_if(*it, "momentum", cfg.finetune.momentum);
        get_if(*it, "decoder_hidden", cfg.finetune.decoder_hidden);
    }
    if (auto it = j.find("data"); it != j.end()) {
        reject_unknown(*it, "data", {"dir", "limit"});
        get_if(*it, "dir", cfg.data.dir);
        get_if(*it, "limit", cfg.data.limit);
    }

    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return train_config_from_json(buf.str());
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    out << train_config_to_json(cfg);
}

std::string apply_override(const std::string& json_text, const std::string& dotted_key,
                           const std::string& value) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid json: ") + e.what());
    }
    if (dotted_key.empty()) throw ConfigError("empty config override key");

    std::string pointer = "/";
    for (char c : dotted_key) pointer += c == '.' ? '/' : c;

    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value; // plain string
    }
    j[json::json_pointer(pointer)] = parsed;
    return j.dump();
}

} // namespace ggs
