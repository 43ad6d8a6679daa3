#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ggs/checkpoint.hpp"
#include "ggs/config.hpp"
#include "ggs/model.hpp"

using namespace ggs;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
    fs::path p = fs::temp_directory_path() / ("ggs_test_" + leaf);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("serialization round trip preserves every field") {
    TrainConfig cfg;
    cfg.seed = 123;
    cfg.total_epochs = 40;
    cfg.warmup_epochs = 10;
    cfg.batch_size = 8;
    cfg.threshold = 0.7;
    cfg.rectify_lam = true;
    cfg.min_crop_px = 12;
    cfg.checkpoint_every = 5;
    cfg.loss.temperature = 0.25;
    cfg.loss.formulation = "standard-ntxent";
    cfg.augment.views = 3;
    cfg.augment.crop_scale_min = 0.3;
    cfg.encoder.architecture = "resnet-style";
    cfg.encoder.feature_dim = 24;
    cfg.encoder.stride = 4;
    cfg.encoder.input_size = 48;
    cfg.projector.output_dim = 12;
    cfg.optimizer.learning_rate = 0.01;
    cfg.optimizer.weight_decay = 1e-4;
    cfg.finetune.subset_fraction = 0.05;
    cfg.finetune.decoder_hidden = 32;
    cfg.data.dir = "elsewhere";
    cfg.data.limit = 100;

    TrainConfig back = train_config_from_json(train_config_to_json(cfg));
    CHECK(back.seed == 123);
    CHECK(back.total_epochs == 40);
    CHECK(back.warmup_epochs == 10);
    CHECK(back.batch_size == 8);
    CHECK(back.threshold == 0.7);
    CHECK(back.rectify_lam);
    CHECK(back.min_crop_px == 12);
    CHECK(back.checkpoint_every == 5);
    CHECK(back.loss.temperature == 0.25);
    CHECK(back.loss.formulation == "standard-ntxent");
    CHECK(back.augment.views == 3);
    CHECK(back.augment.crop_scale_min == 0.3);
    CHECK(back.encoder.architecture == "resnet-style");
    CHECK(back.encoder.feature_dim == 24);
    CHECK(back.encoder.stride == 4);
    CHECK(back.encoder.input_size == 48);
    CHECK(back.projector.output_dim == 12);
    CHECK(back.optimizer.learning_rate == 0.01);
    CHECK(back.optimizer.weight_decay == 1e-4);
    CHECK(back.finetune.subset_fraction == 0.05);
    CHECK(back.finetune.decoder_hidden == 32);
    CHECK(back.data.dir == "elsewhere");
    CHECK(back.data.limit == 100);

    // a second pass through text is a fixed point
    CHECK(train_config_to_json(back) == train_config_to_json(cfg));
}

TEST_CASE("missing keys keep defaults, unknown keys are rejected") {
    TrainConfig sparse = train_config_from_json(R"({"train": {"batch_size": 4}})");
    CHECK(sparse.batch_size == 4);
    CHECK(sparse.total_epochs == TrainConfig{}.total_epochs);
    CHECK(sparse.loss.temperature == 0.5);

    CHECK_THROWS_AS(train_config_from_json(R"({"train": {"batchsize": 4}})"), ConfigError);
    CHECK_THROWS_AS(train_config_from_json(R"({"optimiser": {}})"), ConfigError);
    CHECK_THROWS_AS(train_config_from_json(R"({"loss": {"tau": 0.5}})"), ConfigError);
}

TEST_CASE("type mismatches are configuration errors") {
    CHECK_THROWS_AS(train_config_from_json(R"({"train": {"batch_size": "many"}})"), ConfigError);
    CHECK_THROWS_AS(train_config_from_json(R"({"train": {"threshold": true}})"), ConfigError);
    CHECK_THROWS_AS(train_config_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(train_config_from_json("[1,2]"), ConfigError);
}

TEST_CASE("validation catches inconsistent loops") {
    TrainConfig cfg;
    cfg.warmup_epochs = cfg.total_epochs + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.threshold = -0.2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.checkpoint_every = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("dotted overrides rewrite single keys") {
    std::string text = train_config_to_json(TrainConfig{});
    text = apply_override(text, "train.batch_size", "32");
    text = apply_override(text, "loss.temperature", "0.1");
    text = apply_override(text, "encoder.architecture", "resnet-style");
    text = apply_override(text, "train.rectify_lam", "true");
    text = apply_override(text, "seed", "99");
    TrainConfig cfg = train_config_from_json(text);
    CHECK(cfg.batch_size == 32);
    CHECK(cfg.loss.temperature == 0.1);
    CHECK(cfg.encoder.architecture == "resnet-style");
    CHECK(cfg.rectify_lam);
    CHECK(cfg.seed == 99);

    // an unknown path surfaces once the result is parsed back
    std::string bad = apply_override(train_config_to_json(TrainConfig{}), "train.unknown", "1");
    CHECK_THROWS_AS(train_config_from_json(bad), ConfigError);
}

TEST_CASE("config file save and load") {
    const fs::path dir = fresh_dir("config_file");
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.batch_size = 6;
    const std::string path = (dir / "c.json").string();
    save_train_config(cfg, path);
    TrainConfig back = load_train_config(path);
    CHECK(back.seed == 5);
    CHECK(back.batch_size == 6);
    CHECK_THROWS_AS(load_train_config((dir / "missing.json").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip is bit exact") {
    const fs::path dir = fresh_dir("ckpt_rt");
    TrainConfig cfg;
    cfg.seed = 21;
    cfg.encoder.feature_dim = 8;
    cfg.encoder.input_size = 16;
    cfg.encoder.stride = 4;
    cfg.projector.output_dim = 6;
    cfg.projector.hidden_dim = 8;

    ContrastiveModel model(cfg.encoder, cfg.projector, cfg.seed);
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.epoch = 17;
    ckpt.params = snapshot_params(model.params());
    ckpt.velocity = ckpt.params;
    for (auto& buf : ckpt.velocity)
        for (double& v : buf) v *= 0.25;

    const std::string path = (dir / "c.bin").string();
    save_checkpoint(ckpt, path);
    Checkpoint back = load_checkpoint(path);
    CHECK(back.epoch == 17);
    CHECK(back.config.seed == 21);
    CHECK(back.config.encoder.feature_dim == 8);
    REQUIRE(back.params.size() == ckpt.params.size());
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
        CHECK(back.params[i] == ckpt.params[i]);
        CHECK(back.velocity[i] == ckpt.velocity[i]);
    }
    fs::remove_all(dir);
}

TEST_CASE("corrupted and truncated checkpoints are refused") {
    const fs::path dir = fresh_dir("ckpt_bad");
    TrainConfig cfg;
    cfg.encoder.feature_dim = 4;
    cfg.encoder.input_size = 16;
    cfg.encoder.stride = 4;
    ContrastiveModel model(cfg.encoder, cfg.projector, 1);
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = snapshot_params(model.params());
    ckpt.velocity = ckpt.params;
    const std::string path = (dir / "c.bin").string();
    save_checkpoint(ckpt, path);

    auto bytes = [&] {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    }();

    std::string flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x40;
    std::ofstream(dir / "flip.bin", std::ios::binary) << flipped;
    CHECK_THROWS_AS(load_checkpoint((dir / "flip.bin").string()), DataError);

    std::ofstream(dir / "trunc.bin", std::ios::binary)
        << bytes.substr(0, bytes.size() - 9);
    CHECK_THROWS_AS(load_checkpoint((dir / "trunc.bin").string()), DataError);

    std::ofstream(dir / "magic.bin", std::ios::binary) << ("XXXXXXXX" + bytes.substr(8));
    CHECK_THROWS_AS(load_checkpoint((dir / "magic.bin").string()), DataError);

    CHECK_THROWS_AS(load_checkpoint((dir / "absent.bin").string()), DataError);
    fs::remove_all(dir);
}

TEST_CASE("snapshot and restore move parameters faithfully") {
    TrainConfig cfg;
    cfg.encoder.feature_dim = 4;
    cfg.encoder.input_size = 16;
    cfg.encoder.stride = 4;
    ContrastiveModel a(cfg.encoder, cfg.projector, 1);
    ContrastiveModel b(cfg.encoder, cfg.projector, 2);
    REQUIRE(a.param_hash() != b.param_hash());
    restore_params(b.params(), snapshot_params(a.params()));
    CHECK(a.param_hash() == b.param_hash());

    auto snap = snapshot_params(a.params());
    snap.pop_back();
    CHECK_THROWS_AS(restore_params(b.params(), snap), DataError);
    snap = snapshot_params(a.params());
    snap[0].push_back(0.0);
    CHECK_THROWS_AS(restore_params(b.params(), snap), DataError);
}

} // TEST_SUITE
