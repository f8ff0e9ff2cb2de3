#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctlab/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace ctlab;

TEST_CASE("config text round-trips canonically") {
    RunConfig cfg;
    cfg.loss = LossKind::PseudoHuber;
    cfg.coupling = CouplingMode::Independent;
    cfg.c_mode = CMode::Fixed;
    cfg.c0 = 0.125;
    cfg.hidden = 48;
    cfg.seed = 99;
    cfg.timestep_mode = TimestepMode::Uniform;
    cfg.norm = NormKind::RMSNorm;

    const std::string text = serialize_run_config(cfg);
    RunConfig back = parse_run_config(text);
    CHECK(serialize_run_config(back) == text);
    CHECK(config_digest(back) == config_digest(cfg));
}

TEST_CASE("digest is sensitive to any field change") {
    RunConfig a, b;
    b.learning_rate = 2e-4;
    CHECK(config_digest(a) != config_digest(b));
    RunConfig c;
    c.seed = 2;
    CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("parser accepts comments and rejects junk") {
    RunConfig cfg = parse_run_config("# comment\n\nloss = cauchy  # inline\nhidden = 32\n");
    CHECK(cfg.loss == LossKind::Cauchy);
    CHECK(cfg.hidden == 32);

    CHECK_THROWS_AS(parse_run_config("no_such_key = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_run_config("hidden : 32\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_run_config("hidden = abc\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_run_config("loss = tukey\n"), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
    RunConfig cfg;
    cfg.hidden = 16;
    cfg.blocks = 2;
    cfg.time_freqs = 4;
    ConsistencyModel model(cfg.model_config());

    const std::string path = "test_ckpt.bin";
    save_checkpoint(path, cfg, model);
    Checkpoint ck = load_checkpoint(path);
    CHECK(ck.params == model.flatten_params());
    CHECK(serialize_run_config(ck.config) == serialize_run_config(cfg));

    // truncated payload
    {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 16);
        CHECK_THROWS(load_checkpoint(path));
    }
    // bad magic
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTACKPT garbage";
    }
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
}

TEST_CASE("manifest lists digest, seed, and artifact hashes") {
    namespace fs = std::filesystem;
    const std::string dir = "test_manifest_dir";
    fs::create_directories(dir);
    {
        std::ofstream a(fs::path(dir) / "a.csv");
        a << "x,y\n1,2\n";
    }
    RunConfig cfg;
    cfg.seed = 123;
    write_manifest(dir, cfg, {"a.csv"});

    std::ifstream in(fs::path(dir) / "manifest.txt");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("config_digest = " + hex64(config_digest(cfg))) != std::string::npos);
    CHECK(text.find("seed = 123") != std::string::npos);
    CHECK(text.find("artifact = a.csv") != std::string::npos);
    fs::remove_all(dir);
}
