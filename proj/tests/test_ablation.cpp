#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctlab/ablation.hpp"
#include "ctlab/svg.hpp"

#include <filesystem>
#include <fstream>

using namespace ctlab;
namespace fs = std::filesystem;

TEST_CASE("variants touch exactly the swept axis") {
    RunConfig base;
    RunConfig v = apply_variant(base, AblationAxis::LossKind, "l2");
    CHECK(v.loss == LossKind::L2);
    v.loss = base.loss;
    CHECK(serialize_run_config(v) == serialize_run_config(base));

    v = apply_variant(base, AblationAxis::RThreshold, "0.6");
    CHECK(v.diffusion_r == 0.6);
    v = apply_variant(base, AblationAxis::Coupling, "independent");
    CHECK(v.coupling == CouplingMode::Independent);
    v = apply_variant(base, AblationAxis::NormKind, "rms");
    CHECK(v.norm == NormKind::RMSNorm);
    v = apply_variant(base, AblationAxis::CMode, "fixed");
    CHECK(v.c_mode == CMode::Fixed);

    CHECK_THROWS_AS((void)apply_variant(base, AblationAxis::LossKind, "nope"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)apply_variant(base, AblationAxis::RThreshold, "1.5"),
                    std::invalid_argument);
}

TEST_CASE("median helper") {
    CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median_of({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK_THROWS_AS((void)median_of({}), std::invalid_argument);
}

TEST_CASE("empty matrices are rejected before any training") {
    AblationMatrix matrix;
    matrix.seeds = {1};
    CHECK_THROWS_AS((void)run_ablation(matrix, "never_created", true), std::invalid_argument);
    CHECK_FALSE(fs::exists("never_created"));

    matrix.variants = {"cauchy"};
    matrix.seeds = {};
    CHECK_THROWS_AS((void)run_ablation(matrix, "never_created", true), std::invalid_argument);

    // invalid variant value fails fast, before directories appear
    matrix.variants = {"cauchy", "bogus"};
    matrix.seeds = {1};
    CHECK_THROWS_AS((void)run_ablation(matrix, "never_created", true), std::invalid_argument);
    CHECK_FALSE(fs::exists("never_created"));
}

TEST_CASE("micro ablation end to end with artifact reuse") {
    RunConfig base;
    base.hidden = 12;
    base.blocks = 2;
    base.time_freqs = 4;
    base.gn_groups = 4;
    base.in_channels = 4;
    base.s0 = 2;
    base.s1 = 4;
    base.total_iters = 40;
    base.batch_size = 16;
    base.log_every = 10;

    AblationMatrix matrix;
    matrix.base = base;
    matrix.axis = AblationAxis::Coupling;
    matrix.variants = {"ot", "independent"};
    matrix.seeds = {1, 2};

    EvalSettings settings;
    settings.n_points = 24;

    const std::string root = "test_ablation_root";
    fs::remove_all(root);
    const AblationSummary first = run_ablation(matrix, root, true, settings);
    REQUIRE(first.entries.size() == 4);
    for (const auto& e : first.entries) {
        INFO(e.variant << " seed " << e.seed << ": " << e.error);
        CHECK_FALSE(e.failed);
        CHECK(e.eval.w2_1step > 0.0);
        CHECK(fs::exists(fs::path(e.run_dir) / "checkpoint.bin"));
    }
    CHECK(first.variant_median("ot").has_value());

    // second pass reuses checkpoints: identical evaluations, no retraining
    const auto stamp =
        fs::last_write_time(fs::path(root) / "ot_seed1" / "checkpoint.bin");
    const AblationSummary second = run_ablation(matrix, root, true, settings);
    CHECK(fs::last_write_time(fs::path(root) / "ot_seed1" / "checkpoint.bin") == stamp);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(second.entries[i].eval.w2_1step == first.entries[i].eval.w2_1step);

    const csv::Table table = ablation_table(first);
    CHECK(table.rows.size() == 6);  // 4 entries + 2 medians
    CHECK(table.rows[4][1] == "median");
    fs::remove_all(root);
}

TEST_CASE("a failing variant is recorded while the rest continue") {
    RunConfig base;
    base.hidden = 12;
    base.blocks = 2;
    base.time_freqs = 4;
    base.gn_groups = 5;  // 12 % 5 != 0: the gn variant cannot build its norm layers
    base.in_channels = 4;
    base.s0 = 2;
    base.s1 = 2;
    base.total_iters = 20;
    base.batch_size = 8;
    base.norm = NormKind::NonScalingLayerNorm;

    AblationMatrix matrix;
    matrix.base = base;
    matrix.axis = AblationAxis::NormKind;
    matrix.variants = {"nsln", "gn"};
    matrix.seeds = {1};

    EvalSettings settings;
    settings.n_points = 16;

    const std::string root = "test_ablation_fail";
    fs::remove_all(root);
    const AblationSummary summary = run_ablation(matrix, root, true, settings);
    REQUIRE(summary.entries.size() == 2);
    CHECK_FALSE(summary.entries[0].failed);
    CHECK(summary.entries[1].failed);
    CHECK_FALSE(summary.entries[1].error.empty());
    CHECK(summary.variant_median("nsln").has_value());
    CHECK_FALSE(summary.variant_median("gn").has_value());

    const csv::Table table = ablation_table(summary);
    CHECK(table.rows[1][2] == "failed");
    fs::remove_all(root);
}

TEST_CASE("svg emission produces well-formed files") {
    svg::Series s{"curve", {1, 2, 3, 4}, {1, 4, 9, 16}};
    svg::Panel panel{"squares", "x", "y", false, false, {s}};
    svg::write_line_plot("test_plot.svg", {panel});
    {
        std::ifstream in("test_plot.svg");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.find("polyline") != std::string::npos);
    }
    fs::remove("test_plot.svg");

    svg::Box box{"N=10", -0.2, 0.0, 0.2, -0.8, 0.8, -1.4, 1.4, -3.0, 3.0, 17};
    svg::write_box_plot("test_boxes.svg", "td", {box});
    {
        std::ifstream in("test_boxes.svg");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.find("outliers: 17") != std::string::npos);
    }
    fs::remove("test_boxes.svg");

    CHECK_THROWS_AS(svg::write_line_plot("x.svg", {}), std::invalid_argument);
}
