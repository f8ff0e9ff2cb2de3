#include "ctlab/ablation.hpp"
#include "ctlab/analysis.hpp"
#include "ctlab/config.hpp"
#include "ctlab/sampler.hpp"
#include "ctlab/svg.hpp"
#include "ctlab/trainer.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ctlab;

namespace {

std::uint64_t text_digest(const std::string& text) {
    return bytes_hash(text.data(), text.size());
}

std::string parent_dir(const std::string& file) {
    const fs::path p = fs::path(file).parent_path();
    return p.empty() ? std::string(".") : p.string();
}

std::vector<std::string> split_list(const std::string& csv_list) {
    std::vector<std::string> out;
    std::stringstream ss(csv_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool has_columns(const csv::Table& table, const std::vector<std::string>& names) {
    for (const auto& name : names)
        if (std::find(table.header.begin(), table.header.end(), name) == table.header.end())
            return false;
    return true;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
    RunConfig cfg = load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    Trainer trainer(cfg);
    auto rows = trainer.run(out_dir);

    std::ofstream cfg_out(fs::path(out_dir) / "config.txt");
    cfg_out << serialize_run_config(cfg);
    cfg_out.close();

    std::vector<std::string> artifacts{"metrics.csv", "checkpoint.bin", "config.txt"};
    if (fs::exists(fs::path(out_dir) / "td_reservoir.csv"))
        artifacts.push_back("td_reservoir.csv");
    write_manifest(out_dir, cfg, artifacts);

    std::cout << "trained " << cfg.total_iters << " iterations, final ct_loss = "
              << rows.back().ct_loss << ", skipped = " << trainer.skipped_steps()
              << ", out = " << out_dir << "\n";
    return 0;
}

int cmd_sample(const std::string& ckpt, std::size_t steps, std::size_t n,
               std::uint64_t seed, const std::string& out_file,
               const std::string& levels_list) {
    const Checkpoint ck = load_checkpoint(ckpt);
    ConsistencyModel model(ck.config.model_config());
    model.load_params(ck.params);

    SamplePlan plan;
    plan.steps = steps;
    plan.seed = seed;
    if (!levels_list.empty()) {
        for (const auto& item : split_list(levels_list))
            plan.intermediate_levels.push_back(std::stod(item));
    } else {
        plan.intermediate_levels = default_intermediate_levels(ck.config, steps);
    }

    const SampleResult result = sample(model, ck.config, plan, n);
    export_points_csv(out_file, result.points);
    write_manifest(parent_dir(out_file), config_digest(ck.config), seed,
                   {fs::path(out_file).filename().string()});
    std::cout << "sampled " << n << " points with nfe = " << result.nfe << " -> "
              << out_file << "\n";
    return 0;
}

int cmd_analyze(const std::string& in_file, const std::string& out_file) {
    const csv::Table table = csv::read(in_file);
    std::vector<OutlierReportRow> rows;

    if (has_columns(table, {"x", "y"})) {
        const std::size_t cx = table.column("x"), cy = table.column("y");
        std::vector<double> all, xs, ys;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const double x = csv::parse_double(table.rows[i][cx], i + 2);
            const double y = csv::parse_double(table.rows[i][cy], i + 2);
            xs.push_back(x);
            ys.push_back(y);
            all.push_back(x);
            all.push_back(y);
        }
        rows.push_back(make_report_row("points_all", 0, std::move(all)));
        rows.push_back(make_report_row("points_x", 0, std::move(xs)));
        rows.push_back(make_report_row("points_y", 0, std::move(ys)));
    } else if (has_columns(table, {"n", "value"})) {
        const TDReservoir res = TDReservoir::load_csv(in_file);
        if (res.empty()) throw std::runtime_error("analyze: empty reservoir " + in_file);
        for (std::size_t tag : res.tags())
            rows.push_back(make_report_row("td", tag, res.values(tag)));
    } else {
        throw std::runtime_error("analyze: " + in_file +
                                 " is neither a points file (x,y) nor a reservoir (n,value)");
    }

    csv::write(out_file, outlier_report(rows));
    write_manifest(parent_dir(out_file), file_hash(in_file), 0,
                   {fs::path(out_file).filename().string()});
    std::cout << "analyzed " << in_file << " -> " << out_file << " (" << rows.size()
              << " rows)\n";
    return 0;
}

int cmd_loss_bench(const std::string& out_dir, double c, double r_min, double r_max,
                   std::size_t points) {
    if (!(c > 0.0)) throw std::runtime_error("loss-bench: c must be > 0");
    if (!(r_min > 0.0) || !(r_min < r_max))
        throw std::runtime_error("loss-bench: need 0 < min < max");
    if (points < 2) throw std::runtime_error("loss-bench: need at least 2 points");
    fs::create_directories(out_dir);

    std::vector<std::string> artifacts;
    for (LossKind kind : {LossKind::L2, LossKind::PseudoHuber, LossKind::Cauchy,
                          LossKind::GemanMcClure}) {
        csv::Table table;
        table.header = {"residual", "value", "derivative"};
        for (std::size_t i = 0; i < points; ++i) {
            const double f = (double)i / (double)(points - 1);
            const double r = r_min * std::pow(r_max / r_min, f);
            table.rows.push_back({csv::format_double(r),
                                  csv::format_double(metric_value(kind, r * r, c)),
                                  csv::format_double(metric_gradient_norm(kind, r, c))});
        }
        const std::string name = std::string("loss_") + loss_kind_name(kind) + ".csv";
        csv::write((fs::path(out_dir) / name).string(), table);
        artifacts.push_back(name);
    }
    std::ostringstream params;
    params << "c=" << c << " min=" << r_min << " max=" << r_max << " points=" << points;
    write_manifest(out_dir, text_digest(params.str()), 0, artifacts);
    std::cout << "loss sweep (c = " << c << ") -> " << out_dir << "\n";
    return 0;
}

int cmd_schedule_dump(const std::string& config_path, const std::string& out_dir,
                      std::size_t stride) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    fs::create_directories(out_dir);

    const Curriculum cur = cfg.curriculum();
    const CScheduler sched = cfg.c_scheduler();

    std::vector<std::string> artifacts;
    csv::Table trace;
    trace.header = {"iteration", "nfe", "c", "levels_file"};
    std::size_t last_nfe = 0;
    std::string levels_file;
    for (std::size_t k = 0; k < cfg.total_iters; k += stride) {
        const std::size_t nfe = nfe_at(cur, k);
        if (nfe != last_nfe) {
            last_nfe = nfe;
            levels_file = "levels_nfe" + std::to_string(nfe) + ".csv";
            const KarrasGrid grid = build_grid(cfg.t_min, cfg.t_max, cfg.rho, nfe);
            csv::Table levels;
            levels.header = {"level"};
            for (double t : grid.levels) levels.rows.push_back({csv::format_double(t)});
            csv::write((fs::path(out_dir) / levels_file).string(), levels);
            artifacts.push_back(levels_file);
        }
        trace.rows.push_back({std::to_string(k), std::to_string(nfe),
                              csv::format_double(current_c(sched, nfe, Dataset::kDim)),
                              levels_file});
    }
    csv::write((fs::path(out_dir) / "schedule.csv").string(), trace);
    artifacts.push_back("schedule.csv");
    write_manifest(out_dir, config_digest(cfg), cfg.seed, artifacts);
    std::cout << "schedule trace (" << trace.rows.size() << " rows) -> " << out_dir << "\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& axis,
               const std::string& variants, const std::string& seeds,
               const std::string& out_dir, bool fresh) {
    AblationMatrix matrix;
    matrix.base = load_run_config(config_path);
    matrix.axis = ablation_axis_from_name(axis);
    matrix.variants = split_list(variants);
    for (const auto& s : split_list(seeds)) matrix.seeds.push_back(std::stoull(s));

    const AblationSummary summary = run_ablation(matrix, out_dir, !fresh);
    csv::write((fs::path(out_dir) / "summary.csv").string(), ablation_table(summary));
    write_manifest(out_dir, config_digest(matrix.base), matrix.base.seed, {"summary.csv"});

    for (const auto& variant : matrix.variants) {
        const auto med = summary.variant_median(variant);
        if (med)
            std::cout << variant << ": median w2_1step = " << med->w2_1step
                      << ", w2_2step = " << med->w2_2step << "\n";
        else
            std::cout << variant << ": all seeds failed\n";
    }
    std::size_t failed = 0;
    for (const auto& e : summary.entries) failed += e.failed ? 1 : 0;
    if (failed > 0) std::cout << failed << " run(s) failed; see summary.csv\n";
    return 0;
}

int cmd_plot(const std::string& in_file, const std::string& out_file) {
    const csv::Table table = csv::read(in_file);

    if (has_columns(table, {"residual", "value", "derivative"})) {
        const std::size_t cr = table.column("residual"), cv = table.column("value"),
                          cd = table.column("derivative");
        svg::Series value{"value", {}, {}}, deriv{"derivative", {}, {}};
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const double r = csv::parse_double(table.rows[i][cr], i + 2);
            value.x.push_back(r);
            value.y.push_back(csv::parse_double(table.rows[i][cv], i + 2));
            deriv.x.push_back(r);
            deriv.y.push_back(csv::parse_double(table.rows[i][cd], i + 2));
        }
        svg::Panel left{"loss value", "residual", "d", true, false, {value}};
        svg::Panel right{"loss derivative", "residual", "|d'|", true, false, {deriv}};
        svg::write_line_plot(out_file, {left, right});
    } else if (has_columns(table, {"iteration", "nfe", "c"})) {
        const std::size_t ck = table.column("iteration"), cn = table.column("nfe"),
                          cc = table.column("c");
        svg::Series c_curve{"c", {}, {}}, nfe_curve{"nfe", {}, {}};
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const double k = csv::parse_double(table.rows[i][ck], i + 2);
            c_curve.x.push_back(k);
            c_curve.y.push_back(csv::parse_double(table.rows[i][cc], i + 2));
            nfe_curve.x.push_back(k);
            nfe_curve.y.push_back(csv::parse_double(table.rows[i][cn], i + 2));
        }
        svg::Panel left{"scaling c", "iteration", "c", false, false, {c_curve}};
        svg::Panel right{"discretization", "iteration", "NFE", false, false, {nfe_curve}};
        svg::write_line_plot(out_file, {left, right});
    } else if (has_columns(table, {"source", "N", "q1", "median", "q3"})) {
        std::vector<svg::Box> boxes;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            svg::Box box;
            box.label = row[table.column("source")] + "/N=" + row[table.column("N")];
            box.q1 = csv::parse_double(row[table.column("q1")], i + 2);
            box.median = csv::parse_double(row[table.column("median")], i + 2);
            box.q3 = csv::parse_double(row[table.column("q3")], i + 2);
            box.inner_lo = csv::parse_double(row[table.column("inner_lo")], i + 2);
            box.inner_hi = csv::parse_double(row[table.column("inner_hi")], i + 2);
            box.outer_lo = csv::parse_double(row[table.column("outer_lo")], i + 2);
            box.outer_hi = csv::parse_double(row[table.column("outer_hi")], i + 2);
            box.min = csv::parse_double(row[table.column("min")], i + 2);
            box.max = csv::parse_double(row[table.column("max")], i + 2);
            box.outlier_count =
                (std::size_t)csv::parse_double(row[table.column("outlier_count")], i + 2);
            boxes.push_back(std::move(box));
        }
        svg::write_box_plot(out_file, fs::path(in_file).stem().string(), boxes);
    } else {
        throw std::runtime_error("plot: unrecognized CSV layout in " + in_file);
    }

    write_manifest(parent_dir(out_file), file_hash(in_file), 0,
                   {fs::path(out_file).filename().string()});
    std::cout << "plotted " << in_file << " -> " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consistency-training laboratory"};
    app.require_subcommand(1);

    // train
    std::string train_config, train_out;
    std::uint64_t train_seed = 0;
    auto* train = app.add_subcommand("train", "train a model from a config");
    train->add_option("--config", train_config, "config file")->required();
    auto* seed_opt = train->add_option("--seed", train_seed, "seed override");
    train->add_option("--out", train_out, "output directory")->required();

    // sample
    std::string sample_ckpt, sample_out, sample_levels;
    std::size_t sample_steps = 1, sample_n = 512;
    std::uint64_t sample_seed = 1;
    auto* smp = app.add_subcommand("sample", "sample from a checkpoint");
    smp->add_option("--ckpt", sample_ckpt, "checkpoint file")->required();
    smp->add_option("--steps", sample_steps, "sampling steps (NFE)");
    smp->add_option("--n", sample_n, "number of points");
    smp->add_option("--seed", sample_seed, "sampling seed");
    smp->add_option("--out", sample_out, "output points.csv")->required();
    smp->add_option("--levels", sample_levels, "comma-separated intermediate noise levels");

    // analyze
    std::string analyze_in, analyze_out;
    auto* ana = app.add_subcommand("analyze", "box-and-whisker report for points or TD values");
    ana->add_option("--in", analyze_in, "points.csv or reservoir csv")->required();
    ana->add_option("--out", analyze_out, "report csv")->required();

    // loss-bench
    std::string lb_out;
    double lb_c = 0.03, lb_min = 1e-4, lb_max = 100.0;
    std::size_t lb_points = 200;
    auto* lbench = app.add_subcommand("loss-bench", "sweep the robust loss family");
    lbench->add_option("--out", lb_out, "output directory")->required();
    lbench->add_option("--c", lb_c, "scaling parameter");
    lbench->add_option("--min", lb_min, "smallest residual");
    lbench->add_option("--max", lb_max, "largest residual");
    lbench->add_option("--points", lb_points, "sweep resolution");

    // schedule-dump
    std::string sd_config, sd_out;
    std::size_t sd_stride = 1;
    auto* sdump = app.add_subcommand("schedule-dump", "emit grid, NFE and c traces");
    sdump->add_option("--config", sd_config, "config file (defaults when omitted)");
    sdump->add_option("--out", sd_out, "output directory")->required();
    sdump->add_option("--stride", sd_stride, "iteration stride")->check(CLI::PositiveNumber);

    // ablate
    std::string ab_config, ab_axis, ab_variants, ab_seeds, ab_out;
    bool ab_fresh = false;
    auto* abl = app.add_subcommand("ablate", "sweep one axis across seeds");
    abl->add_option("--config", ab_config, "base config")->required();
    abl->add_option("--axis", ab_axis, "loss-kind|norm-kind|r-threshold|coupling|c-mode")
        ->required();
    abl->add_option("--variants", ab_variants, "comma-separated variant values")->required();
    abl->add_option("--seeds", ab_seeds, "comma-separated seeds")->required();
    abl->add_option("--out", ab_out, "output directory")->required();
    abl->add_flag("--fresh", ab_fresh, "retrain even when artifacts exist");

    // plot
    std::string plot_in, plot_out;
    auto* plt = app.add_subcommand("plot", "render a CSV artifact as SVG");
    plt->add_option("--in", plot_in, "input csv")->required();
    plt->add_option("--out", plot_out, "output svg")->required();

    try {
        app.parse(argc, argv);
        if (train->parsed())
            return cmd_train(train_config,
                             seed_opt->count() ? std::optional<std::uint64_t>(train_seed)
                                               : std::nullopt,
                             train_out);
        if (smp->parsed())
            return cmd_sample(sample_ckpt, sample_steps, sample_n, sample_seed, sample_out,
                              sample_levels);
        if (ana->parsed()) return cmd_analyze(analyze_in, analyze_out);
        if (lbench->parsed()) return cmd_loss_bench(lb_out, lb_c, lb_min, lb_max, lb_points);
        if (sdump->parsed()) return cmd_schedule_dump(sd_config, sd_out, sd_stride);
        if (abl->parsed())
            return cmd_ablate(ab_config, ab_axis, ab_variants, ab_seeds, ab_out, ab_fresh);
        if (plt->parsed()) return cmd_plot(plot_in, plot_out);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
