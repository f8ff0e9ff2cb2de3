// Acceptance suite: one pass/fail line per criterion.
//
// Criteria 1-7 are exact/property checks and finish in seconds. Criteria 8-12
// train the directional toy-scale runs (fifteen 20k-iteration trainings at
// batch 256) and evaluate 2-Wasserstein distances against held-out data;
// completed runs found in the work directory are reused when their config
// digest matches, so re-running the suite is cheap.

#include "ctlab/ablation.hpp"
#include "ctlab/analysis.hpp"
#include "ctlab/config.hpp"
#include "ctlab/coupling.hpp"
#include "ctlab/losses.hpp"
#include "ctlab/model.hpp"
#include "ctlab/sampler.hpp"
#include "ctlab/schedules.hpp"
#include "ctlab/trainer.hpp"

#include "../support/fd_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ctlab;
namespace fs = std::filesystem;

namespace {

struct Harness {
    int failures = 0;

    void criterion(int id, const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Tensor random_tensor(const std::vector<std::size_t>& shape, std::mt19937_64& rng,
                     double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    std::vector<double> d(n);
    for (auto& x : d) x = dist(rng);
    return Tensor(shape, std::move(d));
}

// ---------------------------------------------------------------- criterion 1

bool check_loss_closed_forms(std::string& detail) {
    const double tol = 1e-12;
    double worst = 0.0;
    auto track = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
        return std::abs(got - want) <= tol;
    };

    bool ok = true;
    std::mt19937_64 rng(11);
    // zero residual pins every kind at zero
    Tensor x = random_tensor({4}, rng);
    for (LossKind kind : {LossKind::L2, LossKind::PseudoHuber, LossKind::Cauchy,
                          LossKind::GemanMcClure}) {
        LossSpec spec{kind, {}};
        ok &= track(metric(spec, x, x, 0.3).item(), 0.0);
        ok &= track(metric_gradient_norm(kind, 0.0, 0.3), 0.0);
    }
    // Cauchy at ||r||^2 = 2 c^2 -> ln 2
    ok &= track(metric_value(LossKind::Cauchy, 2.0 * 0.7 * 0.7, 0.7), std::log(2.0));
    // Pseudo-Huber 3-4-5 point
    ok &= track(metric_value(LossKind::PseudoHuber, 16.0, 3.0), 2.0);
    // Geman-McClure at ||r||^2 = 4 c^2 -> 1
    ok &= track(metric_value(LossKind::GemanMcClure, 4.0 * 0.5 * 0.5, 0.5), 1.0);
    // L2 on scalars 3 vs 1
    ok &= track(metric_value(LossKind::L2, 4.0, 1.0), 4.0);

    // derivatives at r = 2c, against independently derived algebra
    const double c = 0.03, r = 2.0 * c;
    ok &= track(metric_gradient_norm(LossKind::L2, r, c), 2.0 * r);
    ok &= track(metric_gradient_norm(LossKind::PseudoHuber, r, c), 2.0 / std::sqrt(5.0));
    ok &= track(metric_gradient_norm(LossKind::Cauchy, r, c), 2.0 / (3.0 * c));
    ok &= track(metric_gradient_norm(LossKind::GemanMcClure, r, c), 0.5 / c);
    // Pseudo-Huber derivative limit
    ok &= std::abs(metric_gradient_norm(LossKind::PseudoHuber, 1e6 * c, c) - 1.0) < 1e-6;

    // reverse-mode gradients against central finite differences
    double worst_rel = 0.0;
    for (LossKind kind : {LossKind::L2, LossKind::PseudoHuber, LossKind::Cauchy,
                          LossKind::GemanMcClure}) {
        LossSpec spec{kind, {}};
        auto f = [&spec](std::vector<Tensor>& xs) { return metric(spec, xs[0], xs[1], 0.3); };
        auto res = testing::check_grads(f, {random_tensor({5}, rng), random_tensor({5}, rng)},
                                        1e-6, 1e-6);
        ok &= res.ok;
        worst_rel = std::max(worst_rel, res.worst_rel);
    }
    detail = "max closed-form err " + fmt(worst) + ", max grad rel err " + fmt(worst_rel);
    return ok;
}

// ---------------------------------------------------------------- criterion 2

bool check_scheduler_suite(std::string& detail) {
    bool ok = true;
    double worst = 0.0;

    for (std::size_t n : {2, 3, 11, 41, 161, 641}) {
        const KarrasGrid grid = build_grid(0.002, 80.0, 7.0, n);
        ok &= grid.levels.front() == 0.002 && grid.levels.back() == 80.0;
        const long double lo = powl(0.002L, 1.0L / 7.0L);
        const long double hi = powl(80.0L, 1.0L / 7.0L);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const long double want =
                powl(lo + (long double)i / (long double)(n - 1) * (hi - lo), 7.0L);
            const double rel = std::abs((double)((grid.levels[i] - want) / want));
            worst = std::max(worst, rel);
            ok &= rel <= 1e-12;
        }
    }

    Curriculum cur{10, 640, 70000};
    ok &= cur.epoch_len() == 10000;
    ok &= nfe_at(cur, 0) == 11 && nfe_at(cur, 10000) == 21 && nfe_at(cur, 69999) == 641;
    std::size_t prev_nfe = 0;
    for (std::size_t k = 0; k < 70000; ++k) {
        const std::size_t stage = k / 10000;
        const std::size_t want =
            std::min<std::size_t>(10ull << stage, 640) + 1;
        const std::size_t got = nfe_at(cur, k);
        ok &= got == want && got >= prev_nfe && got <= 641;
        prev_nfe = got;
    }

    double prev_c = 1e9;
    for (std::size_t nfe : {11, 21, 41, 81, 161, 321, 641}) {
        const double got = current_c(CScheduler::adaptive(), nfe, 2);
        const long double want = expl(-1.18L * logl((long double)(nfe - 1)) - 0.72L);
        const double rel = std::abs((double)((got - want) / want));
        worst = std::max(worst, rel);
        ok &= rel <= 1e-12;
        ok &= got < prev_c;
        prev_c = got;
    }
    detail = "max rel err " + fmt(worst);
    return ok;
}

// ---------------------------------------------------------------- criterion 3

bool check_boundary_condition(std::string& detail) {
    ModelConfig cfg;
    cfg.hidden = 32;
    cfg.blocks = 3;
    cfg.time_freqs = 8;
    cfg.gn_groups = 4;
    cfg.in_channels = 8;
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        cfg.init_seed = 500 + trial;
        cfg.norm_kind = static_cast<NormKind>(trial % 5);
        ConsistencyModel model(cfg);
        std::vector<double> flat(model.param_count());
        for (auto& v : flat) v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        model.load_params(flat);
        Tensor x = random_tensor({4, 2}, rng, -3.0, 3.0);
        Tensor y = model.forward(x, std::vector<double>(4, cfg.sigma_min));
        if (y.data() != x.data()) {
            detail = "mismatch at trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "100 random parameter sets, bit-exact";
    return true;
}

// ---------------------------------------------------------------- criterion 4

bool check_ema_mu_zero(std::string& detail) {
    RunConfig cfg;
    cfg.hidden = 16;
    cfg.blocks = 2;
    cfg.time_freqs = 4;
    cfg.gn_groups = 4;
    cfg.in_channels = 8;
    cfg.s0 = 4;
    cfg.s1 = 16;
    cfg.total_iters = 50;
    cfg.batch_size = 32;
    cfg.ema_mu = 0.0;
    cfg.seed = 3;
    Trainer trainer(cfg);
    Dataset dataset = cfg.make_dataset();
    for (std::size_t k = 0; k < 50; ++k) {
        trainer.training_step(dataset.sample(cfg.batch_size, 900 + k));
        if (trainer.online().flatten_params() != trainer.target().flatten_params()) {
            detail = "divergence after step " + std::to_string(k);
            return false;
        }
    }
    detail = "50 steps, valuewise equal after each";
    return true;
}

// ---------------------------------------------------------------- criterion 5

bool check_ot_optimality(std::string& detail) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> dist(0.0, 10.0);
    for (std::size_t n = 2; n <= 7; ++n) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> costs(n * n);
            for (auto& v : costs) v = dist(rng);
            const Assignment got = solve_assignment(Tensor({n, n}, costs));

            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = 1e300;
            do {
                double c = 0.0;
                for (std::size_t i = 0; i < n; ++i) c += costs[i * n + perm[i]];
                best = std::min(best, c);
            } while (std::next_permutation(perm.begin(), perm.end()));

            if (std::abs(got.cost - best) > 1e-12 * std::max(1.0, best)) {
                detail = "n=" + std::to_string(n) + " trial " + std::to_string(trial) +
                         ": got " + fmt(got.cost) + " vs brute " + fmt(best);
                return false;
            }
        }
    }
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(64 * 2), b(64 * 2);
        for (auto& v : a) v = g(rng);
        for (auto& v : b) v = g(rng);
        Tensor data({64, 2}, a), noise({64, 2}, b);
        Tensor coupled = couple_batch(data, noise, CouplingMode::OT);
        double c_ot = 0.0, c_id = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            c_ot += (coupled.data()[i] - a[i]) * (coupled.data()[i] - a[i]);
            c_id += (b[i] - a[i]) * (b[i] - a[i]);
        }
        if (c_ot > c_id + 1e-12) {
            detail = "coupled cost exceeds identity at trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "1200 brute-force matches, coupling dominates identity on 50 batches";
    return true;
}

// ---------------------------------------------------------------- criterion 6

bool check_nsln_contract(std::string& detail) {
    const std::size_t f = 64;
    auto layer = NormLayer::make(NormKind::NonScalingLayerNorm, f, 8, 16);
    if (layer.gamma.defined() || layer.param_count() != f ||
        layer.trainable_params().size() != 1) {
        detail = "scale parameter present in the trainable set";
        return false;
    }

    // model-level enumeration carries bias-only norm layers
    ModelConfig mc;
    mc.hidden = f;
    mc.blocks = 2;
    mc.time_freqs = 4;
    mc.norm_kind = NormKind::NonScalingLayerNorm;
    ConsistencyModel with_nsln(mc);
    mc.norm_kind = NormKind::LayerNorm;
    ConsistencyModel with_ln(mc);
    if (with_ln.param_count() - with_nsln.param_count() != 2 * f) {
        detail = "parameter enumeration does not drop exactly the scale vectors";
        return false;
    }

    std::mt19937_64 rng(5);
    for (auto& b : layer.beta.data()) b = std::uniform_real_distribution<double>(-1, 1)(rng);
    Tensor x = random_tensor({8, f}, rng, -3.0, 3.0);
    Tensor y = layer.forward(x);
    double worst = 0.0;
    for (std::size_t r = 0; r < 8; ++r) {
        double in_mu = 0.0, out_mu = 0.0, beta_mu = 0.0;
        for (std::size_t c = 0; c < f; ++c) {
            in_mu += x.data()[r * f + c];
            out_mu += y.data()[r * f + c];
            beta_mu += layer.beta.data()[c];
        }
        in_mu /= f;
        out_mu /= f;
        beta_mu /= f;
        double in_var = 0.0, shifted_var = 0.0;
        for (std::size_t c = 0; c < f; ++c) {
            const double xv = x.data()[r * f + c] - in_mu;
            in_var += xv * xv;
            const double yv = y.data()[r * f + c] - layer.beta.data()[c];
            shifted_var += yv * yv;  // beta-shifted output, mean 0 by construction
        }
        in_var /= f;
        shifted_var /= f;
        worst = std::max(worst, std::abs(out_mu - beta_mu));
        // epsilon-corrected unit variance
        worst = std::max(worst, std::abs(shifted_var - in_var / (in_var + layer.epsilon)));
    }
    detail = "worst deviation " + fmt(worst);
    return worst <= 1e-10;
}

// ---------------------------------------------------------------- criterion 7

bool check_box_stats(std::string& detail) {
    bool ok = true;
    const BoxStats a = box_stats({1, 2, 3, 4});
    ok &= a.q1 == 1.75 && a.median == 2.5 && a.q3 == 3.25 && a.iqr == 1.5;
    ok &= a.inner_lo == -0.5 && a.inner_hi == 5.5 && a.outer_lo == -2.75 && a.outer_hi == 7.75;
    ok &= a.outlier_count == 0;

    const BoxStats b = box_stats({10, 20, 30, 40, 50});
    ok &= b.q1 == 20.0 && b.median == 30.0 && b.q3 == 40.0;

    const BoxStats c = box_stats(std::vector<double>(16, 2.5));
    ok &= c.iqr == 0.0 && c.outlier_count == 0;

    std::vector<double> spike(99, 0.0);
    spike.push_back(100.0);
    const BoxStats d = box_stats(spike);
    ok &= d.outlier_count == 1 && d.outlier_max == 100.0 && d.outer_hi < 100.0;

    detail = "hand-computed quartiles and fences exact";
    return ok;
}

// ------------------------------------------------------- directional criteria

RunConfig acceptance_base() {
    RunConfig cfg;
    cfg.dataset = DatasetKind::GaussianMixture8;
    cfg.outlier_p = 0.01;
    cfg.outlier_amplitude = 8.0;
    cfg.loss = LossKind::Cauchy;
    cfg.c_mode = CMode::Adaptive;
    cfg.coupling = CouplingMode::OT;
    cfg.diffusion_enabled = true;
    cfg.diffusion_r = 0.25;
    cfg.s0 = 10;
    cfg.s1 = 640;
    cfg.total_iters = 20000;
    cfg.batch_size = 256;
    cfg.hidden = 64;
    cfg.blocks = 3;
    cfg.time_freqs = 16;
    cfg.norm = NormKind::NonScalingLayerNorm;
    cfg.learning_rate = 5e-4;
    cfg.log_every = 1000;
    return cfg;
}

struct RunOutcome {
    std::uint64_t seed;
    EvalResult eval;
    std::string dir;
};

std::vector<RunOutcome> train_family(const std::string& work, const std::string& name,
                                     const RunConfig& variant, bool reuse) {
    std::vector<RunOutcome> outcomes;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        RunConfig cfg = variant;
        cfg.seed = seed;
        const std::string dir =
            (fs::path(work) / (name + "_seed" + std::to_string(seed))).string();
        std::fprintf(stderr, "  [run] %s ...\n", dir.c_str());
        std::fflush(stderr);
        ensure_run(cfg, dir, reuse);
        const Checkpoint ck = load_checkpoint((fs::path(dir) / "checkpoint.bin").string());
        ConsistencyModel model(cfg.model_config());
        model.load_params(ck.params);
        RunOutcome outcome;
        outcome.seed = seed;
        outcome.dir = dir;
        outcome.eval = evaluate_checkpoint(cfg, model);
        std::fprintf(stderr, "  [eval] %s: w2_1=%.4f w2_2=%.4f cov=%.3f\n", dir.c_str(),
                     outcome.eval.w2_1step, outcome.eval.w2_2step,
                     outcome.eval.coverage_1step);
        std::fflush(stderr);
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

double median_w2_1(const std::vector<RunOutcome>& runs) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.eval.w2_1step);
    return median_of(v);
}

double median_w2_2(const std::vector<RunOutcome>& runs) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.eval.w2_2step);
    return median_of(v);
}

// seed-matched wins of `left` over `right` on 1-step W2
int seed_wins(const std::vector<RunOutcome>& left, const std::vector<RunOutcome>& right) {
    int wins = 0;
    for (std::size_t i = 0; i < left.size(); ++i)
        if (left[i].eval.w2_1step < right[i].eval.w2_1step) ++wins;
    return wins;
}

std::string w2_list(const std::vector<RunOutcome>& runs) {
    std::string out = "[";
    for (std::size_t i = 0; i < runs.size(); ++i)
        out += (i ? " " : "") + fmt(runs[i].eval.w2_1step);
    return out + "]";
}

}  // namespace

int main(int argc, char** argv) {
    std::string work = "acceptance_work";
    bool reuse = true;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--work") == 0 && i + 1 < argc) work = argv[++i];
        else if (std::strcmp(argv[i], "--fresh") == 0) reuse = false;
        else {
            std::fprintf(stderr, "usage: %s [--work dir] [--fresh]\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(work);

    Harness h;
    std::string detail;

    detail.clear();
    h.criterion(1, "robust-loss closed forms and gradients", check_loss_closed_forms(detail), detail);
    detail.clear();
    h.criterion(2, "scheduler suite (grid, NFE, adaptive c)", check_scheduler_suite(detail), detail);
    detail.clear();
    h.criterion(3, "boundary condition f(x, sigma_min) = x", check_boundary_condition(detail), detail);
    detail.clear();
    h.criterion(4, "EMA mu=0 keeps target equal to online", check_ema_mu_zero(detail), detail);
    detail.clear();
    h.criterion(5, "assignment optimality vs brute force", check_ot_optimality(detail), detail);
    detail.clear();
    h.criterion(6, "NsLN bias-only contract and statistics", check_nsln_contract(detail), detail);
    detail.clear();
    h.criterion(7, "box-stats fixtures under the quantile rule", check_box_stats(detail), detail);

    // ------------------------------------------------ training-based criteria
    const RunConfig base = acceptance_base();
    std::fprintf(stderr, "[acceptance] training directional runs (reuse=%s)\n",
                 reuse ? "on" : "off");

    const auto cauchy = train_family(work, "cauchy", base, reuse);
    const auto huber =
        train_family(work, "pseudo_huber",
                     apply_variant(base, AblationAxis::LossKind, "pseudo_huber"), reuse);
    const auto l2 =
        train_family(work, "l2", apply_variant(base, AblationAxis::LossKind, "l2"), reuse);
    const auto r_full =
        train_family(work, "r1.0", apply_variant(base, AblationAxis::RThreshold, "1.0"), reuse);
    const auto independent =
        train_family(work, "independent",
                     apply_variant(base, AblationAxis::Coupling, "independent"), reuse);

    {
        const int wins_ch = seed_wins(cauchy, huber);
        const int wins_hl = seed_wins(huber, l2);
        const bool ok = wins_ch >= 2 && wins_hl >= 2;
        h.criterion(8, "robust-loss trend cauchy < pseudo-huber < l2",
                    ok,
                    "cauchy" + w2_list(cauchy) + " huber" + w2_list(huber) + " l2" +
                        w2_list(l2) + "; wins " + std::to_string(wins_ch) + "/3, " +
                        std::to_string(wins_hl) + "/3");
    }
    {
        const double m1 = median_w2_1(cauchy), m2 = median_w2_2(cauchy);
        h.criterion(9, "two-step sampling at or above one-step quality", m2 <= m1,
                    "median w2: 2-step " + fmt(m2) + " vs 1-step " + fmt(m1));
    }
    {
        const double m_base = median_w2_1(cauchy), m_full = median_w2_1(r_full);
        h.criterion(10, "diffusion threshold r=0.25 at or above r=1.0", m_base <= m_full,
                    "median w2: r=0.25 " + fmt(m_base) + " vs r=1.0 " + fmt(m_full));
    }
    {
        const double m_ot = median_w2_1(cauchy), m_ind = median_w2_1(independent);
        h.criterion(11, "OT coupling at or above independent pairing", m_ot <= m_ind,
                    "median w2: ot " + fmt(m_ot) + " vs independent " + fmt(m_ind));
    }
    {
        // TD statistics on the best base checkpoint
        const RunOutcome* best = &cauchy[0];
        for (const auto& r : cauchy)
            if (r.eval.w2_1step < best->eval.w2_1step) best = &r;
        RunConfig cfg = base;
        cfg.seed = best->seed;
        const Checkpoint ck =
            load_checkpoint((fs::path(best->dir) / "checkpoint.bin").string());
        ConsistencyModel online(cfg.model_config());
        online.load_params(ck.params);
        ConsistencyModel target(cfg.model_config());
        target.load_params(ck.params);  // mu = 0: the target equals the online network

        TDReservoir reservoir(1000000, 42);
        capture_td_for_grid(online, target, cfg, 10, 20, 1234, reservoir);
        capture_td_for_grid(online, target, cfg, 160, 20, 1234, reservoir);
        const BoxStats coarse = box_stats(reservoir.values(10));
        const BoxStats fine = box_stats(reservoir.values(160));
        const bool ok = fine.iqr < coarse.iqr && coarse.outlier_count > 0 &&
                        fine.outlier_count > 0;
        h.criterion(12, "TD dispersion shrinks with N while outliers persist", ok,
                    "iqr N=10 " + fmt(coarse.iqr) + " vs N=160 " + fmt(fine.iqr) +
                        "; outliers " + std::to_string(coarse.outlier_count) + " and " +
                        std::to_string(fine.outlier_count));
    }

    std::printf("%d criterion(s) failed\n", h.failures);
    return h.failures == 0 ? 0 : 1;
}
