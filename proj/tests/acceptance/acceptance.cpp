// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//   fraudkit_acceptance                 all criteria
//   fraudkit_acceptance --criterion N   one criterion; exit 0 pass, 1 fail, 77 skip
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "fraudkit/dataset.hpp"
#include "fraudkit/error.hpp"
#include "fraudkit/features.hpp"
#include "fraudkit/graphssl.hpp"
#include "fraudkit/imbalance.hpp"
#include "fraudkit/metrics.hpp"
#include "fraudkit/pipeline.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace fraudkit;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

// Tolerances and budgets. Changing these changes what "pass" means.
constexpr double kOperatorRelTol = 1e-12;
constexpr int kOperatorGraphs = 100;
constexpr double kOperatorBudget = 10.0;

constexpr double kFdStep = 1e-6;
constexpr double kFdTol = 1e-5;
constexpr int kFdGraphs = 30;
constexpr double kFdBudget = 30.0;

constexpr double kSolveTol = 1e-4;
constexpr int kSolveGraphs = 20;
constexpr double kTwoNodeTol = 1e-15;
constexpr double kSolveBudget = 30.0;

constexpr double kUlbAccTolPts = 3.0;
constexpr double kUlbAccLowP = 88.52;
constexpr double kUlbAccP2 = 88.33;
constexpr double kUlbGraphBudget = 600.0;

constexpr double kKsubF1 = 0.8113;
constexpr double kKsubF1Tol = 0.10;
constexpr double kKsubBudget = 900.0;

constexpr int kPartitionCases = 1000;
constexpr double kPartitionBudget = 60.0;

constexpr int kDriftSeeds = 10;
constexpr double kDriftGain = 0.2;
constexpr double kStationaryGap = 0.05;
constexpr double kDriftBudget = 300.0;

constexpr std::size_t kMetricsMaxLen = 6;
constexpr double kMetricsBudget = 60.0;

constexpr std::size_t kAggregateRows = 1000;
constexpr double kAggregateBudget = 60.0;

enum class Outcome { pass, fail, skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

Verdict verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void info(const std::string& line) { std::cout << "    " << line << "\n"; }

// a spanning path keeps the graph connected; extra edges are random
SimilarityGraph connected_graph(std::size_t n, double density, Rng& rng) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1, oracle::uniform(rng, 0.05, 2.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j)
            if (uniform01(rng) < density) edges.emplace_back(i, j, oracle::uniform(rng, 0.05, 2.0));
    return SimilarityGraph::from_edges(n, edges);
}

double sum_abs_products(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return s;
}

// ---------------------------------------------------------------------------

Verdict operator_identities() {
    Stopwatch clock;
    Rng rng(101);
    double worst_adj = 0, worst_lap = 0, worst_psd = 0;
    for (int trial = 0; trial < kOperatorGraphs; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 9);
        const auto g = oracle::random_graph(n, oracle::uniform(rng, 0.2, 1.0), rng);
        const auto f = oracle::random_vector(n, rng, -3.0, 3.0);
        const auto F = oracle::random_vector(g.slots(), rng, -3.0, 3.0);

        const auto df = gradient(g, f);
        const auto div = divergence(g, F);
        const double lhs = edge_inner(g, df, F);
        double rhs = 0.0, scale = sum_abs_products(df, F);
        for (std::size_t i = 0; i < n; ++i) rhs -= f[i] * div[i];
        scale = std::max({scale, sum_abs_products(f, div), 1.0});
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / scale);

        const auto lap = laplacian(g, f);
        const auto div_df = divergence(g, df);
        double lap_scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) lap_scale = std::max({lap_scale, std::abs(lap[i]), std::abs(div_df[i])});
        for (std::size_t i = 0; i < n; ++i)
            worst_lap = std::max(worst_lap, std::abs(lap[i] + 0.5 * div_df[i]) / lap_scale);

        const double energy = vertex_inner(lap, f);
        const double e_scale = std::max(1.0, sum_abs_products(lap, f));
        worst_psd = std::max(worst_psd, -energy / e_scale);
    }
    const double t = clock.seconds();
    const bool ok = worst_adj <= kOperatorRelTol && worst_lap <= kOperatorRelTol && worst_psd <= kOperatorRelTol &&
                    t < kOperatorBudget;
    return verdict(ok, fmt("%d graphs, max rel err adjoint %.2e, Lap=-div/2 %.2e, PSD violation %.2e (tol %.0e), %.2fs",
                           kOperatorGraphs, worst_adj, worst_lap, std::max(0.0, worst_psd), kOperatorRelTol, t));
}

Verdict smoothness_derivatives() {
    Stopwatch clock;
    Rng rng(202);
    const double eps = 1e-10;
    // stated constants: dS2 = 2 Lap f, dS1 = kappa f, dSp = p Lap_p f
    double stated_s2 = 0, stated_s1 = 0, stated_s15 = 0, stated_s3 = 0;
    // constants that follow from differentiating the definitions
    double derived_s1 = 0, derived_s15 = 0, derived_s3 = 0;
    for (int trial = 0; trial < kFdGraphs; ++trial) {
        const auto g = connected_graph(8, 0.3, rng);
        const auto f = oracle::random_vector(8, rng);
        auto scaled = [](std::vector<double> v, double c) {
            for (auto& x : v) x *= c;
            return v;
        };

        const auto d2 = oracle::central_gradient([&](const std::vector<double>& v) { return laplacian_energy(g, v); },
                                                 f, kFdStep);
        stated_s2 = std::max(stated_s2, oracle::max_abs_diff(d2, scaled(laplacian(g, f), 2.0)));

        const auto d1 = oracle::central_gradient(
            [&](const std::vector<double>& v) { return total_variation(g, v, eps); }, f, kFdStep);
        const auto kappa = curvature(g, f, eps);
        stated_s1 = std::max(stated_s1, oracle::max_abs_diff(d1, kappa));
        derived_s1 = std::max(derived_s1, oracle::max_abs_diff(d1, scaled(kappa, 2.0)));

        for (double p : {1.5, 3.0}) {
            const auto dp = oracle::central_gradient(
                [&](const std::vector<double>& v) { return p_smoothness(g, v, p, eps); }, f, kFdStep);
            const auto lp = p_laplacian(g, f, p, eps);
            const double stated = oracle::max_abs_diff(dp, scaled(lp, p));
            const double derived = oracle::max_abs_diff(dp, scaled(lp, 2.0));
            (p == 1.5 ? stated_s15 : stated_s3) = std::max(p == 1.5 ? stated_s15 : stated_s3, stated);
            (p == 1.5 ? derived_s15 : derived_s3) = std::max(p == 1.5 ? derived_s15 : derived_s3, derived);
        }
    }
    const double t = clock.seconds();
    auto mark = [](double e) { return e <= kFdTol ? "ok" : "MISMATCH"; };
    info(fmt("S_2 vs 2 Lap f:            max err %.2e %s", stated_s2, mark(stated_s2)));
    info(fmt("S_1 vs kappa f:            max err %.2e %s", stated_s1, mark(stated_s1)));
    info(fmt("S_1.5 vs 1.5 Lap_1.5 f:    max err %.2e %s", stated_s15, mark(stated_s15)));
    info(fmt("S_3 vs 3 Lap_3 f:          max err %.2e %s", stated_s3, mark(stated_s3)));
    info(fmt("(informational) S_1 vs 2 kappa f: %.2e, S_1.5 vs 2 Lap_1.5 f: %.2e, S_3 vs 2 Lap_3 f: %.2e",
             derived_s1, derived_s15, derived_s3));
    const bool ok = stated_s2 <= kFdTol && stated_s1 <= kFdTol && stated_s15 <= kFdTol && stated_s3 <= kFdTol &&
                    t < kFdBudget;
    return verdict(ok, fmt("%d 8-node graphs, h=%.0e, tol %.0e, %.2fs", kFdGraphs, kFdStep, kFdTol, t));
}

Verdict p2_matches_linear_solve() {
    Stopwatch clock;
    Rng rng(303);
    double worst = 0.0;
    int unconverged = 0;
    for (int trial = 0; trial < kSolveGraphs; ++trial) {
        const std::size_t n = 5 + uniform_index(rng, 46);
        const auto g = oracle::random_graph(n, oracle::uniform(rng, 0.05, 0.4), rng);
        std::vector<double> y(n, 0.0);
        for (auto& v : y) {
            const double u = uniform01(rng);
            v = u < 0.25 ? 1.0 : u < 0.5 ? -1.0 : 0.0;
        }
        y[0] = 1.0;
        SolverConfig cfg;
        cfg.mu = oracle::uniform(rng, 0.1, 2.0);
        cfg.max_iters = 100000;
        cfg.tol = 1e-10;
        const auto r = solve_ssl(g, y, cfg);
        unconverged += r.converged ? 0 : 1;
        worst = std::max(worst, oracle::max_abs_diff(r.f, oracle::dense_ssl_solve(g, y, cfg.mu)));
    }
    const std::vector<std::tuple<std::size_t, std::size_t, double>> e{{0, 1, 1.0}};
    const auto two = SimilarityGraph::from_edges(2, e);
    SolverConfig cfg;
    cfg.tol = 0.0;
    cfg.max_iters = 200;
    const auto r = solve_ssl(two, std::vector<double>{1.0, -1.0}, cfg);
    const double two_err = std::max(std::abs(r.f[0] - 1.0 / 3.0), std::abs(r.f[1] + 1.0 / 3.0));
    const double t = clock.seconds();
    const bool ok = worst <= kSolveTol && unconverged == 0 && two_err <= kTwoNodeTol && t < kSolveBudget;
    return verdict(ok, fmt("%d graphs, max inf-norm gap %.2e (tol %.0e), %d unconverged; two-node f=[%.17g, %.17g] "
                           "err %.1e; %.2fs",
                           kSolveGraphs, worst, kSolveTol, unconverged, r.f[0], r.f[1], two_err, t));
}

// ---------------------------------------------------------------------------

std::string ulb_path() {
    if (const char* env = std::getenv("FRAUDKIT_ULB_CSV"); env && *env) return env;
    return FRAUDKIT_ULB_DEFAULT;
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("fraudkit_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI with stdout captured to `out_file`; returns the exit code.
int run_cli(const std::string& args, const fs::path& out_file) {
    const std::string cmd = std::string(FRAUDKIT_CLI_PATH) + " " + args + " > " + out_file.string() + " 2> " +
                            (scratch_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict ulb_graph_accuracy() {
    const auto path = ulb_path();
    if (path.empty() || !fs::exists(path))
        return {Outcome::skip, "ULB creditcard.csv not found (set FRAUDKIT_ULB_CSV)"};
    Stopwatch clock;
    const auto out = scratch_dir() / "graphssl.json";
    // Time stays the timestamp column: as a raw coordinate it pushes every kNN
    // distance past the point where exp(-d/t) underflows
    const int code = run_cli("graphssl --data " + path + " --time-col Time --seed 42", out);
    if (code != 0) return verdict(false, fmt("graphssl exited with %d", code));
    const auto report = Json::parse(slurp(out));
    bool ok = true;
    for (const auto& row : report["results"]) {
        const double p = row["p"].get<double>();
        const double acc = 100.0 * row["accuracy"].get<double>();
        const double target = p >= 2.0 ? kUlbAccP2 : kUlbAccLowP;
        const bool row_ok = std::abs(acc - target) <= kUlbAccTolPts;
        ok = ok && row_ok;
        info(fmt("p=%.1f accuracy %.2f%% (target %.2f +/- %.0f) %s", p, acc, target, kUlbAccTolPts,
                 row_ok ? "ok" : "out of band"));
    }
    const double t = clock.seconds();
    return verdict(ok && report["results"].size() == 11 && t < kUlbGraphBudget, fmt("%.1fs", t));
}

Verdict ulb_ksub_f1() {
    const auto path = ulb_path();
    if (path.empty() || !fs::exists(path))
        return {Outcome::skip, "ULB creditcard.csv not found (set FRAUDKIT_ULB_CSV)"};
    Stopwatch clock;
    constexpr std::uint64_t seed = 42;
    constexpr int folds = 5;
    const auto out = scratch_dir() / "ksub.json";
    const int code = run_cli("ksub --data " + path + " --k 3 --folds 5 --seed 42", out);
    if (code != 0) return verdict(false, fmt("ksub exited with %d", code));
    const double ksub_f1 = Json::parse(slurp(out))["mean_f1"].get<double>();
    const bool band = std::abs(ksub_f1 - kKsubF1) <= kKsubF1Tol;
    info(fmt("3-SUB mean F1 %.4f (target %.4f +/- %.2f)", ksub_f1, kKsubF1, kKsubF1Tol));

    // baselines on the folds cross_validate_ksub uses for the same seed
    const auto ds = load_csv(path, {});
    const auto assignment = stratified_kfold(ds, folds, seed);
    ForestParams fp;
    std::vector<double> single_f1;
    for (int f = 0; f < folds; ++f) {
        const auto train = ds.subset(assignment.train_indices(f));
        const auto test_rows = assignment.test_indices(f);
        const auto part = partition_majority(train, 3, derive_seed(seed, 77));
        const auto seg = train.subset(member_training_rows(part, train.labels, 0));
        const auto balanced = random_undersample(seg, 1.0, derive_seed(seed, 88));
        const auto forest = train_forest(balanced, fp, derive_seed(seed, 99));
        std::vector<int> truth, preds;
        for (auto r : test_rows) {
            truth.push_back(ds.labels[r]);
            preds.push_back(forest.predict_proba(ds.features.row(r)) >= 0.5 ? 1 : 0);
        }
        single_f1.push_back(precision_recall_f1(confusion(truth, preds)).f1);
    }
    const double single = mean_std(single_f1).first;
    info(fmt("baselines: all-negative F1 0, single forest on 1:1 undersampled segment F1 %.4f", single));
    const double t = clock.seconds();
    const bool ok = band && ksub_f1 > 0.0 && ksub_f1 > single && t < kKsubBudget;
    return verdict(ok, fmt("%.1fs", t));
}

// ---------------------------------------------------------------------------

Verdict partition_invariants() {
    Stopwatch clock;
    Rng rng(606);
    int failures = 0;
    for (int c = 0; c < kPartitionCases; ++c) {
        const std::size_t n = 2 + uniform_index(rng, 199);
        LabeledDataset ds;
        ds.feature_names = {"x"};
        const double rate = oracle::uniform(rng, 0.02, 0.6);
        for (std::size_t i = 0; i < n; ++i) {
            ds.features.append_row(std::vector<double>{uniform01(rng)});
            ds.labels.push_back(uniform01(rng) < rate ? 1 : 0);
        }
        // label 1 may end up as the majority; the partition must follow the counts
        const int maj = majority_label(ds.labels);
        std::vector<std::size_t> majority, minority;
        for (std::size_t i = 0; i < n; ++i) (ds.labels[i] == maj ? majority : minority).push_back(i);
        const int k = 1 + static_cast<int>(uniform_index(rng, std::min<std::size_t>(majority.size(), 12)));
        const auto part = partition_majority(ds, k, rng());
        bool ok = part.k() == static_cast<std::size_t>(k) && part.majority_label == maj;

        std::vector<std::size_t> cover;
        std::size_t lo = n, hi = 0;
        for (const auto& s : part.segments) {
            cover.insert(cover.end(), s.begin(), s.end());
            lo = std::min(lo, s.size());
            hi = std::max(hi, s.size());
        }
        std::sort(cover.begin(), cover.end());
        ok = ok && cover == majority && hi - lo <= 1;

        for (std::size_t m = 0; m < part.k(); ++m) {
            auto rows = member_training_rows(part, ds.labels, m);
            std::sort(rows.begin(), rows.end());
            std::vector<std::size_t> expect = part.segments[m];
            expect.insert(expect.end(), minority.begin(), minority.end());
            std::sort(expect.begin(), expect.end());
            ok = ok && rows == expect;
        }

        std::vector<double> scores(static_cast<std::size_t>(k));
        for (auto& s : scores) s = std::round(uniform01(rng) * 8.0) / 8.0;
        const auto base = combine_votes(scores, VoteRule::mean_probability);
        for (int rep = 0; rep < 5; ++rep) {
            shuffle(std::span<double>(scores), rng);
            const auto v = combine_votes(scores, VoteRule::mean_probability);
            ok = ok && v.score == base.score && v.label == base.label;
        }
        failures += ok ? 0 : 1;
    }
    const double t = clock.seconds();
    return verdict(failures == 0 && t < kPartitionBudget,
                   fmt("%d randomized cases, %d failures, %.2fs", kPartitionCases, failures, t));
}

// ---------------------------------------------------------------------------

struct DriftScores {
    double never = 0.0;
    double daily = 0.0;
};

// Window-1 F1 of both strategies averaged over frames >= from_frame.
DriftScores window1_f1(int flip_frame, std::uint64_t seed, int from_frame) {
    SyntheticStreamConfig s;
    s.n_frames = 48;
    s.rows_per_frame = 300;
    s.flip_frame = flip_frame;
    s.seed = seed;
    const auto ds = make_synthetic_stream(s);
    PipelineConfig cfg;
    cfg.n_frames = 48;
    cfg.train_frames = 24;
    cfg.k_segments = 5;
    cfg.folds = 1;
    cfg.forest.n_trees = 10;
    cfg.seed = seed;
    cfg.horizons = {{1, UpdateStrategy::never}, {1, UpdateStrategy::every_frame}};
    const auto res = run_pipeline(ds, cfg);
    DriftScores out;
    int frames = 0;
    for (const auto& fr : res.frames) {
        if (fr.frame < from_frame || fr.degenerate) continue;
        out.never += fr.horizons[0].f1;
        out.daily += fr.horizons[1].f1;
        ++frames;
    }
    out.never /= frames;
    out.daily /= frames;
    return out;
}

Verdict drift_property() {
    Stopwatch clock;
    constexpr int flip = 36;
    DriftScores drift, stationary;
    for (int s = 0; s < kDriftSeeds; ++s) {
        const auto d = window1_f1(flip, 1000 + s, flip);
        const auto st = window1_f1(-1, 2000 + s, flip);
        drift.never += d.never / kDriftSeeds;
        drift.daily += d.daily / kDriftSeeds;
        stationary.never += st.never / kDriftSeeds;
        stationary.daily += st.daily / kDriftSeeds;
    }
    const double gain = drift.daily - drift.never;
    const double gap = std::abs(stationary.daily - stationary.never);
    const double t = clock.seconds();
    const bool ok = gain >= kDriftGain && gap < kStationaryGap && t < kDriftBudget;
    return verdict(ok, fmt("flip at %d/48, %d seeds: daily %.4f vs never %.4f (gain %.4f, need >= %.2f); "
                           "stationary daily %.4f vs never %.4f (gap %.4f, need < %.2f); %.1fs",
                           flip, kDriftSeeds, drift.daily, drift.never, gain, kDriftGain, stationary.daily,
                           stationary.never, gap, kStationaryGap, t));
}

// ---------------------------------------------------------------------------

// Brute-force oracles written from the definitions, kept separate from the library.
double ratio_or_zero(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

double brute_auc(const std::vector<int>& y, const std::vector<double>& s) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1.0;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return wins / pairs;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

Verdict metrics_exhaustive() {
    Stopwatch clock;
    std::size_t cases = 0, failures = 0;
    Rng rng(808);
    for (std::size_t len = 1; len <= kMetricsMaxLen; ++len) {
        const std::size_t combos = std::size_t{1} << len;
        for (std::size_t ym = 0; ym < combos; ++ym) {
            std::vector<int> y(len);
            for (std::size_t i = 0; i < len; ++i) y[i] = static_cast<int>((ym >> i) & 1u);
            for (std::size_t pm = 0; pm < combos; ++pm) {
                std::vector<int> pr(len);
                for (std::size_t i = 0; i < len; ++i) pr[i] = static_cast<int>((pm >> i) & 1u);
                double tp = 0, fp = 0, fn = 0, tn = 0;
                for (std::size_t i = 0; i < len; ++i) {
                    tp += y[i] && pr[i];
                    fp += !y[i] && pr[i];
                    fn += y[i] && !pr[i];
                    tn += !y[i] && !pr[i];
                }
                const double prec = ratio_or_zero(tp, tp + fp), rec = ratio_or_zero(tp, tp + fn);
                const double f1 = ratio_or_zero(2 * prec * rec, prec + rec);
                const auto c = confusion(y, pr);
                const auto m = precision_recall_f1(c);
                bool ok = c.tp == tp && c.fp == fp && c.fn == fn && c.tn == tn;
                ok = ok && close(m.precision, prec) && close(m.recall, rec) && close(m.f1, f1);
                ok = ok && close(accuracy(y, pr), (tp + tn) / static_cast<double>(len));
                for (double beta : {0.5, 1.0, 2.0}) {
                    const double b2 = beta * beta;
                    const double fb = ratio_or_zero((1 + b2) * prec * rec, b2 * prec + rec);
                    ok = ok && close(f_beta(prec, rec, beta), fb);
                }
                ++cases;
                failures += ok ? 0 : 1;
            }
            const bool both = std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
            if (!both) continue;
            // scores on a coarse grid so ties are frequent
            for (int rep = 0; rep < 20; ++rep) {
                std::vector<double> s(len);
                for (auto& v : s) v = static_cast<double>(uniform_index(rng, 4)) / 3.0;
                ++cases;
                failures += close(roc_auc(y, s), brute_auc(y, s)) ? 0 : 1;
            }
        }
    }
    const double t = clock.seconds();
    return verdict(failures == 0 && t < kMetricsBudget,
                   fmt("%zu cases up to length %zu, %zu failures, %.2fs", cases, kMetricsMaxLen, failures, t));
}

// ---------------------------------------------------------------------------

Verdict aggregation_exact() {
    Stopwatch clock;
    Rng rng(909);
    LabeledDataset ds;
    ds.feature_names = {"card", "Amount"};
    std::vector<double> times;
    for (std::size_t i = 0; i < kAggregateRows; ++i) {
        const double amount = std::ldexp(uniform01(rng), static_cast<int>(uniform_index(rng, 40)) - 10);
        ds.features.append_row(std::vector<double>{static_cast<double>(uniform_index(rng, 25)), amount});
        ds.labels.push_back(uniform01(rng) < 0.05 ? 1 : 0);
        // whole-minute times over four weeks so that ties and window edges occur
        times.push_back(60.0 * static_cast<double>(uniform_index(rng, 28 * 24 * 60)));
    }
    std::sort(times.begin(), times.end());
    ds.timestamps = times;
    AggregationSpec spec;
    spec.group_by = "card";
    const auto out = aggregate(ds, "Amount", spec);
    const auto expect = oracle::naive_aggregate(ds, 0, 1, spec.windows_hours);
    std::size_t mismatches = 0;
    const std::size_t cols = spec.windows_hours.size() * 3;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t c = 0; c < cols; ++c) mismatches += out.features(i, 2 + c) == expect[i][c] ? 0 : 1;
    const double t = clock.seconds();
    return verdict(mismatches == 0 && out.n_features() == 2 + cols && t < kAggregateBudget,
                   fmt("%zu rows x %zu windows x 3 functions, %zu mismatches, %.2fs", ds.size(),
                       spec.windows_hours.size(), mismatches, t));
}

// ---------------------------------------------------------------------------

Verdict cli_determinism() {
    const auto dir = scratch_dir();
    const auto data = dir / "stream.csv";
    SyntheticStreamConfig s;
    s.n_frames = 8;
    s.rows_per_frame = 60;
    s.n_features = 3;
    s.fraud_threshold = 0.9;
    s.seed = 10;
    auto ds = make_synthetic_stream(s);
    Matrix m(ds.size(), ds.n_features() + 1);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) m(i, j) = ds.features(i, j);
        m(i, ds.n_features()) = static_cast<double>(i % 11);
    }
    ds.features = m;
    ds.feature_names.push_back("card");
    write_csv(data, ds, {"Class", "Time"});

    const std::string d = " --data " + data.string() + " --seed 9";
    const std::vector<std::pair<std::string, std::string>> commands{
        {"ksub", "ksub" + d + " --k 3 --folds 3 --trees 10"},
        {"graphssl", "graphssl" + d + " --max-iters 200"},
        {"pipeline", "pipeline" + d + " --frames 8 --train-frames 4 --k 3 --folds 2 --trees 5"},
        {"aggregate", "aggregate" + d + " --group-by card --amount-col x1"},
    };
    bool ok = true;
    for (const auto& [name, args] : commands) {
        std::string outputs[2];
        int codes[2];
        for (int run = 0; run < 2; ++run) {
            const auto out = dir / (name + std::to_string(run) + ".out");
            const auto log = dir / (name + std::to_string(run) + ".frames.csv");
            const std::string extra = name == "pipeline" ? " --frame-log " + log.string() : "";
            codes[run] = run_cli(args + extra, out);
            outputs[run] = slurp(out) + (name == "pipeline" ? slurp(log) : "");
        }
        const bool same = codes[0] == 0 && codes[1] == 0 && !outputs[0].empty() && outputs[0] == outputs[1];
        info(fmt("%-9s exit %d/%d, %zu bytes, %s", name.c_str(), codes[0], codes[1], outputs[0].size(),
                 same ? "identical" : "DIFFERENT"));
        ok = ok && same;
    }
    return verdict(ok, "each subcommand run twice with seed 9");
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "operator identities on random graphs", operator_identities},
        {2, "smoothness derivatives against stated operators", smoothness_derivatives},
        {3, "p=2 solver against a direct linear solve", p2_matches_linear_solve},
        {4, "graph SSL accuracy on ULB credit-card data", ulb_graph_accuracy},
        {5, "K-SUB F1 on ULB credit-card data", ulb_ksub_f1},
        {6, "partition and vote invariants", partition_invariants},
        {7, "daily vs never updates under drift", drift_property},
        {8, "metrics against exhaustive brute force", metrics_exhaustive},
        {9, "sliding-window aggregates against a quadratic scan", aggregation_exact},
        {10, "CLI reports are byte-identical across runs", cli_determinism},
    };
    return all;
}

Outcome run_one(const Criterion& c) {
    Verdict v{Outcome::fail, ""};
    try {
        v = c.run();
    } catch (const std::exception& e) {
        v = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::skip ? "SKIP" : "FAIL";
    std::cout << "[" << tag << "] criterion " << c.id << ": " << c.name << " -- " << v.detail << std::endl;
    return v.outcome;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: fraudkit_acceptance [--criterion N]\n";
            return 2;
        }
    }
    int failed = 0, skipped = 0, ran = 0;
    for (const auto& c : criteria()) {
        if (only != 0 && c.id != only) continue;
        ++ran;
        const auto o = run_one(c);
        failed += o == Outcome::fail;
        skipped += o == Outcome::skip;
    }
    std::error_code ec;
    fs::remove_all(scratch_dir(), ec);
    if (ran == 0) {
        std::cerr << "no criterion " << only << "\n";
        return 2;
    }
    if (failed > 0) return 1;
    if (only != 0 && skipped > 0) return 77;
    return 0;
}
