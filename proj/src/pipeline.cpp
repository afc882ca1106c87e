#include "fraudkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "fraudkit/error.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

const char* to_string(UpdateStrategy s) noexcept {
    switch (s) {
    case UpdateStrategy::never: return "never";
    case UpdateStrategy::every_frame: return "daily";
    }
    return "?";
}

UpdateStrategy parse_update_strategy(const std::string& name) {
    if (name == "never") return UpdateStrategy::never;
    if (name == "daily" || name == "every_frame") return UpdateStrategy::every_frame;
    fail(ErrorKind::invalid_argument, "unknown update strategy '" + name + "' (never|daily)");
}

void PipelineConfig::validate() const {
    require(!horizons.empty(), ErrorKind::invalid_argument, "at least one horizon is required");
    int widest = 0;
    for (const auto& h : horizons) {
        require(h.window_frames >= 1, ErrorKind::invalid_argument, "window_frames must be >= 1");
        widest = std::max(widest, h.window_frames);
    }
    require(train_frames >= widest, ErrorKind::invalid_argument,
            "train_frames (" + std::to_string(train_frames) + ") is shorter than the widest window (" +
                std::to_string(widest) + ")");
    require(n_frames > train_frames, ErrorKind::invalid_argument,
            "n_frames must exceed train_frames");
    require(k_segments >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(folds >= 1, ErrorKind::invalid_argument, "folds must be >= 1");
}

double WindowModel::score(std::span<const double> x) const {
    return ensemble ? ensemble->predict(x).score : constant_score;
}

namespace {

struct FoldContext {
    const LabeledDataset& ds;
    const PipelineConfig& cfg;
    const std::vector<std::vector<std::size_t>>& frame_rows;
    std::vector<char> trainable;
    std::vector<char> scored;
    int fold = 0;
    std::map<std::pair<int, int>, WindowModel> cache;

    const WindowModel& model_for(int first, int last) {
        auto key = std::make_pair(first, last);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        std::vector<std::size_t> rows;
        for (int f = first; f <= last; ++f)
            for (std::size_t r : frame_rows[static_cast<std::size_t>(f)])
                if (trainable[r]) rows.push_back(r);
        const LabeledDataset window = ds.subset(rows);

        WindowModel m;
        m.first_frame = first;
        m.last_frame = last;
        const std::size_t pos = window.count_label(1);
        if (pos > 0 && pos < window.size()) {
            const std::size_t majority = std::max(pos, window.size() - pos);
            const int k = static_cast<int>(std::min<std::size_t>(
                static_cast<std::size_t>(cfg.k_segments), majority));
            const std::uint64_t stream = (static_cast<std::uint64_t>(fold) << 40) |
                                         (static_cast<std::uint64_t>(first) << 20) |
                                         static_cast<std::uint64_t>(last);
            m.ensemble = train_ksub(window, k, cfg.forest, derive_seed(cfg.seed, stream));
        } else {
            m.constant_score = pos > 0 ? 1.0 : 0.0;
        }
        return cache.emplace(key, std::move(m)).first->second;
    }

    void evict_before(int frame, const std::vector<std::pair<int, int>>& pinned) {
        for (auto it = cache.begin(); it != cache.end();) {
            const bool keep = it->first.second >= frame ||
                              std::find(pinned.begin(), pinned.end(), it->first) != pinned.end();
            it = keep ? std::next(it) : cache.erase(it);
        }
    }
};

MetricReport report(std::span<const int> truth, std::span<const int> preds,
                    std::span<const double> scores) {
    // a frame can be empty in one fold; it is flagged degenerate anyway
    if (truth.empty()) return {};
    return evaluate(truth, preds, scores);
}

void summarise(const std::vector<FrameRecord>& frames, int folds, bool test_phase,
               const std::function<std::optional<double>(const FrameRecord&)>& f1_of,
               PhaseSummary& out) {
    std::vector<double> fold_means;
    std::vector<double> all;
    for (int fold = 0; fold < folds; ++fold) {
        std::vector<double> vals;
        for (const auto& fr : frames) {
            if (fr.fold != fold || fr.test_phase != test_phase) continue;
            if (fr.degenerate) {
                ++out.degenerate_frames;
                continue;
            }
            if (auto v = f1_of(fr)) vals.push_back(*v);
        }
        if (vals.empty()) continue;
        fold_means.push_back(mean_std(vals).first);
        all.insert(all.end(), vals.begin(), vals.end());
    }
    std::tie(out.mean_f1, out.std_f1) = mean_std(fold_means);
    out.frame_std = mean_std(all).second;
    out.frames = all.size();
}

} // namespace

PipelineResult run_pipeline(const LabeledDataset& ds, const PipelineConfig& cfg) {
    ds.validate();
    cfg.validate();
    require(ds.timestamps.has_value(), ErrorKind::missing_timestamps,
            "the pipeline needs per-transaction timestamps");

    const auto split = split_time_frames(ds, cfg.n_frames);
    std::vector<std::vector<std::size_t>> frame_rows(static_cast<std::size_t>(cfg.n_frames));
    for (int f = 0; f < cfg.n_frames; ++f) frame_rows[static_cast<std::size_t>(f)] = split.members(f);

    std::vector<int> fold_of(ds.size(), 0);
    if (cfg.folds > 1)
        fold_of = stratified_kfold(ds.labels, cfg.folds, derive_seed(cfg.seed, 0x666f6c6473ULL)).fold_of;

    int widest = 0;
    for (const auto& h : cfg.horizons) widest = std::max(widest, h.window_frames);

    PipelineResult res;
    res.frame_boundaries = split.boundaries;

    for (int fold = 0; fold < cfg.folds; ++fold) {
        FoldContext ctx{ds, cfg, frame_rows, {}, {}, fold, {}};
        ctx.trainable.resize(ds.size());
        ctx.scored.resize(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            ctx.trainable[i] = cfg.folds == 1 || fold_of[i] != fold;
            ctx.scored[i] = cfg.folds == 1 || fold_of[i] == fold;
        }
        std::vector<std::pair<int, int>> pinned;
        for (const auto& h : cfg.horizons)
            pinned.emplace_back(cfg.train_frames - h.window_frames, cfg.train_frames - 1);

        for (int t = widest; t < cfg.n_frames; ++t) {
            FrameRecord rec;
            rec.fold = fold;
            rec.frame = t;
            rec.test_phase = t >= cfg.train_frames;

            std::vector<std::size_t> rows;
            for (std::size_t r : frame_rows[static_cast<std::size_t>(t)])
                if (ctx.scored[r]) rows.push_back(r);
            std::vector<int> truth;
            for (std::size_t r : rows) truth.push_back(ds.labels[r]);
            rec.rows = rows.size();
            rec.positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
            rec.degenerate = rec.positives == 0;

            std::vector<std::vector<double>> horizon_scores;
            for (const auto& h : cfg.horizons) {
                const bool frozen = rec.test_phase && h.update == UpdateStrategy::never;
                const int last = frozen ? cfg.train_frames - 1 : t - 1;
                const WindowModel& model = ctx.model_for(last - h.window_frames + 1, last);
                std::vector<double> scores;
                std::vector<int> preds;
                for (std::size_t r : rows) {
                    scores.push_back(model.score(ds.features.row(r)));
                    preds.push_back(scores.back() >= 0.5 ? 1 : 0);
                }
                rec.horizons.push_back(report(truth, preds, scores));
                rec.trained_on.emplace_back(model.first_frame, model.last_frame);
                horizon_scores.push_back(std::move(scores));
            }
            if (cfg.horizons.size() >= 2) {
                std::vector<double> scores;
                std::vector<int> preds;
                std::vector<double> member(cfg.horizons.size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    for (std::size_t h = 0; h < member.size(); ++h) member[h] = horizon_scores[h][i];
                    const auto v = combine_votes(member, VoteRule::mean_probability);
                    scores.push_back(v.score);
                    preds.push_back(v.label);
                }
                rec.ensemble = report(truth, preds, scores);
            }
            res.frames.push_back(std::move(rec));
            ctx.evict_before(t - widest, pinned);
        }
    }

    const int test_frames = cfg.n_frames - cfg.train_frames;
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        HorizonSummary s;
        s.window_frames = cfg.horizons[h].window_frames;
        s.update = cfg.horizons[h].update;
        // one retrain per testing frame once its labels are in
        s.updates = s.update == UpdateStrategy::every_frame ? test_frames : 0;
        auto f1_of = [h](const FrameRecord& fr) -> std::optional<double> { return fr.horizons[h].f1; };
        summarise(res.frames, cfg.folds, false, f1_of, s.train);
        summarise(res.frames, cfg.folds, true, f1_of, s.test);
        res.horizons.push_back(s);
    }
    if (cfg.horizons.size() >= 2) {
        HorizonSummary s;
        s.window_frames = 0;
        const bool all_never = std::all_of(cfg.horizons.begin(), cfg.horizons.end(), [](const auto& h) {
            return h.update == UpdateStrategy::never;
        });
        s.update = all_never ? UpdateStrategy::never : UpdateStrategy::every_frame;
        for (const auto& hs : res.horizons) s.updates += hs.updates;
        auto f1_of = [](const FrameRecord& fr) -> std::optional<double> {
            if (!fr.ensemble) return std::nullopt;
            return fr.ensemble->f1;
        };
        summarise(res.frames, cfg.folds, false, f1_of, s.train);
        summarise(res.frames, cfg.folds, true, f1_of, s.test);
        res.ensemble = s;
    }
    return res;
}

std::vector<StrategyRow> compare_update_strategies(const LabeledDataset& ds,
                                                   const PipelineConfig& base,
                                                   const std::vector<int>& windows) {
    require(!windows.empty(), ErrorKind::invalid_argument, "no windows given");
    std::vector<PipelineResult> runs;
    for (auto strategy : {UpdateStrategy::never, UpdateStrategy::every_frame}) {
        PipelineConfig cfg = base;
        cfg.horizons.clear();
        for (int w : windows) cfg.horizons.push_back({w, strategy});
        runs.push_back(run_pipeline(ds, cfg));
    }
    std::vector<StrategyRow> rows;
    for (std::size_t w = 0; w < windows.size(); ++w)
        for (const auto& run : runs) rows.push_back({std::to_string(windows[w]), run.horizons[w]});
    for (const auto& run : runs)
        if (run.ensemble) rows.push_back({"ensemble", *run.ensemble});
    return rows;
}

namespace {

double standard_normal(Rng& rng) {
    // Box-Muller on the portable uniform draw
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace

LabeledDataset make_synthetic_stream(const SyntheticStreamConfig& cfg) {
    require(cfg.n_frames >= 1 && cfg.rows_per_frame >= 1 && cfg.n_features >= 1,
            ErrorKind::invalid_argument, "synthetic stream needs frames, rows and features");
    require(cfg.label_noise >= 0.0 && cfg.label_noise <= 1.0, ErrorKind::invalid_argument,
            "label_noise must be in [0,1]");
    Rng rng(derive_seed(cfg.seed, 0x73747265616dULL));

    LabeledDataset ds;
    for (std::size_t d = 0; d < cfg.n_features; ++d) ds.feature_names.push_back("x" + std::to_string(d));
    std::vector<double> times;
    std::vector<double> x(cfg.n_features);
    const double step = 3600.0 / static_cast<double>(cfg.rows_per_frame);
    for (int f = 0; f < cfg.n_frames; ++f) {
        const bool flipped = cfg.flip_frame >= 0 && f >= cfg.flip_frame;
        for (std::size_t r = 0; r < cfg.rows_per_frame; ++r) {
            for (auto& v : x) v = standard_normal(rng);
            int label = flipped ? (x[0] < -cfg.fraud_threshold) : (x[0] > cfg.fraud_threshold);
            if (cfg.label_noise > 0.0 && uniform01(rng) < cfg.label_noise) label = 1 - label;
            ds.features.append_row(x);
            ds.labels.push_back(label);
            times.push_back(3600.0 * f + step * static_cast<double>(r));
        }
    }
    // pin the range end so equal-width frames are exactly one hour each
    times.back() = 3600.0 * cfg.n_frames;
    ds.timestamps = std::move(times);
    return ds;
}

} // namespace fraudkit
