#include "doctest.h"
#include "fraudkit/error.hpp"
#include "fraudkit/pipeline.hpp"

using namespace fraudkit;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.n_frames = 10;
    cfg.train_frames = 5;
    cfg.k_segments = 3;
    cfg.folds = 2;
    cfg.forest.n_trees = 5;
    cfg.seed = 4;
    return cfg;
}

LabeledDataset small_stream(int flip = -1) {
    SyntheticStreamConfig s;
    s.n_frames = 10;
    s.rows_per_frame = 80;
    s.flip_frame = flip;
    s.seed = 1;
    return make_synthetic_stream(s);
}

} // namespace

TEST_CASE("synthetic stream: frames line up with generation and the flip inverts the rule") {
    const auto ds = make_synthetic_stream({10, 50, 3, 1.0, 5, 0.0, 9});
    CHECK(ds.size() == 500);
    const auto split = split_time_frames(ds, 10);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(split.frame_of[i] == static_cast<int>(i / 50));
        const double x0 = ds.features(i, 0);
        const int expect = i / 50 >= 5 ? (x0 < -1.0) : (x0 > 1.0);
        CHECK(ds.labels[i] == expect);
    }
}

TEST_CASE("update strategy names") {
    CHECK(parse_update_strategy("daily") == UpdateStrategy::every_frame);
    CHECK(parse_update_strategy("never") == UpdateStrategy::never);
    CHECK(std::string(to_string(UpdateStrategy::every_frame)) == "daily");
    CHECK_THROWS_AS(parse_update_strategy("weekly"), Error);
}

TEST_CASE("pipeline: models only see earlier frames; never-update models are frozen") {
    auto cfg = small_config();
    cfg.horizons = {{1, UpdateStrategy::never}, {2, UpdateStrategy::every_frame}, {3, UpdateStrategy::never}};
    const auto res = run_pipeline(small_stream(), cfg);
    CHECK(res.frames.size() == 2u * (10 - 3));
    for (const auto& fr : res.frames) {
        CHECK(fr.frame >= 3);
        REQUIRE(fr.trained_on.size() == 3);
        for (std::size_t h = 0; h < 3; ++h) {
            const auto [first, last] = fr.trained_on[h];
            CHECK(last < fr.frame);
            CHECK(last - first + 1 == cfg.horizons[h].window_frames);
            if (fr.test_phase && cfg.horizons[h].update == UpdateStrategy::never) CHECK(last == cfg.train_frames - 1);
            if (cfg.horizons[h].update == UpdateStrategy::every_frame || !fr.test_phase) CHECK(last == fr.frame - 1);
        }
        CHECK(fr.ensemble.has_value());
    }
    CHECK(res.horizons[0].updates == 0);
    CHECK(res.horizons[1].updates == 5);
    REQUIRE(res.ensemble.has_value());
}

TEST_CASE("pipeline: deterministic for a fixed seed") {
    const auto ds = small_stream();
    const auto a = run_pipeline(ds, small_config());
    const auto b = run_pipeline(ds, small_config());
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i)
        for (std::size_t h = 0; h < a.frames[i].horizons.size(); ++h)
            CHECK(a.frames[i].horizons[h].f1 == b.frames[i].horizons[h].f1);
    CHECK(a.horizons[0].test.mean_f1 == b.horizons[0].test.mean_f1);
}

TEST_CASE("pipeline: ensemble does not depend on horizon order") {
    const auto ds = small_stream();
    auto cfg = small_config();
    const auto a = run_pipeline(ds, cfg);
    std::reverse(cfg.horizons.begin(), cfg.horizons.end());
    const auto b = run_pipeline(ds, cfg);
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].ensemble->f1 == b.frames[i].ensemble->f1);
        CHECK(a.frames[i].ensemble->counts == b.frames[i].ensemble->counts);
    }
}

TEST_CASE("pipeline: frames without fraud are flagged and kept out of the averages") {
    auto ds = small_stream();
    // wipe all fraud in frame 7
    const auto split = split_time_frames(ds, 10);
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (split.frame_of[i] == 7) ds.labels[i] = 0;
    auto cfg = small_config();
    cfg.horizons = {{1, UpdateStrategy::every_frame}};
    const auto res = run_pipeline(ds, cfg);
    for (const auto& fr : res.frames)
        if (fr.frame == 7) {
            CHECK(fr.degenerate);
            CHECK(fr.horizons[0].f1 == 0.0);
        }
    CHECK(res.horizons[0].test.degenerate_frames == 2); // one per fold
    CHECK(res.horizons[0].test.frames == 2u * 4u);
    CHECK_FALSE(res.ensemble.has_value());
}

TEST_CASE("pipeline: drift hurts the frozen short-term model") {
    const auto ds = small_stream(7);
    auto cfg = small_config();
    const auto rows = compare_update_strategies(ds, cfg, {1});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].summary.update == UpdateStrategy::never);
    CHECK(rows[1].summary.update == UpdateStrategy::every_frame);
    CHECK(rows[1].summary.test.mean_f1 > rows[0].summary.test.mean_f1);
}

TEST_CASE("pipeline: table rows for three windows plus ensembles") {
    const auto ds = small_stream();
    const auto rows = compare_update_strategies(ds, small_config(), {1, 2, 3});
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].model == "1");
    CHECK(rows[6].model == "ensemble");
    CHECK(rows[7].summary.updates == 15);
}

TEST_CASE("pipeline: configuration errors") {
    const auto ds = small_stream();
    auto cfg = small_config();
    cfg.train_frames = 10;
    CHECK_THROWS_AS(run_pipeline(ds, cfg), Error);
    cfg = small_config();
    cfg.horizons = {{6, UpdateStrategy::never}};
    CHECK_THROWS_AS(run_pipeline(ds, cfg), Error);
    auto no_time = ds;
    no_time.timestamps.reset();
    CHECK_THROWS_AS(run_pipeline(no_time, small_config()), Error);
}
