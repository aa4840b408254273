#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "sglab/harness.hpp"
#include "stats.hpp"

using namespace sglab;

namespace {

float mean_abs_diff(const ImageF& a, const ImageF& b) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < a.px.size(); ++i) acc += std::abs(a.px[i] - b.px[i]);
    return acc / static_cast<float>(a.px.size());
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// proposer

TEST_CASE("failure-free proposer: all candidates equal the true expert future") {
    const Instruction instr = Instruction::from_token(4);
    const WorldState st = reset(900, instr);
    ProposerConfig cfg;
    cfg.K = 5;
    Rng rng(901);
    const auto cands = propose(cfg, st, instr, rng);
    REQUIRE(cands.size() == 5);

    // reference: noise-free expert rolled 20 steps
    WorldState ref = st;
    for (int t = 0; t < cfg.subgoal_horizon; ++t)
        ref = step(ref, expert_action(ref, instr, nullptr));
    const ImageF expect = render(ref);
    for (const auto& c : cands) {
        CHECK(c.provenance == Provenance::OnTask);
        CHECK(c.artifact_severity == 0.0f);
        CHECK(c.final_frame().px == expect.px);
    }
}

TEST_CASE("p_off_task = 1 tags every candidate off-task with a different instruction") {
    const Instruction instr = Instruction::from_token(4);
    const WorldState st = reset(902, instr);
    ProposerConfig cfg;
    cfg.K = 8;
    cfg.p_off_task = 1.0;
    Rng rng(903);
    const auto cands = propose(cfg, st, instr, rng);
    for (const auto& c : cands) {
        CHECK(c.provenance == Provenance::OffTask);
        CHECK(c.actual_token != instr.token());
    }
}

TEST_CASE("p_off_task = 0.5, K = 8: on-task count is binomial around 4") {
    const Instruction instr = Instruction::from_token(2);
    const WorldState st = reset(904, instr);
    ProposerConfig cfg;
    cfg.K = 8;
    cfg.p_off_task = 0.5;
    double on_total = 0.0;
    const int calls = 1000;
    for (int i = 0; i < calls; ++i) {
        Rng rng(derive_seed(905, i));
        for (const auto& c : propose(cfg, st, instr, rng))
            if (c.provenance == Provenance::OnTask) on_total += 1.0;
    }
    const double mean_on = on_total / calls;
    // 3 sigma of a Binomial(8, 0.5) sample mean over 1000 calls
    const double sigma = std::sqrt(8 * 0.25 / calls);
    CHECK(std::abs(mean_on - 4.0) <= std::max(0.5, 3.0 * sigma));
}

TEST_CASE("video-style proposals carry 16-frame clips") {
    const Instruction instr = Instruction::from_token(2);
    const WorldState st = reset(906, instr);
    ProposerConfig cfg;
    cfg.mode = ProposerMode::VideoStyle;
    cfg.K = 3;
    Rng rng(907);
    const auto cands = propose(cfg, st, instr, rng);
    for (const auto& c : cands) CHECK(c.frames.size() == 16);
}

TEST_CASE("inject_artifacts: severity 0 is bitwise identity, severity 1 moves pixels") {
    const ImageF im = render(reset(908, Instruction::from_token(1)));
    Rng rng(909);
    const ImageF same = inject_artifacts(im, 0.0f, rng);
    CHECK(same.px == im.px);

    float total = 0.0f;
    for (int i = 0; i < 20; ++i) {
        Rng r2(derive_seed(910, i));
        total += mean_abs_diff(inject_artifacts(im, 1.0f, r2), im);
    }
    CHECK(total / 20 >= 0.02f);

    Rng a(911), b(911);
    CHECK(inject_artifacts(im, 0.7f, a).px == inject_artifacts(im, 0.7f, b).px);
    Rng c(912);
    CHECK_THROWS_AS(inject_artifacts(im, 1.5f, c), std::invalid_argument);
}

TEST_CASE("external candidates: manifest loading and error paths") {
    const auto dir = temp_dir("sglab_manifest_test");

    // valid image manifest with 4 raw frames
    for (int i = 0; i < 4; ++i) {
        const ImageF im = render(reset(derive_seed(913, i), Instruction::from_token(i)));
        const Image8 q = quantize(im);
        std::ofstream os(dir / ("c" + std::to_string(i) + ".rgb"), std::ios::binary);
        os.write(reinterpret_cast<const char*>(q.px.data()),
                 static_cast<std::streamsize>(q.px.size()));
    }
    {
        std::ofstream os(dir / "manifest.json");
        os << R"({"mode":"image","instruction":3,"candidates":["c0.rgb","c1.rgb","c2.rgb","c3.rgb"]})";
    }
    const auto cands = load_external_candidates((dir / "manifest.json").string());
    REQUIRE(cands.size() == 4);
    for (const auto& c : cands) {
        CHECK(c.provenance == Provenance::Unknown);
        CHECK(c.frames.size() == 1);
    }

    // missing file is named in the error
    {
        std::ofstream os(dir / "missing.json");
        os << R"({"mode":"image","candidates":["nope.rgb"]})";
    }
    CHECK_THROWS_WITH_AS(load_external_candidates((dir / "missing.json").string()),
                         doctest::Contains("nope.rgb"), std::runtime_error);

    // a 15-frame video directory is rejected with the expected message
    std::filesystem::create_directories(dir / "clip");
    for (int i = 0; i < 15; ++i) {
        const Image8 q = quantize(render(reset(914, Instruction::from_token(0))));
        char name[16];
        std::snprintf(name, sizeof name, "f%02d.rgb", i);
        std::ofstream os(dir / "clip" / name, std::ios::binary);
        os.write(reinterpret_cast<const char*>(q.px.data()),
                 static_cast<std::streamsize>(q.px.size()));
    }
    {
        std::ofstream os(dir / "video.json");
        os << R"({"mode":"video","candidates":["clip"]})";
    }
    CHECK_THROWS_WITH_AS(load_external_candidates((dir / "video.json").string()),
                         doctest::Contains("expected 16 frames"), std::runtime_error);

    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// filtering

TEST_CASE("select_by_scores: argmax, ties to the lowest index, K=1") {
    CHECK(select_by_scores({0.3f}, ProposerMode::ImageStyle).selected == 0);
    CHECK(select_by_scores({0.0f, 1.0f, 2.0f, 3.0f}, ProposerMode::ImageStyle).selected == 3);
    CHECK(select_by_scores({0.7f, 0.7f, 0.3f}, ProposerMode::ImageStyle).selected == 0);
    CHECK_THROWS_AS(select_by_scores({}, ProposerMode::ImageStyle), std::invalid_argument);
}

TEST_CASE("selection is permutation-equivariant when the max is unique") {
    ClassifierNet net;
    net.init(920);
    const Instruction instr = Instruction::from_token(3);
    const WorldState st = reset(921, instr);
    ProposerConfig cfg;
    cfg.K = 4;
    cfg.p_off_task = 0.5;
    Rng rng(922);
    auto cands = propose(cfg, st, instr, rng);
    const ImageF obs = render(st);

    const FilterDecision d1 = select_subgoal(net, obs, cands, instr, cfg.mode);
    std::vector<SubgoalCandidate> rev(cands.rbegin(), cands.rend());
    const FilterDecision d2 = select_subgoal(net, obs, rev, instr, cfg.mode);
    const int K = static_cast<int>(cands.size());
    for (int i = 0; i < K; ++i) CHECK(d1.scores[i] == d2.scores[K - 1 - i]);
    CHECK(d1.scores[d1.selected] == d2.scores[d2.selected]);
    CHECK(cands[d1.selected].final_frame().px == rev[d2.selected].final_frame().px);
}

TEST_CASE("provenance is invisible to selection") {
    ClassifierNet net;
    net.init(930);
    const Instruction instr = Instruction::from_token(5);
    const WorldState st = reset(931, instr);
    ProposerConfig cfg;
    cfg.K = 6;
    cfg.p_off_task = 0.5;
    Rng rng(932);
    auto cands = propose(cfg, st, instr, rng);
    const ImageF obs = render(st);
    const FilterDecision before = select_subgoal(net, obs, cands, instr, cfg.mode);
    // scramble every provenance tag; the decision must not move
    for (auto& c : cands) {
        c.provenance = c.provenance == Provenance::OnTask ? Provenance::OffTask
                                                          : Provenance::OnTask;
        c.actual_token = 0;
        c.artifact_severity = 0.9f;
    }
    const FilterDecision after = select_subgoal(net, obs, cands, instr, cfg.mode);
    CHECK(before.selected == after.selected);
    CHECK(before.scores == after.scores);
}

TEST_CASE("perfect-oracle selection picks off-task only when all K are off-task") {
    const Instruction instr = Instruction::from_token(2);
    const WorldState st = reset(940, instr);
    ProposerConfig cfg;
    cfg.K = 4;
    cfg.p_off_task = 0.4;
    int all_off = 0, picked_off = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        Rng rng(derive_seed(941, i));
        const auto cands = propose(cfg, st, instr, rng);
        std::vector<float> oracle;
        bool any_on = false;
        for (const auto& c : cands) {
            const bool on = c.provenance == Provenance::OnTask;
            oracle.push_back(on ? 1.0f : 0.0f);
            any_on = any_on || on;
        }
        const FilterDecision d = select_by_scores(oracle, cfg.mode);
        if (!any_on) ++all_off;
        if (cands[d.selected].provenance == Provenance::OffTask) ++picked_off;
    }
    CHECK(all_off == picked_off);  // off-task selected exactly when no on-task exists
    const double expect = std::pow(cfg.p_off_task, cfg.K);
    CHECK(teststats::binomial_within(static_cast<double>(all_off) / trials, expect, trials));
}

// ---------------------------------------------------------------------------
// harness

namespace {

struct TinyStack {
    ProposerConfig prop;
    PolicyNet policy;
    Stack stack;

    explicit TinyStack(int K = 2) {
        prop.K = K;
        policy.init(7);
        stack.proposer = &prop;
        stack.policy = &policy;
    }
};

}  // namespace

TEST_CASE("stack validation fires before rollout") {
    ProposerConfig prop;
    Stack stack;
    stack.proposer = &prop;
    ChainConfig cfg;
    CHECK_THROWS_AS(validate_stack(stack, cfg), std::runtime_error);  // no policy

    PolicyNet pol;
    pol.init(1);
    stack.policy = &pol;
    cfg.refresh_period = 10;  // mismatches subgoal_horizon 20
    CHECK_THROWS_AS(validate_stack(stack, cfg), std::runtime_error);
    cfg.refresh_period = prop.subgoal_horizon;
    CHECK_NOTHROW(validate_stack(stack, cfg));
}

TEST_CASE("max steps 0 gives an immediate failure with 0 steps") {
    TinyStack ts;
    ChainConfig cfg;
    cfg.max_steps_per_task = 0;
    const EpisodeResult r = run_episode(50, Instruction::from_token(0), ts.stack, cfg);
    CHECK(!r.success);
    CHECK(r.steps == 0);
}

TEST_CASE("episodes are deterministic given seeds and config") {
    TinyStack ts;
    ChainConfig cfg;
    cfg.max_steps_per_task = 30;
    const Instruction instr = Instruction::from_token(2);
    const EpisodeResult a = run_episode(51, instr, ts.stack, cfg);
    const EpisodeResult b = run_episode(51, instr, ts.stack, cfg);
    CHECK(a.success == b.success);
    CHECK(a.steps == b.steps);
    REQUIRE(a.decisions.size() == b.decisions.size());
    for (std::size_t i = 0; i < a.decisions.size(); ++i)
        CHECK(a.decisions[i].selected == b.decisions[i].selected);
}

TEST_CASE("chains stop at the first failure") {
    // a policy with random init will not solve tasks in 4 steps: length 0
    TinyStack ts;
    ChainConfig cfg;
    cfg.max_steps_per_task = 4;
    const auto tasks = sample_chain_tasks(60, 5);
    REQUIRE(tasks.size() == 5);
    const ChainResult r = run_task_chain(61, tasks, ts.stack, cfg);
    CHECK(r.length == 0);
    CHECK(r.tasks_attempted == 1);  // later tasks were not attempted
}

TEST_CASE("chain tasks are distinct, held-in, and sequentially achievable") {
    for (int i = 0; i < 50; ++i) {
        const auto tasks = sample_chain_tasks(derive_seed(62, i), 5);
        std::set<std::pair<int, int>> combos;
        for (const auto& t : tasks) {
            CHECK(!is_held_out_token(t.token()));
            combos.insert({static_cast<int>(t.shape), static_cast<int>(t.color)});
        }
        CHECK(combos.size() == 5);  // distinct objects: no conflicts
        const WorldState scene = reset_multi(derive_seed(63, i), tasks, 1);
        for (const auto& t : tasks) {
            CHECK(scene.find_object(t.shape, t.color) != nullptr);
            CHECK(!task_success(scene, t));  // nothing pre-satisfied
        }
    }
}

TEST_CASE("metrics: avg length equals the sum of completion fractions") {
    std::vector<ChainResult> chains;
    for (int len : {0, 1, 3, 5, 2, 2, 0, 4}) {
        ChainResult c;
        c.length = len;
        c.tasks_attempted = std::min(5, len + 1);
        for (int i = 0; i < len; ++i) c.task_ok[i] = true;
        chains.push_back(c);
    }
    const Metrics m = aggregate_metrics("cell", 1, chains, 0.0);
    double sum = 0.0;
    for (int n = 0; n < 5; ++n) {
        sum += m.frac_at_least[n];
        if (n > 0) CHECK(m.frac_at_least[n] <= m.frac_at_least[n - 1]);  // monotone
    }
    CHECK(m.avg_len == doctest::Approx(sum));
    const double direct =
        (0.0 + 1 + 3 + 5 + 2 + 2 + 0 + 4) / 8.0;
    CHECK(m.avg_len == doctest::Approx(direct));
}

TEST_CASE("csv schema: 3-decimal fixed format, header-only when empty") {
    CHECK(metrics_to_csv({}) == "cell,seed,n1,n2,n3,n4,n5,avg_len,off_task_rate\n");

    Metrics m;
    m.cell = "both_k8";
    m.seed = 3;
    m.frac_at_least = {0.9, 0.7, 0.5, 0.3, 0.1};
    m.avg_len = 2.0;
    m.off_task_rate = 0.125;
    Metrics m2 = m;
    m2.seed = 4;
    m2.avg_len = 3.0;
    const std::string csv = metrics_to_csv({m, m2});
    CHECK(csv.find("both_k8,3,0.900,0.700,0.500,0.300,0.100,2.000,0.125") != std::string::npos);
    CHECK(csv.find("3.000") != std::string::npos);
}

TEST_CASE("summary rows follow the configured cell order") {
    Metrics a, b;
    a.cell = "zcell";
    b.cell = "acell";
    a.avg_len = 1.0;
    b.avg_len = 2.0;
    const std::string s = metrics_summary({a, b}, {"zcell", "acell"});
    CHECK(s.find("zcell") < s.find("acell"));
}

TEST_CASE("metrics json round-trips through the report path") {
    Metrics m;
    m.cell = "filter_only_k8";
    m.seed = 11;
    m.frac_at_least = {0.8, 0.6, 0.4, 0.2, 0.0};
    m.avg_len = 2.0;
    m.off_task_rate = 0.05;
    m.per_task_success = {0.8, 0.7, 0.6, 0.5, 0.4};
    m.wall_clock_sec = 12.5;
    const auto dir = temp_dir("sglab_report_test");
    std::ofstream((dir / "metrics.json").string()) << metrics_to_json({m});
    const auto rows = metrics_from_json_file((dir / "metrics.json").string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].cell == m.cell);
    CHECK(rows[0].avg_len == m.avg_len);
    CHECK(rows[0].per_task_success == m.per_task_success);

    emit_report(rows, (dir / "out.csv").string(), (dir / "summary.txt").string());
    CHECK(std::filesystem::exists(dir / "out.csv"));
    CHECK(std::filesystem::exists(dir / "summary.txt"));
    CHECK_THROWS_AS(emit_report(rows, (dir / "nodir" / "x.csv").string(),
                                (dir / "summary.txt").string()),
                    std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("experiment config json round-trips") {
    ExperimentConfig cfg;
    cfg.n_train = 123;
    cfg.proposer.p_off_task = 0.25;
    cfg.cells = {{CellKind::Both, 4}, {CellKind::Baseline, 2}};
    const auto dir = temp_dir("sglab_cfg_test");
    std::ofstream((dir / "cfg.json").string()) << experiment_config_json(cfg);
    const ExperimentConfig back = load_experiment_config((dir / "cfg.json").string());
    CHECK(back.n_train == 123);
    CHECK(back.proposer.p_off_task == 0.25);
    REQUIRE(back.cells.size() == 2);
    CHECK(back.cells[0].kind == CellKind::Both);
    CHECK(back.cells[0].K == 4);
    CHECK(back.cells[1].kind == CellKind::Baseline);
    std::filesystem::remove_all(dir);
}
