#include "racas/error.hpp"
#include "racas/memory.hpp"
#include "racas/runner.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

using namespace racas;
using nlohmann::json;
using racas::testing::config_dir;
using racas::testing::load_shipped;
using racas::testing::TempDir;

namespace {

std::shared_ptr<ChatBackend> shipped_rules(const std::string& robot) {
    return std::shared_ptr<ChatBackend>(ScriptedBackend::from_file(config_dir(robot) / "scripted_rules.json"));
}

json scenario_json(const std::string& robot, const std::string& file = "scenario.json") {
    return json::parse(read_text_file(config_dir(robot) / file));
}

EpisodeLog run_shipped(const std::string& robot, Backends backends, EpisodeOptions opts = {}) {
    auto adapter = make_adapter(scenario_json(robot));
    return run_episode(load_shipped(robot), *adapter, backends, opts);
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("straight-line approach succeeds in two steps") {
    auto j = scenario_json("dingo");
    j["start"]["cell"] = {20, 6};
    j["start"]["heading"] = 180;
    auto adapter = make_adapter(j);
    const auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"Decide what you need to see", "QUERY: Is the red chair visible?"}, {"Monitor observations", "ACTION: forward"}});
    const auto log = run_episode(load_shipped("dingo"), *adapter, {backend, nullptr, nullptr}, {});
    CHECK(log.result.termination == Termination::success);
    CHECK(log.result.success);
    CHECK(log.result.steps == 2);
    REQUIRE(log.steps.size() == 2);
    CHECK(log.steps[0].observations.front().text == "Yes: red chair visible, center of frame, medium.");
    CHECK(log.steps[1].decision.parameters.at("speed") == doctest::Approx(0.3));
}

TEST_CASE("all embodiments run from configuration alone") {
    for (const char* robot : {"dingo", "limb", "rov"}) {
        INFO(robot);
        const auto log = run_shipped(robot, {shipped_rules(robot), nullptr, nullptr});
        CHECK(log.result.termination == Termination::success);
        auto probe = make_adapter(scenario_json(robot));
        CHECK(log.result.steps >= min_steps_oracle(*probe, load_shipped(robot).interface));
        CHECK(log.result.steps <= 10);
    }
}

TEST_CASE("each step has one observation per enabled camera and monotone phases") {
    const auto log = run_shipped("limb", {shipped_rules("limb"), nullptr, nullptr});
    long last = 0;
    for (const auto& s : log.steps) {
        CHECK(s.observations.size() == 4);
        std::set<std::string> cams;
        for (const auto& o : s.observations) cams.insert(o.camera_id);
        CHECK(cams == std::set<std::string>{"gripper", "wrist", "base_front", "base_rear"});
        CHECK(s.phases.query > last);
        CHECK(s.phases.observe > s.phases.query);
        CHECK(s.phases.decide > s.phases.observe);
        CHECK(s.phases.dispatch > s.phases.decide);
        CHECK(s.phases.curate > s.phases.dispatch);
        last = s.phases.curate;
        CHECK(s.memory_snapshot.size() <= EnvironmentMemory::kDefaultBudget);
        CHECK_FALSE(s.error);
    }
}

TEST_CASE("random policy stops at its cap without model calls") {
    EpisodeOptions opts;
    opts.random_policy = true;
    opts.step_cap = kRandomStepCap;
    opts.seed = 4;
    auto adapter = make_adapter(scenario_json("dingo", "warehouse_random.json"));
    const auto log = run_episode(load_shipped("dingo"), *adapter, {}, opts);
    CHECK(log.result.termination == Termination::step_cap);
    CHECK(log.result.steps == 25);
    CHECK_FALSE(log.result.success);
    for (const auto& s : log.steps) CHECK(s.query.empty());
}

TEST_CASE("runs are deterministic in the seed") {
    EpisodeOptions opts;
    opts.random_policy = true;
    opts.step_cap = 20;
    opts.seed = 77;
    const auto a = run_shipped("rov", {}, opts), b = run_shipped("rov", {}, opts);
    CHECK(steps_jsonl(a.steps) == steps_jsonl(b.steps));
    opts.seed = 78;
    const auto c = run_shipped("rov", {}, opts);
    CHECK(steps_jsonl(a.steps) != steps_jsonl(c.steps));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 3) == derive_seed(1, 3));
}

TEST_CASE("replaying a recorded session reproduces the step log byte for byte") {
    TempDir dir;
    std::string recorded;
    {
        auto recorder = record_session(dir / "session.jsonl");
        auto backend = std::make_shared<RecordingBackend>(shipped_rules("dingo"), recorder);
        recorded = steps_jsonl(run_shipped("dingo", {backend, nullptr, nullptr}).steps);
    }
    auto replay = std::make_shared<ReplayBackend>(dir / "session.jsonl");
    const auto replayed = run_shipped("dingo", {replay, nullptr, nullptr});
    CHECK(replayed.result.termination == Termination::success);
    CHECK(steps_jsonl(replayed.steps) == recorded);
    CHECK(replay->remaining() == 0);
}

TEST_CASE("step errors end the episode with an error record") {
    const auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{{".*", "I refuse to answer."}});
    std::vector<int> streamed;
    EpisodeOptions opts;
    opts.on_step = [&](const StepRecord& r) { streamed.push_back(r.step); };
    const auto log = run_shipped("dingo", {backend, nullptr, nullptr}, opts);
    CHECK(log.result.termination == Termination::error);
    CHECK_FALSE(log.result.success);
    REQUIRE(log.steps.size() == 1);
    REQUIRE(log.steps[0].error);
    CHECK(log.result.error == log.steps[0].error);
    CHECK(streamed == std::vector<int>{1});

    const auto none = run_shipped("dingo", {});
    CHECK(none.result.termination == Termination::error);
    CHECK(none.steps.at(0).error->find("no controller backend") != std::string::npos);
}

TEST_CASE("a broken curator reply falls back and is flagged") {
    const auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"Decide what you need to see", "QUERY: Is the fire extinguisher visible?"},
        {"Write the updated memory", "no sections here"},
        {"did not follow the schema", "still nothing"},
        {"\\[gripper\\][^\\n]*(workbench|shelf)", "ACTION: rotate_cw"},
        {"\\[gripper\\][^\\n]*hose reel", "ACTION: up"}});
    const auto log = run_shipped("limb", {backend, nullptr, backend});
    CHECK(log.result.termination == Termination::success);
    for (const auto& s : log.steps) {
        CHECK(std::find(s.flags.begin(), s.flags.end(), "curator_fallback") != s.flags.end());
    }
}

TEST_CASE("clamped parameters are flagged in the step record") {
    const auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"Decide what you need to see", "QUERY: Where is the green box?"},
        {"Monitor observations", "ACTION: heave_down\nPARAMS: thrust=1000"}});
    EpisodeOptions opts;
    opts.step_cap = 1;
    const auto log = run_shipped("rov", {backend, nullptr, nullptr}, opts);
    REQUIRE(log.steps.size() == 1);
    CHECK(log.steps[0].flags == std::vector<std::string>{"clamped: thrust: requested 1000, clamped to 600"});
    CHECK(log.result.termination == Termination::step_cap);
}

TEST_CASE("experiment writes its tables and they read back") {
    TempDir dir;
    ExperimentSpec spec;
    spec.config = load_shipped("dingo");
    spec.scenario = scenario_json("dingo");
    spec.episodes = 3;
    spec.base_seed = 9;
    spec.out_dir = dir.path();
    Condition agent{"agent", false, kAgentStepCap, [](int) { return Backends{shipped_rules("dingo"), nullptr, nullptr}; }};
    Condition random{"random", true, 10, {}};
    spec.conditions = {agent, random};
    const auto summary = run_experiment(spec);

    REQUIRE(summary.conditions.size() == 2);
    CHECK(summary.conditions[0].success_rate == 1.0);
    CHECK(summary.min_steps == 6);
    REQUIRE(summary.pairwise.size() == 1);
    CHECK(summary.rows.size() == 6);
    for (int e = 1; e <= 3; ++e) {
        CHECK(std::filesystem::exists(dir / ("steps/agent_" + std::to_string(e) + ".jsonl")));
        CHECK(std::filesystem::exists(dir / ("steps/random_" + std::to_string(e) + ".jsonl")));
    }
    const auto rows = read_episodes_csv(dir / "episodes.csv");
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].condition == summary.rows[i].condition);
        CHECK(rows[i].result.steps == summary.rows[i].result.steps);
        CHECK(rows[i].result.seed == summary.rows[i].result.seed);
        CHECK(rows[i].result.termination == summary.rows[i].result.termination);
    }
    CHECK(rows[0].result.seed == derive_seed(9, 0));
    const auto again = summarize_rows(rows, summary.min_steps);
    CHECK(again.conditions[1].steps.mean == doctest::Approx(summary.conditions[1].steps.mean));
    CHECK(again.pairwise[0].test.p == doctest::Approx(summary.pairwise[0].test.p));

    const auto summary_csv = slurp(dir / "summary.csv");
    CHECK(summary_csv.starts_with("condition,episodes,mean_steps,se_steps,table_cell,success_rate,min_steps_oracle\n"));
    CHECK(summary_csv.find("\"8.00 $\\pm$ 0.00\"") != std::string::npos);
    CHECK(slurp(dir / "pairwise.csv").starts_with("condition_a,condition_b,t,df,p_raw,p_holm,degenerate\n"));
}

TEST_CASE("malformed episode tables are rejected") {
    TempDir dir;
    std::ofstream(dir / "bad.csv") << "condition,episode,seed,steps,success,termination,wall_seconds\nagent,1,2\n";
    CHECK_THROWS_AS(read_episodes_csv(dir / "bad.csv"), SchemaViolation);
    std::ofstream(dir / "bad2.csv") << "condition,episode,seed,steps,success,termination,wall_seconds\nagent,x,2,3,1,success,0.1\n";
    CHECK_THROWS_AS(read_episodes_csv(dir / "bad2.csv"), SchemaViolation);
    CHECK_THROWS_AS(parse_termination("timeout"), Error);
}
