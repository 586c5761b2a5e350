#include "racas/blackjack.hpp"
#include "racas/core_model.hpp"
#include "racas/error.hpp"
#include "racas/llm_backend.hpp"
#include "racas/runner.hpp"
#include "racas/sim_robots.hpp"
#include "racas/stats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace racas;

namespace {

struct ConfigArgs {
    std::string robot, actions, task, context, scenario;
};

struct BackendArgs {
    std::string kind = "scripted";
    std::string rules;
    std::string record;
    std::string replay;
    std::string base_url;
    std::string model;
    std::string api_key_env;
    std::optional<double> temperature;
    bool model_monitor = false;
    bool model_curator = false;
};

void add_config_options(CLI::App* app, ConfigArgs& c) {
    app->add_option("--robot-config", c.robot, "Robot description text file")->required()->check(CLI::ExistingFile);
    app->add_option("--actions", c.actions, "Action interface JSON")->required()->check(CLI::ExistingFile);
    app->add_option("--task", c.task, "Task text file")->required()->check(CLI::ExistingFile);
    app->add_option("--context", c.context, "Optional environment context text file")->check(CLI::ExistingFile);
    app->add_option("--scenario", c.scenario, "Simulated world scenario JSON")->required()->check(CLI::ExistingFile);
}

void add_backend_options(CLI::App* app, BackendArgs& b) {
    app->add_option("--backend", b.kind, "Model backend")->check(CLI::IsMember({"scripted", "replay", "http"}));
    app->add_option("--rules", b.rules, "Scripted backend rules JSON")->check(CLI::ExistingFile);
    app->add_option("--record", b.record, "Write a JSONL transcript of every model exchange");
    app->add_option("--replay", b.replay, "Replay a recorded transcript (implies --backend replay)")
        ->check(CLI::ExistingFile);
    app->add_option("--base-url", b.base_url, "HTTP backend base URL");
    app->add_option("--model", b.model, "HTTP backend model name");
    app->add_option("--api-key-env", b.api_key_env, "Environment variable holding the API key");
    app->add_option("--temperature", b.temperature, "HTTP sampling temperature");
    app->add_flag("--model-monitor", b.model_monitor, "Route camera descriptions through the backend");
    app->add_flag("--model-curator", b.model_curator, "Route memory curation through the backend");
}

EmbodimentConfig load_config(const ConfigArgs& c) {
    std::optional<fs::path> ctx;
    if (!c.context.empty()) ctx = c.context;
    return load_embodiment_config(c.robot, c.actions, c.task, ctx);
}

nlohmann::json load_scenario_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaViolation("scenario", std::string("malformed JSON: ") + e.what());
    }
}

Backends make_backends(const BackendArgs& b) {
    BackendConfig cfg;
    cfg.kind = b.replay.empty() ? parse_backend_kind(b.kind) : BackendKind::replay;
    cfg.transcript = b.replay;
    cfg.rules = b.rules;
    if (cfg.kind == BackendKind::scripted && cfg.rules.empty()) {
        throw Error("--backend scripted needs --rules <file>");
    }
    if (!b.base_url.empty()) cfg.http.base_url = b.base_url;
    if (!b.model.empty()) cfg.http.model = b.model;
    if (!b.api_key_env.empty()) cfg.http.api_key_env = b.api_key_env;
    cfg.http.temperature = b.temperature;
    if (!b.record.empty()) cfg.record_to = b.record;
    auto backend = make_backend(cfg);
    return {backend, b.model_monitor ? backend : nullptr, b.model_curator ? backend : nullptr};
}

void print_summary(const ExperimentSummary& s) {
    for (const auto& c : s.conditions) {
        std::cout << c.name << ": steps " << format_mean_se(c.steps.mean, c.steps.std_error) << ", success rate "
                  << c.success_rate << " (n=" << c.episodes << ")\n";
    }
    for (const auto& p : s.pairwise) {
        std::cout << p.a << " vs " << p.b << ": t=" << p.test.t << " p=" << p.test.p << " holm=" << p.adjusted_p
                  << (p.test.degenerate ? " (degenerate variance)" : "") << '\n';
    }
    if (s.min_steps) std::cout << "min-steps oracle: " << *s.min_steps << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agentic robot control loop over simulated embodiments"};
    app.require_subcommand(1);

    // run
    ConfigArgs run_cfg;
    BackendArgs run_backend;
    int run_steps = 0;
    std::uint64_t run_seed = 1;
    std::string run_out = "out";
    bool run_random = false;
    auto* run = app.add_subcommand("run", "Run a single episode");
    add_config_options(run, run_cfg);
    add_backend_options(run, run_backend);
    run->add_option("--max-steps", run_steps, "Step cap (default 60, or 25 with --random)");
    run->add_option("--seed", run_seed, "Episode seed");
    run->add_option("--out-dir", run_out, "Output directory");
    run->add_flag("--random", run_random, "Uniform random policy, no model calls");

    // experiment
    ConfigArgs exp_cfg;
    BackendArgs exp_backend;
    int exp_steps = 0;
    int exp_random_steps = kRandomStepCap;
    int exp_episodes = 10;
    std::uint64_t exp_seed = 1;
    std::string exp_out = "out";
    std::vector<std::string> exp_conditions{"agent", "random"};
    bool exp_welch = false;
    auto* exp = app.add_subcommand("experiment", "Run seeded episodes per condition and compare them");
    add_config_options(exp, exp_cfg);
    add_backend_options(exp, exp_backend);
    exp->add_option("--max-steps", exp_steps, "Agent step cap (default 60)");
    exp->add_option("--random-max-steps", exp_random_steps, "Random baseline step cap");
    exp->add_option("--episodes", exp_episodes, "Episodes per condition")->check(CLI::PositiveNumber);
    exp->add_option("--seed", exp_seed, "Base seed");
    exp->add_option("--out-dir", exp_out, "Output directory");
    exp->add_option("--conditions", exp_conditions, "Conditions to run")
        ->delimiter(',')
        ->check(CLI::IsMember({"agent", "random"}));
    exp->add_flag("--welch", exp_welch, "Welch's t-test instead of pooled variance");

    // blackjack
    BlackjackConfig bj;
    std::string bj_out = "out";
    auto* blackjack = app.add_subcommand("blackjack", "Hidden-target blackjack memory experiment");
    blackjack->add_option("--episodes", bj.episodes, "Episodes per mode")->check(CLI::PositiveNumber);
    blackjack->add_option("--seed", bj.seed, "Seed");
    blackjack->add_option("--target", bj.hidden_target, "Hidden target")->check(CLI::Range(kMinTarget, kMaxTarget));
    blackjack->add_option("--log-budget", bj.appended_budget, "Appended-mode log budget in characters");
    blackjack->add_option("--out-dir", bj_out, "Output directory");

    // oracle
    std::string oracle_scenario, oracle_actions;
    auto* oracle = app.add_subcommand("oracle", "Breadth-first minimum step count for a scenario");
    oracle->add_option("--scenario", oracle_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    oracle->add_option("--actions", oracle_actions, "Action interface JSON")->required()->check(CLI::ExistingFile);

    // stats
    std::string stats_in;
    std::string stats_out = "out";
    bool stats_welch = false;
    auto* stats = app.add_subcommand("stats", "Recompute summary statistics from an episodes.csv");
    stats->add_option("episodes_csv", stats_in, "episodes.csv written by experiment")->required()->check(CLI::ExistingFile);
    stats->add_option("--out-dir", stats_out, "Output directory");
    stats->add_flag("--welch", stats_welch, "Welch's t-test instead of pooled variance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto config = load_config(run_cfg);
            auto adapter = make_adapter(load_scenario_json(run_cfg.scenario));
            check_interface_supported(*adapter, config.interface);
            const Backends backends = run_random ? Backends{} : make_backends(run_backend);
            EpisodeOptions opts;
            opts.step_cap = run_steps > 0 ? run_steps : (run_random ? kRandomStepCap : kAgentStepCap);
            opts.seed = run_seed;
            opts.random_policy = run_random;
            fs::create_directories(run_out);
            std::ofstream steps(fs::path(run_out) / "steps.jsonl", std::ios::binary);
            if (!steps) throw IoFailure("cannot write steps.jsonl in " + run_out);
            opts.on_step = [&](const StepRecord& r) {
                steps << to_jsonl_line(r);
                steps.flush();
                std::cout << "step " << r.step << ": " << (r.error ? "error: " + *r.error : r.decision.action) << '\n';
            };
            const auto log = run_episode(config, *adapter, backends, opts);
            const std::vector<EpisodeRow> rows{{run_random ? "random" : "agent", 1, log.result}};
            write_episodes_csv(fs::path(run_out) / "episodes.csv", rows);
            write_summary_csv(fs::path(run_out) / "summary.csv", summarize_rows(rows, std::nullopt));
            std::cout << to_string(log.result.termination) << " after " << log.result.steps << " steps\n";
            return log.result.termination == Termination::error ? 1 : 0;
        }
        if (*exp) {
            ExperimentSpec spec;
            spec.config = load_config(exp_cfg);
            spec.scenario = load_scenario_json(exp_cfg.scenario);
            spec.episodes = exp_episodes;
            spec.base_seed = exp_seed;
            spec.out_dir = exp_out;
            spec.test_kind = exp_welch ? TTestKind::welch : TTestKind::pooled;
            for (const auto& name : exp_conditions) {
                Condition c;
                c.name = name;
                c.random_policy = name == "random";
                c.step_cap = c.random_policy ? exp_random_steps : (exp_steps > 0 ? exp_steps : kAgentStepCap);
                if (!c.random_policy) {
                    const Backends shared = make_backends(exp_backend);
                    c.make_backends = [shared](int) { return shared; };
                }
                spec.conditions.push_back(std::move(c));
            }
            print_summary(run_experiment(spec));
            return 0;
        }
        if (*blackjack) {
            std::vector<MemoryExperimentResult> results;
            for (auto mode : kAllMemoryModes) results.push_back(run_memory_experiment(mode, bj));
            fs::create_directories(bj_out);
            std::ofstream out(fs::path(bj_out) / "blackjack.csv", std::ios::binary);
            if (!out) throw IoFailure("cannot write blackjack.csv in " + bj_out);
            write_blackjack_csv(out, results);
            for (const auto& r : results) {
                const auto& last = r.episodes.back().belief_after;
                std::cout << to_string(r.mode) << ": average score " << r.mean_score() << ", belief [" << last.low
                          << ", " << last.high << "]\n";
            }
            return 0;
        }
        if (*oracle) {
            auto adapter = load_scenario(oracle_scenario);
            const auto iface = parse_action_interface(read_text_file(oracle_actions));
            adapter->reset(0);
            std::cout << min_steps_oracle(*adapter, iface) << '\n';
            return 0;
        }
        if (*stats) {
            const auto summary = summarize_rows(read_episodes_csv(stats_in), std::nullopt,
                                                stats_welch ? TTestKind::welch : TTestKind::pooled);
            write_summary_csv(fs::path(stats_out) / "summary.csv", summary);
            write_pairwise_csv(fs::path(stats_out) / "pairwise.csv", summary);
            print_summary(summary);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
