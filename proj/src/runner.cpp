#include "racas/runner.hpp"

#include "racas/controller.hpp"
#include "racas/error.hpp"
#include "racas/memory.hpp"
#include "racas/monitor.hpp"
#include "racas/text.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <sstream>

namespace racas {

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::success: return "success";
        case Termination::step_cap: return "step_cap";
        case Termination::error: return "error";
    }
    return "?";
}

Termination parse_termination(std::string_view s) {
    for (auto t : {Termination::success, Termination::step_cap, Termination::error}) {
        if (to_string(t) == s) return t;
    }
    throw Error("unknown termination: " + std::string(s));
}

namespace {

std::vector<MonitorObservation> observe_all(const std::vector<CameraFrame>& frames, const VisualQuery& query,
                                            ChatBackend* monitor, const MonitorOptions& options) {
    // One task per camera; results are gathered in camera order.
    std::vector<std::future<MonitorObservation>> pending;
    pending.reserve(frames.size());
    for (const auto& frame : frames) {
        pending.push_back(std::async(std::launch::async, [&frame, &query, monitor, &options] {
            return monitor ? describe_scene(frame, query, *monitor, options) : oracle_describe(frame, query);
        }));
    }
    std::vector<MonitorObservation> out;
    out.reserve(frames.size());
    for (auto& f : pending) out.push_back(f.get());
    return out;
}

}  // namespace

EpisodeLog run_episode(const EmbodimentConfig& config, RobotAdapter& adapter, const Backends& backends,
                       const EpisodeOptions& options) {
    if (options.step_cap < 0) throw Error("step cap must be non-negative");
    const auto started = std::chrono::steady_clock::now();
    adapter.reset(options.seed);

    EpisodeLog log;
    log.result.seed = options.seed;
    EnvironmentMemory memory = empty_memory(options.memory_budget);
    ActionHistory history;
    std::mt19937_64 rng(options.seed);
    long clock = 0;
    const MonitorOptions monitor_options = adapter.monitor_options();

    std::map<std::string, Bearing> facing;
    for (const auto& cam : adapter.cameras()) facing[cam.id] = cam.facing;

    auto finish = [&](Termination t) {
        log.result.termination = t;
        log.result.success = t == Termination::success;
        log.result.steps = static_cast<int>(log.steps.size());
        log.result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return log;
    };

    if (adapter.success()) return finish(Termination::success);

    for (int t = 1; t <= options.step_cap; ++t) {
        StepRecord rec;
        rec.step = t;
        try {
            const auto prompt = compose_system_prompt(config, memory, adapter.proprio(), history, t);
            rec.prompt_digest = prompt.digest();

            ControllerDecision decision;
            if (options.random_policy) {
                rec.phases.query = ++clock;
                rec.phases.observe = ++clock;
                const ActionDef& action = random_policy_step(config.interface, rng);
                decision = resolve_decision(ParsedAction{"random policy", action.name, {}}, config.interface);
            } else {
                if (!backends.controller) throw BackendUnavailable("no controller backend configured");
                const VisualQuery query = generate_visual_query(prompt, *backends.controller);
                rec.query = query.text;
                rec.phases.query = ++clock;

                const auto observations = observe_all(adapter.sense(), query, backends.monitor.get(), monitor_options);
                for (const auto& o : observations) rec.observations.push_back({o.camera_id, facing.at(o.camera_id), o.text});
                rec.phases.observe = ++clock;

                decision = select_action(prompt, query, observations, *backends.controller, config.interface);
            }
            rec.decision = {decision.reasoning, decision.action.name, decision.parameters, decision.clamp_notes,
                            decision.action.motion};
            for (const auto& note : decision.clamp_notes) rec.flags.push_back("clamped: " + note);
            rec.phases.decide = ++clock;

            rec.ack = adapter.dispatch(decision.action, decision.parameters);
            history.append(t, decision.action.name, decision.parameters);
            rec.proprio = adapter.proprio();
            rec.phases.dispatch = ++clock;

            if (backends.curator) {
                auto curated = curate(memory, rec, *backends.curator, config.task.objective);
                if (curated.fell_back) rec.flags.emplace_back("curator_fallback");
                memory = std::move(curated.memory);
            } else {
                memory = reference_curate(memory, rec, config.task.objective);
            }
            rec.memory_snapshot = render_memory_text(memory);
            rec.phases.curate = ++clock;
        } catch (const std::exception& e) {
            rec.error = e.what();
            log.steps.push_back(std::move(rec));
            if (options.on_step) options.on_step(log.steps.back());
            log.result.error = e.what();
            return finish(Termination::error);
        }
        log.steps.push_back(std::move(rec));
        if (options.on_step) options.on_step(log.steps.back());
        if (adapter.success()) return finish(Termination::success);
    }
    return finish(Termination::step_cap);
}

std::string steps_jsonl(const std::vector<StepRecord>& steps) {
    std::string out;
    for (const auto& s : steps) out += to_jsonl_line(s);
    return out;
}

std::uint64_t derive_seed(std::uint64_t base_seed, int episode) {
    // splitmix64 finalizer over the pair.
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(episode + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void check_condition_name(const std::string& name) {
    if (name.empty() || name.find_first_of(",\n\"/") != std::string::npos) {
        throw Error("condition name must be non-empty without commas, quotes or slashes: '" + name + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path.string());
    return out;
}

}  // namespace

ExperimentSummary summarize_rows(std::vector<EpisodeRow> rows, std::optional<int> min_steps, TTestKind kind) {
    ExperimentSummary summary;
    summary.min_steps = min_steps;
    std::vector<SampleGroup> groups;
    std::vector<std::size_t> successes;
    for (const auto& row : rows) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.name == row.condition; });
        if (it == groups.end()) {
            groups.push_back({row.condition, {}});
            successes.push_back(0);
            it = groups.end() - 1;
        }
        it->values.push_back(row.result.steps);
        if (row.result.success) ++successes[static_cast<std::size_t>(it - groups.begin())];
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        ConditionSummary c;
        c.name = groups[i].name;
        c.episodes = groups[i].values.size();
        c.steps = summarize(groups[i].values);
        c.success_rate = static_cast<double>(successes[i]) / static_cast<double>(c.episodes);
        summary.conditions.push_back(std::move(c));
    }
    const bool testable = groups.size() >= 2 &&
                          std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.values.size() >= 2; });
    if (testable) summary.pairwise = t_test_holm(groups, kind);
    summary.rows = std::move(rows);
    return summary;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    if (spec.episodes < 1) throw Error("experiment needs at least one episode per condition");
    for (const auto& c : spec.conditions) check_condition_name(c.name);

    std::optional<int> min_steps;
    if (spec.compute_oracle) {
        auto probe = make_adapter(spec.scenario);
        probe->reset(spec.base_seed);
        try {
            min_steps = min_steps_oracle(*probe, spec.config.interface);
        } catch (const Unreachable&) {
        }
    }

    std::vector<EpisodeRow> rows;
    for (const auto& cond : spec.conditions) {
        for (int e = 0; e < spec.episodes; ++e) {
            auto adapter = make_adapter(spec.scenario);
            EpisodeOptions opts;
            opts.step_cap = cond.step_cap;
            opts.seed = derive_seed(spec.base_seed, e);
            opts.random_policy = cond.random_policy;
            const Backends backends = cond.make_backends ? cond.make_backends(e) : Backends{};
            auto log = run_episode(spec.config, *adapter, backends, opts);
            if (spec.out_dir) {
                auto out = open_out(*spec.out_dir / "steps" / (cond.name + "_" + std::to_string(e + 1) + ".jsonl"));
                out << steps_jsonl(log.steps);
            }
            rows.push_back({cond.name, e + 1, log.result});
        }
    }

    auto summary = summarize_rows(std::move(rows), min_steps, spec.test_kind);
    if (spec.out_dir) {
        write_episodes_csv(*spec.out_dir / "episodes.csv", summary.rows);
        write_summary_csv(*spec.out_dir / "summary.csv", summary);
        write_pairwise_csv(*spec.out_dir / "pairwise.csv", summary);
    }
    return summary;
}

void write_episodes_csv(const std::filesystem::path& path, const std::vector<EpisodeRow>& rows) {
    auto out = open_out(path);
    out << "condition,episode,seed,steps,success,termination,wall_seconds\n";
    for (const auto& r : rows) {
        out << r.condition << ',' << r.episode << ',' << r.result.seed << ',' << r.result.steps << ','
            << (r.result.success ? 1 : 0) << ',' << to_string(r.result.termination) << ','
            << text::format_number(r.result.wall_seconds) << '\n';
    }
}

std::vector<EpisodeRow> read_episodes_csv(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    std::vector<EpisodeRow> rows;
    bool header = true;
    for (auto line : text::split_lines(content)) {
        if (text::trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto cells = text::split(line, ',');
        if (cells.size() != 7) throw SchemaViolation(path.string(), "expected 7 columns, got " + std::to_string(cells.size()));
        try {
            EpisodeRow r;
            r.condition = cells[0];
            r.episode = std::stoi(cells[1]);
            r.result.seed = std::stoull(cells[2]);
            r.result.steps = std::stoi(cells[3]);
            r.result.success = cells[4] == "1";
            r.result.termination = parse_termination(cells[5]);
            r.result.wall_seconds = std::stod(cells[6]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw SchemaViolation(path.string(), "malformed row: " + std::string(line));
        }
    }
    return rows;
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentSummary& summary) {
    auto out = open_out(path);
    out << "condition,episodes,mean_steps,se_steps,table_cell,success_rate,min_steps_oracle\n";
    for (const auto& c : summary.conditions) {
        out << c.name << ',' << c.episodes << ',' << text::format_number(c.steps.mean) << ','
            << text::format_number(c.steps.std_error) << ",\"" << format_mean_se(c.steps.mean, c.steps.std_error)
            << "\"," << text::format_number(c.success_rate) << ','
            << (summary.min_steps ? std::to_string(*summary.min_steps) : "") << '\n';
    }
}

void write_pairwise_csv(const std::filesystem::path& path, const ExperimentSummary& summary) {
    auto out = open_out(path);
    out << "condition_a,condition_b,t,df,p_raw,p_holm,degenerate\n";
    for (const auto& p : summary.pairwise) {
        out << p.a << ',' << p.b << ',' << text::format_number(p.test.t) << ',' << text::format_number(p.test.df) << ','
            << text::format_number(p.test.p) << ',' << text::format_number(p.adjusted_p) << ','
            << (p.test.degenerate ? 1 : 0) << '\n';
    }
}

}  // namespace racas
