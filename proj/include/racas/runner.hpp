#pragma once

#include "racas/core_model.hpp"
#include "racas/llm_backend.hpp"
#include "racas/sim_robots.hpp"
#include "racas/stats.hpp"
#include "racas/step_record.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace racas {

inline constexpr int kRandomStepCap = 25;
inline constexpr int kAgentStepCap = 60;

// Model backends for one episode. A null monitor uses the symbolic oracle;
// a null curator uses the deterministic reference curator.
struct Backends {
    std::shared_ptr<ChatBackend> controller;
    std::shared_ptr<ChatBackend> monitor;
    std::shared_ptr<ChatBackend> curator;
};

enum class Termination { success, step_cap, error };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view s);

struct EpisodeResult {
    int steps = 0;
    bool success = false;
    Termination termination = Termination::step_cap;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::optional<std::string> error;
};

struct EpisodeOptions {
    int step_cap = kAgentStepCap;
    std::uint64_t seed = 0;
    // Uniform random actions with no model calls; the baseline condition.
    bool random_policy = false;
    std::size_t memory_budget = 8000;
    // Called with every finished step record, in order.
    std::function<void(const StepRecord&)> on_step;
};

struct EpisodeLog {
    EpisodeResult result;
    std::vector<StepRecord> steps;
};

// Resets the adapter with the seed, then runs query, observe, decide,
// dispatch, curate per step until success, the step cap, or a step error.
EpisodeLog run_episode(const EmbodimentConfig& config, RobotAdapter& adapter, const Backends& backends,
                       const EpisodeOptions& options);

std::string steps_jsonl(const std::vector<StepRecord>& steps);

// Per-episode seed derived from the experiment's base seed.
std::uint64_t derive_seed(std::uint64_t base_seed, int episode);

struct Condition {
    std::string name;
    bool random_policy = false;
    int step_cap = kAgentStepCap;
    // Fresh backends for one episode (index from 0).
    std::function<Backends(int episode)> make_backends;
};

struct ExperimentSpec {
    EmbodimentConfig config;
    nlohmann::json scenario;
    std::vector<Condition> conditions;
    int episodes = 10;
    std::uint64_t base_seed = 1;
    std::optional<std::filesystem::path> out_dir;
    TTestKind test_kind = TTestKind::pooled;
    bool compute_oracle = true;
};

struct EpisodeRow {
    std::string condition;
    int episode = 0;
    EpisodeResult result;
};

struct ConditionSummary {
    std::string name;
    std::size_t episodes = 0;
    SampleSummary steps;
    double success_rate = 0.0;
};

struct ExperimentSummary {
    std::vector<ConditionSummary> conditions;
    std::vector<PairwiseTest> pairwise;
    std::optional<int> min_steps;
    std::vector<EpisodeRow> rows;
};

// Runs every condition's episodes, aggregates and tests them, and when
// out_dir is set writes episodes.csv, summary.csv, pairwise.csv and
// steps/<condition>_<episode>.jsonl.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

// Aggregation shared by run_experiment and the stats subcommand. Failed
// episodes count with their step totals; success rate is reported apart.
ExperimentSummary summarize_rows(std::vector<EpisodeRow> rows, std::optional<int> min_steps,
                                 TTestKind kind = TTestKind::pooled);

void write_episodes_csv(const std::filesystem::path& path, const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> read_episodes_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, const ExperimentSummary& summary);
void write_pairwise_csv(const std::filesystem::path& path, const ExperimentSummary& summary);

}  // namespace racas
