#pragma once

#include "racas/bearing.hpp"
#include "racas/llm_backend.hpp"
#include "racas/step_record.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace racas {

enum class DistanceClass { near, mid, far, unknown };

std::string_view to_string(DistanceClass d);

struct ObjectEntry {
    std::string label;
    std::string properties;
    Bearing bearing;
    DistanceClass distance_class = DistanceClass::unknown;
    int last_seen_step = 0;

    friend bool operator==(const ObjectEntry&, const ObjectEntry&) = default;
};

struct HistoryNote {
    int step = 0;
    std::string action;
    std::string outcome_class;
    std::string text;

    friend bool operator==(const HistoryNote&, const HistoryNote&) = default;
};

// M_t: the Curator's bounded four-category memory. Every rendering stays
// within size_budget characters.
struct EnvironmentMemory {
    static constexpr std::size_t kDefaultBudget = 8000;

    std::string scene_description;
    std::vector<ObjectEntry> objects;
    std::string robot_state;
    std::vector<HistoryNote> curated_history;
    std::string task_state;
    std::size_t size_budget = kDefaultBudget;
    // Motion of the most recently executed action; not rendered.
    MotionEvent last_motion;

    friend bool operator==(const EnvironmentMemory&, const EnvironmentMemory&) = default;
};

inline constexpr std::string_view kPhysicalEnvironmentHeader = "[PHYSICAL ENVIRONMENT]";
inline constexpr std::string_view kRobotStateHeader = "[ROBOT STATE]";
inline constexpr std::string_view kCuratedHistoryHeader = "[CURATED HISTORY]";
inline constexpr std::string_view kTaskStateHeader = "[TASK STATE]";
inline constexpr std::string_view kEmptySentinel = "(nothing recorded)";

// Shortest possible rendering (four headers with sentinels); budgets below
// this are rejected.
std::size_t minimum_memory_budget();
EnvironmentMemory empty_memory(std::size_t size_budget = EnvironmentMemory::kDefaultBudget);

std::string render_memory_text(const EnvironmentMemory& memory);

Bearing update_bearing(Bearing b, const MotionEvent& e);
Bearing infer_position_from_detection(Bearing camera_facing, const MotionEvent& last_motion);

// A "Yes: <label> visible, <side> of frame, <size>" statement found in a
// monitor answer.
struct Detection {
    std::string label;
    std::string side;
    std::string size;
};
std::vector<Detection> parse_detections(std::string_view observation_text);

// Deterministic curator: rewrites the memory with one step's record.
EnvironmentMemory reference_curate(const EnvironmentMemory& memory, const StepRecord& record,
                                   const std::string& task_objective = {});

struct CurateResult {
    EnvironmentMemory memory;
    bool fell_back = false;
};

// Parses a model reply holding the four labelled sections (any order, each
// exactly once) into a memory. nullopt if the schema is not met.
std::optional<EnvironmentMemory> parse_memory_text(std::string_view reply, std::size_t size_budget);

std::string curator_system_prompt(std::size_t size_budget);

// LLM curation with one reprompt; falls back to reference_curate when the
// reply breaks the schema or the budget.
CurateResult curate(const EnvironmentMemory& memory, const StepRecord& record, ChatBackend& backend,
                    const std::string& task_objective = {});

}  // namespace racas
