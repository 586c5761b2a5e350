#pragma once

#include "racas/core_model.hpp"
#include "racas/llm_backend.hpp"
#include "racas/memory.hpp"
#include "racas/monitor.hpp"

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace racas {

// Stable section headers of the Controller's system prompt. They are part of
// the replay contract: changing them changes every request digest.
inline constexpr std::array<std::string_view, 6> kPromptSectionHeaders = {
    "## ROBOT DESCRIPTION",     "## ACTION INTERFACE", "## ENVIRONMENT MEMORY",
    "## PROPRIOCEPTIVE STATE",  "## ACTION HISTORY",   "## TASK",
};

inline constexpr std::string_view kQueryMarker = "QUERY:";
inline constexpr std::string_view kActionMarker = "ACTION:";
inline constexpr std::string_view kParamsMarker = "PARAMS:";
inline constexpr std::string_view kNoActionsSentinel = "No actions taken yet.";

struct PromptSection {
    std::string_view header;
    std::string text;
};

struct ComposedPrompt {
    int step = 1;
    std::vector<PromptSection> sections;

    std::string render() const;
    std::string digest() const;
};

struct ControllerDecision {
    std::string reasoning;
    ActionDef action;
    ParamValues parameters;
    std::vector<std::string> clamp_notes;
};

std::string render_action_interface(const ActionInterface& interface);
std::string render_proprio_state(const ProprioState& proprio);
std::string render_action_history(const ActionHistory& history);

ComposedPrompt compose_system_prompt(const EmbodimentConfig& config, const EnvironmentMemory& memory,
                                     const ProprioState& proprio, const ActionHistory& history, int step = 1);

// Text after the last QUERY: marker (or the next non-empty line when the
// marker ends its line); nullopt if there is none.
std::optional<std::string> extract_query(std::string_view response);

VisualQuery generate_visual_query(const ComposedPrompt& prompt, ChatBackend& backend);

struct ParsedAction {
    std::string reasoning;
    std::string name;
    ParamValues parameters;
};

// Throws ActionParseFailure when there is no ACTION: line or PARAMS is malformed.
ParsedAction parse_action_reply(std::string_view response);

// Fills defaults for omitted parameters and clamps out-of-range values,
// noting each clamp. Unknown parameter names raise ActionParseFailure.
ControllerDecision resolve_decision(const ParsedAction& parsed, const ActionInterface& interface);

ControllerDecision select_action(const ComposedPrompt& prompt, const VisualQuery& query,
                                 const std::vector<MonitorObservation>& observations, ChatBackend& backend,
                                 const ActionInterface& interface);

std::string query_step_message(int step);
std::string action_step_message(int step, const VisualQuery& query, const std::vector<MonitorObservation>& observations,
                                const ActionInterface& interface);

}  // namespace racas
