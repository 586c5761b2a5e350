#include "racas/controller.hpp"

#include "racas/error.hpp"
#include "racas/text.hpp"

#include <algorithm>
#include <charconv>

namespace racas {

namespace {

constexpr std::string_view kControllerPreamble =
    "You are the Controller of a robot. You cannot see; camera Monitors answer your visual questions in natural "
    "language. Each step you first ask one targeted visual question, then read the Monitors' answers and choose "
    "exactly one admissible action. The sections below describe the robot, its actions, what has been learned so "
    "far, its internal position tracker, what it has done, and the task.";

}  // namespace

std::string ComposedPrompt::render() const {
    std::string out(kControllerPreamble);
    for (const auto& s : sections) {
        out += "\n\n";
        out += s.header;
        out += "\n";
        out += s.text;
    }
    return out;
}

std::string ComposedPrompt::digest() const {
    const auto s = render();
    return sha256_hex({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string render_action_interface(const ActionInterface& interface) {
    std::string out = "Choose exactly one of these actions per step:";
    for (const auto& a : interface.actions) {
        out += "\n- " + a.name + ": " + a.description;
        for (const auto& p : a.parameters) {
            out += "\n    parameter " + p.name + " in [" + text::format_number(p.min) + ", " + text::format_number(p.max) +
                   "]" + (p.unit.empty() ? "" : " " + p.unit) + ", default " + text::format_number(p.default_value);
        }
    }
    return out;
}

std::string render_proprio_state(const ProprioState& proprio) {
    std::vector<std::string> lines;
    if (!proprio.joint_displacements.empty()) {
        std::vector<std::string> parts;
        for (const auto& [k, v] : proprio.joint_displacements) parts.push_back(k + "=" + text::format_number(v));
        lines.push_back("Joint displacements from start: " + text::join(parts, ", "));
    }
    if (proprio.pose_estimate) {
        const auto& p = *proprio.pose_estimate;
        lines.push_back("Pose estimate: x=" + text::format_number(p.x) + ", y=" + text::format_number(p.y) +
                        ", heading=" + text::format_number(p.heading));
    }
    if (lines.empty()) return "No proprioceptive data.";
    return text::join(lines, "\n");
}

std::string render_action_history(const ActionHistory& history) {
    if (history.empty()) return std::string(kNoActionsSentinel);
    std::vector<std::string> lines;
    for (const auto& e : history.entries()) {
        std::string line = "Step " + std::to_string(e.step) + ": " + e.action;
        if (!e.parameters.empty()) {
            std::vector<std::string> parts;
            for (const auto& [k, v] : e.parameters) parts.push_back(k + "=" + text::format_number(v));
            line += " (" + text::join(parts, ", ") + ")";
        }
        lines.push_back(std::move(line));
    }
    return text::join(lines, "\n");
}

ComposedPrompt compose_system_prompt(const EmbodimentConfig& config, const EnvironmentMemory& memory,
                                     const ProprioState& proprio, const ActionHistory& history, int step) {
    std::string robot = config.robot.text;
    if (config.environment_context) robot += "\n\nEnvironment context:\n" + *config.environment_context;
    ComposedPrompt p;
    p.step = step;
    p.sections = {
        {kPromptSectionHeaders[0], std::move(robot)},
        {kPromptSectionHeaders[1], render_action_interface(config.interface)},
        {kPromptSectionHeaders[2], render_memory_text(memory)},
        {kPromptSectionHeaders[3], render_proprio_state(proprio)},
        {kPromptSectionHeaders[4], render_action_history(history)},
        {kPromptSectionHeaders[5], config.task.objective},
    };
    return p;
}

// ---------------------------------------------------------------------------
// Query step

std::string query_step_message(int step) {
    return "Step " + std::to_string(step) +
           ". Decide what you need to see before acting. Think it through briefly, then end with exactly one line:\n" +
           std::string(kQueryMarker) + " <one question for the camera monitors>";
}

std::optional<std::string> extract_query(std::string_view response) {
    const auto lines = text::split_lines(response);
    for (std::size_t i = lines.size(); i-- > 0;) {
        const auto line = text::trim(lines[i]);
        if (!text::starts_with_ci(line, kQueryMarker)) continue;
        auto rest = std::string(text::trim(line.substr(kQueryMarker.size())));
        if (rest.empty()) {
            for (std::size_t k = i + 1; k < lines.size(); ++k) {
                const auto next = text::trim(lines[k]);
                if (!next.empty()) {
                    rest = std::string(next);
                    break;
                }
            }
        }
        if (!rest.empty()) return rest;
    }
    return std::nullopt;
}

VisualQuery generate_visual_query(const ComposedPrompt& prompt, ChatBackend& backend) {
    std::vector<ChatMessage> messages{ChatMessage::system(prompt.render()), ChatMessage::user(query_step_message(prompt.step))};
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto reply = complete(messages, backend);
        if (auto q = extract_query(reply)) return {std::move(*q)};
        messages.push_back(ChatMessage::assistant(reply));
        messages.push_back(ChatMessage::user("Your reply had no line starting with '" + std::string(kQueryMarker) +
                                             "'. End your reply with exactly one line '" + std::string(kQueryMarker) +
                                             " <question>'."));
    }
    throw QueryParseFailure("controller reply contained no " + std::string(kQueryMarker) + " line after one reprompt");
}

// ---------------------------------------------------------------------------
// Action step

std::string action_step_message(int step, const VisualQuery& query, const std::vector<MonitorObservation>& observations,
                                const ActionInterface& interface) {
    std::string out = "Step " + std::to_string(step) + ". Your visual query was: " + query.text + "\nMonitor observations:";
    for (const auto& o : observations) out += "\n[" + o.camera_id + "] " + o.text;
    out += "\nReason about these observations, then end with exactly one line:\n" + std::string(kActionMarker) +
           " <one of: " + text::join(interface.names(), ", ") + ">\nOptionally follow it with " +
           std::string(kParamsMarker) + " name=value, ... to override parameter defaults.";
    return out;
}

namespace {

std::string clean_action_token(std::string_view s) {
    s = text::trim(s);
    const auto strip = [](char c) { return c == '`' || c == '*' || c == '"' || c == '\'' || c == '.' || c == '<' || c == '>'; };
    while (!s.empty() && strip(s.front())) s.remove_prefix(1);
    while (!s.empty() && strip(s.back())) s.remove_suffix(1);
    return std::string(text::trim(s));
}

double parse_double(std::string_view s) {
    s = text::trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) throw ActionParseFailure("not a number: '" + std::string(s) + "'");
    return v;
}

}  // namespace

ParsedAction parse_action_reply(std::string_view response) {
    const auto lines = text::split_lines(response);
    std::optional<std::size_t> action_line;
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (text::starts_with_ci(text::trim(lines[i]), kActionMarker)) {
            action_line = i;
            break;
        }
    }
    if (!action_line) throw ActionParseFailure("no " + std::string(kActionMarker) + " line in controller reply");

    ParsedAction out;
    out.name = clean_action_token(text::trim(lines[*action_line]).substr(kActionMarker.size()));
    if (out.name.empty()) throw ActionParseFailure("empty action name");

    for (std::size_t i = *action_line + 1; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (!text::starts_with_ci(line, kParamsMarker)) continue;
        for (const auto& kv : text::split(line.substr(kParamsMarker.size()), ',')) {
            if (kv.empty()) continue;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ActionParseFailure("malformed parameter '" + kv + "'");
            const auto key = std::string(text::trim(std::string_view(kv).substr(0, eq)));
            out.parameters[key] = parse_double(std::string_view(kv).substr(eq + 1));
        }
        break;
    }

    std::vector<std::string> reasoning;
    for (std::size_t i = 0; i < *action_line; ++i) {
        const auto line = text::trim(lines[i]);
        if (!text::starts_with_ci(line, kParamsMarker)) reasoning.emplace_back(lines[i]);
    }
    out.reasoning = std::string(text::trim(text::join(reasoning, "\n")));
    if (out.reasoning.empty()) out.reasoning = "(no reasoning given)";
    return out;
}

ControllerDecision resolve_decision(const ParsedAction& parsed, const ActionInterface& interface) {
    const auto& def = validate_action(parsed.name, interface);
    ControllerDecision d;
    d.reasoning = parsed.reasoning;
    d.action = def;
    for (const auto& [k, _] : parsed.parameters) {
        if (!def.find_parameter(k)) throw ActionParseFailure("action " + def.name + " has no parameter '" + k + "'");
    }
    for (const auto& p : def.parameters) {
        const auto it = parsed.parameters.find(p.name);
        double v = it == parsed.parameters.end() ? p.default_value : it->second;
        const double clamped = std::clamp(v, p.min, p.max);
        if (clamped != v) {
            d.clamp_notes.push_back(p.name + ": requested " + text::format_number(v) + ", clamped to " +
                                    text::format_number(clamped));
        }
        d.parameters[p.name] = clamped;
    }
    return d;
}

ControllerDecision select_action(const ComposedPrompt& prompt, const VisualQuery& query,
                                 const std::vector<MonitorObservation>& observations, ChatBackend& backend,
                                 const ActionInterface& interface) {
    std::vector<ChatMessage> messages{ChatMessage::system(prompt.render()),
                                      ChatMessage::user(action_step_message(prompt.step, query, observations, interface))};
    for (int attempt = 0;; ++attempt) {
        const auto reply = complete(messages, backend);
        std::string problem;
        try {
            return resolve_decision(parse_action_reply(reply), interface);
        } catch (const UnknownAction& e) {
            if (attempt >= 1) throw;
            problem = "'" + e.name() + "' is not an admissible action.";
        } catch (const ActionParseFailure& e) {
            if (attempt >= 1) throw;
            problem = e.what();
        }
        messages.push_back(ChatMessage::assistant(reply));
        messages.push_back(ChatMessage::user(problem + " Admissible actions: " + text::join(interface.names(), ", ") +
                                             ". End your reply with exactly one line '" + std::string(kActionMarker) +
                                             " <name>'."));
    }
}

}  // namespace racas
