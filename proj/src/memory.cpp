#include "racas/memory.hpp"

#include "racas/error.hpp"
#include "racas/text.hpp"

#include <algorithm>
#include <array>
#include <regex>

namespace racas {

std::string_view to_string(DistanceClass d) {
    switch (d) {
        case DistanceClass::near: return "near";
        case DistanceClass::mid: return "mid";
        case DistanceClass::far: return "far";
        case DistanceClass::unknown: return "unknown";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Bearing algebra

Bearing update_bearing(Bearing b, const MotionEvent& e) {
    switch (e.kind) {
        // Turning left swings the world clockwise around the robot.
        case MotionKind::rotate_left: return b.shifted(e.rotation_sectors);
        case MotionKind::rotate_right: return b.shifted(-e.rotation_sectors);
        case MotionKind::translate_left: return b.shifted(1);
        case MotionKind::translate_right: return b.shifted(-1);
        case MotionKind::translate_forward:
        case MotionKind::translate_backward:
        case MotionKind::none: return b;
    }
    return b;
}

Bearing infer_position_from_detection(Bearing camera_facing, const MotionEvent& last_motion) {
    // Undo the motion: relative to the pose before the move that revealed it.
    switch (last_motion.kind) {
        case MotionKind::rotate_left: return camera_facing.shifted(-last_motion.rotation_sectors);
        case MotionKind::rotate_right: return camera_facing.shifted(last_motion.rotation_sectors);
        case MotionKind::translate_left: return camera_facing.shifted(-1);
        case MotionKind::translate_right: return camera_facing.shifted(1);
        default: return camera_facing;
    }
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string section_body_or_sentinel(const std::string& body) {
    return body.empty() ? std::string(kEmptySentinel) : body;
}

std::string render_objects(const std::vector<ObjectEntry>& objects) {
    std::string out = "Objects:";
    for (const auto& o : objects) {
        out += "\n- " + o.label + ": " + std::string(o.bearing.name()) + ", " + std::string(to_string(o.distance_class)) +
               ", last seen step " + std::to_string(o.last_seen_step);
        if (!o.properties.empty()) out += "; " + o.properties;
    }
    return out;
}

std::string render_physical(const EnvironmentMemory& m) {
    std::string body = m.scene_description;
    if (!m.objects.empty()) {
        if (!body.empty()) body += "\n";
        body += render_objects(m.objects);
    }
    return section_body_or_sentinel(body);
}

std::string render_history(const std::vector<HistoryNote>& notes) {
    std::string body;
    for (const auto& n : notes) {
        if (!body.empty()) body += "\n";
        body += "- " + n.text;
    }
    return section_body_or_sentinel(body);
}

std::string render_unbounded(const EnvironmentMemory& m) {
    std::string out;
    out += std::string(kPhysicalEnvironmentHeader) + "\n" + render_physical(m) + "\n";
    out += std::string(kRobotStateHeader) + "\n" + section_body_or_sentinel(m.robot_state) + "\n";
    out += std::string(kCuratedHistoryHeader) + "\n" + render_history(m.curated_history) + "\n";
    out += std::string(kTaskStateHeader) + "\n" + section_body_or_sentinel(m.task_state);
    return out;
}

int distance_rank(DistanceClass d) {
    switch (d) {
        case DistanceClass::near: return 0;
        case DistanceClass::mid: return 1;
        case DistanceClass::far: return 2;
        case DistanceClass::unknown: return 3;
    }
    return 3;
}

void truncate_to(std::string& s, std::size_t n) {
    if (s.size() <= n) return;
    if (n <= 3) {
        s.resize(n);
        return;
    }
    s.resize(n - 3);
    s += "...";
}

// Evicts oldest history, then stalest/farthest objects, then trims free
// text until the rendering fits.
void enforce_budget(EnvironmentMemory& m) {
    while (render_unbounded(m).size() > m.size_budget && !m.curated_history.empty()) {
        const auto oldest = std::min_element(m.curated_history.begin(), m.curated_history.end(),
                                             [](const HistoryNote& a, const HistoryNote& b) { return a.step < b.step; });
        m.curated_history.erase(oldest);
    }
    while (render_unbounded(m).size() > m.size_budget && !m.objects.empty()) {
        const auto victim = std::min_element(m.objects.begin(), m.objects.end(), [](const ObjectEntry& a, const ObjectEntry& b) {
            if (a.last_seen_step != b.last_seen_step) return a.last_seen_step < b.last_seen_step;
            return distance_rank(a.distance_class) > distance_rank(b.distance_class);
        });
        m.objects.erase(victim);
    }
    for (std::string* field : {&m.scene_description, &m.robot_state, &m.task_state}) {
        const auto size = render_unbounded(m).size();
        if (size <= m.size_budget) return;
        const auto excess = size - m.size_budget;
        // An empty field renders as the sentinel, so never shrink below it.
        const auto floor = kEmptySentinel.size();
        if (field->size() <= floor) continue;
        const auto keep = field->size() > excess + floor ? field->size() - excess : floor;
        truncate_to(*field, keep);
    }
}

}  // namespace

std::size_t minimum_memory_budget() { return render_unbounded(EnvironmentMemory{}).size(); }

EnvironmentMemory empty_memory(std::size_t size_budget) {
    if (size_budget < minimum_memory_budget()) {
        throw SchemaViolation("memory.size_budget", "budget below the minimum of " +
                                                        std::to_string(minimum_memory_budget()) + " characters");
    }
    EnvironmentMemory m;
    m.size_budget = size_budget;
    return m;
}

std::string render_memory_text(const EnvironmentMemory& memory) {
    auto out = render_unbounded(memory);
    if (out.size() > memory.size_budget) {
        EnvironmentMemory trimmed = memory;
        enforce_budget(trimmed);
        out = render_unbounded(trimmed);
        if (out.size() > memory.size_budget) out.resize(memory.size_budget);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detection parsing

std::vector<Detection> parse_detections(std::string_view observation_text) {
    static const std::regex yes_re(R"(Yes: ([^,.;]+?) visible, (left|center|right) of frame, (small|medium|large))",
                                   std::regex::ECMAScript | std::regex::icase);
    static const std::regex seen_re(R"(([^,.;:()]+?) \((left|center|right), (small|medium|large)\))",
                                    std::regex::ECMAScript | std::regex::icase);
    std::vector<Detection> out;
    const std::string s(observation_text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), yes_re); it != std::sregex_iterator(); ++it) {
        out.push_back({std::string(text::trim((*it)[1].str())), text::to_lower((*it)[2].str()),
                       text::to_lower((*it)[3].str())});
    }
    if (const auto pos = s.find("Visible:"); pos != std::string::npos) {
        const auto tail = s.substr(pos + 8);
        for (auto it = std::sregex_iterator(tail.begin(), tail.end(), seen_re); it != std::sregex_iterator(); ++it) {
            out.push_back({std::string(text::trim((*it)[1].str())), text::to_lower((*it)[2].str()),
                           text::to_lower((*it)[3].str())});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference curator

namespace {

DistanceClass distance_from_size(const std::string& size) {
    if (size == "large") return DistanceClass::near;
    if (size == "medium") return DistanceClass::mid;
    if (size == "small") return DistanceClass::far;
    return DistanceClass::unknown;
}

std::string render_params(const ParamValues& params) {
    std::vector<std::string> parts;
    for (const auto& [k, v] : params) parts.push_back(k + "=" + text::format_number(v));
    return parts.empty() ? std::string{} : "(" + text::join(parts, ", ") + ")";
}

std::string render_proprio(const ProprioState& p) {
    std::vector<std::string> parts;
    if (p.pose_estimate) {
        parts.push_back("pose estimate x=" + text::format_number(p.pose_estimate->x) +
                        ", y=" + text::format_number(p.pose_estimate->y) +
                        ", heading=" + text::format_number(p.pose_estimate->heading));
    }
    std::vector<std::string> joints;
    for (const auto& [k, v] : p.joint_displacements) joints.push_back(k + "=" + text::format_number(v));
    if (!joints.empty()) parts.push_back("displacements " + text::join(joints, ", "));
    return text::join(parts, "; ");
}

std::string first_line(const std::string& s) {
    const auto lines = text::split_lines(s);
    return lines.empty() ? std::string{} : std::string(text::trim(lines.front()));
}

}  // namespace

EnvironmentMemory reference_curate(const EnvironmentMemory& memory, const StepRecord& record,
                                   const std::string& task_objective) {
    EnvironmentMemory next = memory;
    const bool moved = record.ack.status == AckStatus::ok;
    const MotionEvent motion = moved ? record.decision.motion : MotionEvent::none();

    // Re-express remembered bearings in the post-action frame.
    for (auto& o : next.objects) o.bearing = update_bearing(o.bearing, motion);

    // Observations were taken before this step's action executed.
    std::vector<std::string> sightings;
    for (const auto& obs : record.observations) {
        for (const auto& d : parse_detections(obs.text)) {
            ObjectEntry entry;
            entry.label = d.label;
            entry.bearing = update_bearing(obs.facing, motion);
            entry.distance_class = distance_from_size(d.size);
            entry.last_seen_step = record.step;
            entry.properties = "seen by " + obs.camera_id + " camera, " + d.side + " of frame";
            if (memory.last_motion.kind != MotionKind::none) {
                entry.properties += "; revealed after " + std::string(to_string(memory.last_motion.kind)) + ", " +
                                    std::string(infer_position_from_detection(obs.facing, memory.last_motion).name()) +
                                    " of the pose before that move";
            }
            const auto same = std::find_if(next.objects.begin(), next.objects.end(),
                                           [&](const ObjectEntry& o) { return text::to_lower(o.label) == text::to_lower(d.label); });
            // Newer sighting wins over a contradicted older one.
            if (same != next.objects.end()) {
                *same = std::move(entry);
            } else {
                next.objects.push_back(std::move(entry));
            }
            sightings.push_back(d.label + " via " + obs.camera_id);
        }
    }

    if (!record.observations.empty()) {
        std::vector<std::string> views;
        for (const auto& obs : record.observations) views.push_back("[" + obs.camera_id + "] " + obs.text);
        next.scene_description = "Latest views (step " + std::to_string(record.step) + "): " + text::join(views, " ");
        truncate_to(next.scene_description, 600);
    }

    if (!record.decision.action.empty()) {
        const std::string outcome = std::string(to_string(record.ack.status));
        std::string note = "step " + std::to_string(record.step) + ": " + record.decision.action +
                           render_params(record.decision.parameters) + " -> " + record.ack.detail;
        HistoryNote* last_same_action = nullptr;
        for (auto& n : next.curated_history) {
            if (n.action == record.decision.action) last_same_action = &n;
        }
        if (last_same_action && last_same_action->outcome_class == outcome) {
            last_same_action->step = record.step;
            last_same_action->text = note + " (repeated)";
        } else {
            next.curated_history.push_back({record.step, record.decision.action, outcome, std::move(note)});
        }
    }

    {
        std::string state = render_proprio(record.proprio);
        if (!record.decision.action.empty()) {
            if (!state.empty()) state += "; ";
            state += "last action " + record.decision.action + " (" + record.ack.detail + ")";
        }
        next.robot_state = state;
    }

    {
        std::string objective = first_line(task_objective);
        std::string status;
        if (!sightings.empty()) {
            status = "Status: in progress; step " + std::to_string(record.step) + " sightings: " + text::join(sightings, ", ");
        } else {
            const auto pos = memory.task_state.find("Status:");
            status = pos == std::string::npos ? "Status: in progress; nothing located yet"
                                              : memory.task_state.substr(pos);
        }
        next.task_state = objective.empty() ? status : "Objective: " + objective + "\n" + status;
    }

    next.last_motion = motion;
    enforce_budget(next);
    return next;
}

// ---------------------------------------------------------------------------
// Model curation

std::optional<EnvironmentMemory> parse_memory_text(std::string_view reply, std::size_t size_budget) {
    constexpr std::array<std::string_view, 4> headers = {kPhysicalEnvironmentHeader, kRobotStateHeader,
                                                         kCuratedHistoryHeader, kTaskStateHeader};
    std::array<std::size_t, 4> pos{};
    for (std::size_t i = 0; i < headers.size(); ++i) {
        const auto first = reply.find(headers[i]);
        if (first == std::string_view::npos) return std::nullopt;
        if (reply.find(headers[i], first + 1) != std::string_view::npos) return std::nullopt;
        pos[i] = first;
    }
    auto body_of = [&](std::size_t i) {
        const auto start = pos[i] + headers[i].size();
        std::size_t end = reply.size();
        for (std::size_t j = 0; j < pos.size(); ++j) {
            if (pos[j] > pos[i]) end = std::min(end, pos[j]);
        }
        auto body = std::string(text::trim(reply.substr(start, end - start)));
        return body == kEmptySentinel ? std::string{} : body;
    };
    EnvironmentMemory m;
    m.size_budget = size_budget;
    m.scene_description = body_of(0);
    m.robot_state = body_of(1);
    for (auto line : text::split_lines(body_of(2))) {
        line = text::trim(line);
        if (line.empty()) continue;
        if (line.starts_with("- ")) line.remove_prefix(2);
        m.curated_history.push_back({0, "", "", std::string(line)});
    }
    m.task_state = body_of(3);
    return m;
}

std::string curator_system_prompt(std::size_t size_budget) {
    return "You are the Memory Curator of a robot control system. After every control step you receive the "
           "current environment memory and the latest step record (visual query, camera answers, executed action "
           "and its outcome). Rewrite the memory; do not append blindly. Merge redundant facts, resolve "
           "contradictions in favour of newer observations, and drop details that no longer matter for the task.\n"
           "Reply with exactly these four sections, each header on its own line, in this order:\n" +
           std::string(kPhysicalEnvironmentHeader) +
           " scene description, spatial layout, and an object inventory with properties and last-observed "
           "locations relative to the robot (front, front-right, right, back-right, back, back-left, left, "
           "front-left).\n" +
           std::string(kRobotStateHeader) + " position, orientation and joint configuration.\n" +
           std::string(kCuratedHistoryHeader) +
           " significant commands and their outcomes, one '- ' line each, keeping only novel or task-relevant "
           "ones.\n" +
           std::string(kTaskStateHeader) + " current objectives and completion status.\n" +
           "Infer object positions by combining which camera saw an object with the action that brought it into "
           "view, and update relative positions as the robot moves (an object in front becomes front-right after "
           "moving left). The whole reply must stay under " +
           std::to_string(size_budget) + " characters.";
}

namespace {

std::string describe_record(const StepRecord& r) {
    std::string out = "Step " + std::to_string(r.step) + "\nVisual query: " + r.query + "\nCamera answers:";
    for (const auto& o : r.observations) out += "\n[" + o.camera_id + ", facing " + std::string(o.facing.name()) + "] " + o.text;
    out += "\nExecuted action: " + r.decision.action + render_params(r.decision.parameters);
    out += "\nOutcome: " + std::string(to_string(r.ack.status)) + " (" + r.ack.detail + ")";
    const auto p = render_proprio(r.proprio);
    if (!p.empty()) out += "\nProprioception: " + p;
    return out;
}

}  // namespace

CurateResult curate(const EnvironmentMemory& memory, const StepRecord& record, ChatBackend& backend,
                    const std::string& task_objective) {
    std::vector<ChatMessage> messages{
        ChatMessage::system(curator_system_prompt(memory.size_budget)),
        ChatMessage::user("Current memory:\n" + render_memory_text(memory) + "\n\nLatest step record:\n" +
                          describe_record(record) + "\n\nWrite the updated memory."),
    };
    try {
        for (int attempt = 0; attempt < 2; ++attempt) {
            const auto reply = complete(messages, backend);
            if (auto parsed = parse_memory_text(reply, memory.size_budget)) {
                parsed->last_motion = record.ack.status == AckStatus::ok ? record.decision.motion : MotionEvent::none();
                if (render_unbounded(*parsed).size() <= memory.size_budget) return {std::move(*parsed), false};
            }
            messages.push_back(ChatMessage::assistant(reply));
            messages.push_back(ChatMessage::user(
                "That reply did not follow the schema. Reply with exactly the four sections " +
                std::string(kPhysicalEnvironmentHeader) + ", " + std::string(kRobotStateHeader) + ", " +
                std::string(kCuratedHistoryHeader) + ", " + std::string(kTaskStateHeader) + ", each exactly once, in under " +
                std::to_string(memory.size_budget) + " characters total."));
        }
    } catch (const Error&) {
        // Backend trouble is absorbed by the deterministic fallback.
    }
    return {reference_curate(memory, record, task_objective), true};
}

}  // namespace racas
