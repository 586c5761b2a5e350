#include "racas/step_record.hpp"

namespace racas {

using nlohmann::ordered_json;

std::string_view to_string(AckStatus s) {
    switch (s) {
        case AckStatus::ok: return "ok";
        case AckStatus::blocked: return "blocked";
        case AckStatus::limit: return "limit";
    }
    return "ok";
}

namespace {

ordered_json params_json(const ParamValues& p) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

ordered_json proprio_json(const ProprioState& p) {
    ordered_json j;
    j["joint_displacements"] = params_json(p.joint_displacements);
    if (p.pose_estimate) {
        j["pose_estimate"] = {{"x", p.pose_estimate->x}, {"y", p.pose_estimate->y}, {"heading", p.pose_estimate->heading}};
    } else {
        j["pose_estimate"] = nullptr;
    }
    return j;
}

}  // namespace

ordered_json to_json(const StepRecord& r) {
    ordered_json j;
    j["step"] = r.step;
    j["prompt_digest"] = r.prompt_digest;
    j["query"] = r.query;
    ordered_json obs = ordered_json::array();
    for (const auto& o : r.observations) {
        obs.push_back({{"camera_id", o.camera_id}, {"facing", std::string(o.facing.name())}, {"text", o.text}});
    }
    j["observations"] = std::move(obs);
    ordered_json motion = {{"kind", std::string(to_string(r.decision.motion.kind))},
                           {"sectors", r.decision.motion.rotation_sectors}};
    j["decision"] = {{"reasoning", r.decision.reasoning},
                     {"action", r.decision.action},
                     {"parameters", params_json(r.decision.parameters)},
                     {"clamps", r.decision.clamp_notes},
                     {"motion", std::move(motion)}};
    j["ack"] = {{"status", std::string(to_string(r.ack.status))}, {"detail", r.ack.detail}};
    j["proprio"] = proprio_json(r.proprio);
    j["memory"] = r.memory_snapshot;
    j["flags"] = r.flags;
    j["phases"] = {{"query", r.phases.query},
                   {"observe", r.phases.observe},
                   {"decide", r.phases.decide},
                   {"dispatch", r.phases.dispatch},
                   {"curate", r.phases.curate}};
    j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
    return j;
}

std::string to_jsonl_line(const StepRecord& r) { return to_json(r).dump() + "\n"; }

}  // namespace racas
