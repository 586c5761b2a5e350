#pragma once

#include "racas/bearing.hpp"
#include "racas/core_model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace racas {

enum class AckStatus { ok, blocked, limit };

std::string_view to_string(AckStatus s);

struct DispatchAck {
    AckStatus status = AckStatus::ok;
    std::string detail;

    static DispatchAck ok(std::string d = "ok") { return {AckStatus::ok, std::move(d)}; }
    static DispatchAck blocked(std::string d = "blocked") { return {AckStatus::blocked, std::move(d)}; }
    static DispatchAck limit(std::string d = "limit") { return {AckStatus::limit, std::move(d)}; }
};

struct ObservationEntry {
    std::string camera_id;
    Bearing facing;  // camera's mounting direction relative to the robot
    std::string text;
};

struct DecisionRecord {
    std::string reasoning;
    std::string action;
    ParamValues parameters;
    std::vector<std::string> clamp_notes;
    MotionEvent motion;
};

// Logical clock values stamped as each of the five loop phases finishes
// (query, observe, decide, dispatch, curate).
struct PhaseStamps {
    long query = 0;
    long observe = 0;
    long decide = 0;
    long dispatch = 0;
    long curate = 0;
};

// One loop iteration. Everything here is deterministic given the inputs, so
// serialized logs compare byte-for-byte across record/replay.
struct StepRecord {
    int step = 0;
    std::string prompt_digest;
    std::string query;
    std::vector<ObservationEntry> observations;
    DecisionRecord decision;
    DispatchAck ack;
    ProprioState proprio;  // after dispatch
    std::string memory_snapshot;  // rendered M_t after curation
    std::vector<std::string> flags;
    PhaseStamps phases;
    std::optional<std::string> error;
};

nlohmann::ordered_json to_json(const StepRecord& record);
std::string to_jsonl_line(const StepRecord& record);

}  // namespace racas
