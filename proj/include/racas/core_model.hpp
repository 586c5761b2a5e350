#pragma once

#include "racas/bearing.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace racas {

using ParamValues = std::map<std::string, double>;

// Natural-language morphology/sensor summary. Camera ids and joint axes are
// declared on "Cameras:" and "Axes:" lines inside the prose itself.
struct RobotDescription {
    std::string text;
    std::vector<std::string> camera_ids;
    std::vector<std::string> axes;

    friend bool operator==(const RobotDescription&, const RobotDescription&) = default;
};

struct ParameterDef {
    std::string name;
    std::string unit;
    double min = 0.0;
    double max = 0.0;
    double default_value = 0.0;

    friend bool operator==(const ParameterDef&, const ParameterDef&) = default;
};

struct ActionDef {
    std::string name;
    std::string description;
    std::vector<ParameterDef> parameters;
    // Effect on relative bearings of remembered objects; none if undeclared.
    MotionEvent motion;

    const ParameterDef* find_parameter(std::string_view param) const;
    friend bool operator==(const ActionDef&, const ActionDef&) = default;
};

struct ActionInterface {
    std::vector<ActionDef> actions;

    std::size_t size() const { return actions.size(); }
    const ActionDef* find(std::string_view name) const;
    std::vector<std::string> names() const;
    friend bool operator==(const ActionInterface&, const ActionInterface&) = default;
};

struct TaskSpec {
    std::string objective;
    std::optional<std::string> target_label;
    std::optional<std::string> success_hint;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct PoseEstimate {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    friend bool operator==(const PoseEstimate&, const PoseEstimate&) = default;
};

// s_t: what the internal position tracker knows, independent of vision.
struct ProprioState {
    std::map<std::string, double> joint_displacements;
    std::optional<PoseEstimate> pose_estimate;

    friend bool operator==(const ProprioState&, const ProprioState&) = default;
};

struct HistoryEntry {
    int step = 0;
    std::string action;
    ParamValues parameters;
    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// H_t. Step indices start at 1 and strictly increase.
class ActionHistory {
public:
    void append(int step, std::string action, ParamValues parameters);
    const std::vector<HistoryEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<HistoryEntry> entries_;
};

struct EmbodimentConfig {
    RobotDescription robot;
    ActionInterface interface;
    TaskSpec task;
    std::optional<std::string> environment_context;

    friend bool operator==(const EmbodimentConfig&, const EmbodimentConfig&) = default;
};

// Identifier grammar shared by action and parameter names: [a-z][a-z0-9_]*
bool is_identifier(std::string_view name);

RobotDescription parse_robot_description(std::string text);
ActionInterface parse_action_interface(std::string_view json_text);
TaskSpec parse_task_spec(std::string text);

EmbodimentConfig load_embodiment_config(const std::filesystem::path& robot_path,
                                        const std::filesystem::path& actions_path,
                                        const std::filesystem::path& task_path,
                                        const std::optional<std::filesystem::path>& context_path = {});

// Inverse of the loader: writes robot.txt, actions.json, task.txt (and
// context.txt when present) into dir.
void save_embodiment_config(const EmbodimentConfig& config, const std::filesystem::path& dir);
std::string serialize_action_interface(const ActionInterface& interface);

const ActionDef& validate_action(std::string_view name, const ActionInterface& interface);

// Throws SchemaViolation if a displacement key is not a declared axis.
void check_proprio(const ProprioState& proprio, const RobotDescription& robot);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace racas
