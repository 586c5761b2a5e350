#include "racas/core_model.hpp"

#include "racas/error.hpp"
#include "racas/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace racas {

using nlohmann::json;

UnknownAction::UnknownAction(std::string name, std::vector<std::string> admissible)
    : Error("unknown action '" + name + "'; admissible: " + text::join(admissible, ", ")),
      name_(std::move(name)),
      admissible_(std::move(admissible)) {}

const ParameterDef* ActionDef::find_parameter(std::string_view param) const {
    for (const auto& p : parameters) {
        if (p.name == param) return &p;
    }
    return nullptr;
}

const ActionDef* ActionInterface::find(std::string_view name) const {
    for (const auto& a : actions) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::vector<std::string> ActionInterface::names() const {
    std::vector<std::string> out;
    out.reserve(actions.size());
    for (const auto& a : actions) out.push_back(a.name);
    return out;
}

void ActionHistory::append(int step, std::string action, ParamValues parameters) {
    const int expected_min = entries_.empty() ? 1 : entries_.back().step + 1;
    if (step < expected_min) {
        throw SchemaViolation("history.step", "step indices must start at 1 and strictly increase");
    }
    entries_.push_back({step, std::move(action), std::move(parameters)});
}

bool is_identifier(std::string_view name) {
    if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

// Value of the first "Key: value" line (key matched case-insensitively).
std::optional<std::string> key_line(std::string_view body, std::string_view key) {
    for (auto line : text::split_lines(body)) {
        line = text::trim(line);
        if (line.size() > key.size() && text::starts_with_ci(line, key) && line[key.size()] == ':') {
            return std::string(text::trim(line.substr(key.size() + 1)));
        }
    }
    return std::nullopt;
}

std::vector<std::string> list_value(const std::string& value) {
    std::vector<std::string> out;
    for (auto& item : text::split(value, ',')) {
        if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw SchemaViolation(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw SchemaViolation(where + "." + key, "unknown key");
    }
}

std::string require_string(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaViolation(where + "." + key, "required field missing");
    if (!it->is_string()) throw SchemaViolation(where + "." + key, "expected a string");
    return it->get<std::string>();
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaViolation(where + "." + key, "required field missing");
    if (!it->is_number()) throw SchemaViolation(where + "." + key, "expected a number");
    return it->get<double>();
}

ParameterDef parse_parameter(const json& j, const std::string& where) {
    check_keys(j, {"name", "unit", "min", "max", "default"}, where);
    ParameterDef p;
    p.name = require_string(j, "name", where);
    if (!is_identifier(p.name)) throw SchemaViolation(where + ".name", "not an identifier: " + p.name);
    p.unit = j.contains("unit") ? require_string(j, "unit", where) : std::string{};
    p.min = require_number(j, "min", where);
    p.max = require_number(j, "max", where);
    p.default_value = require_number(j, "default", where);
    if (!(p.min < p.max)) throw SchemaViolation(where + ".max", "degenerate range (min must be < max)");
    if (p.default_value < p.min || p.default_value > p.max) {
        throw SchemaViolation(where + ".default", "default outside [min, max]");
    }
    return p;
}

MotionEvent parse_motion(const json& j, const std::string& where) {
    check_keys(j, {"kind", "sectors"}, where);
    const auto kind_text = require_string(j, "kind", where);
    const auto kind = parse_motion_kind(kind_text);
    if (!kind) throw SchemaViolation(where + ".kind", "unknown motion kind: " + kind_text);
    MotionEvent e{*kind, 0};
    if (j.contains("sectors")) {
        if (!j["sectors"].is_number_integer()) throw SchemaViolation(where + ".sectors", "expected an integer");
        e.rotation_sectors = j["sectors"].get<int>();
    }
    if (!e.valid()) {
        throw SchemaViolation(where + ".sectors", "rotations need sectors > 0; other kinds take none");
    }
    return e;
}

}  // namespace

RobotDescription parse_robot_description(std::string text_in) {
    RobotDescription r;
    r.text = std::string(text::trim(text_in));
    if (r.text.empty()) throw SchemaViolation("robot.text", "robot description is empty");
    const auto cams = key_line(r.text, "Cameras");
    if (!cams) throw SchemaViolation("robot.cameras", "required 'Cameras:' line missing");
    r.camera_ids = list_value(*cams);
    if (r.camera_ids.empty()) throw SchemaViolation("robot.cameras", "at least one camera required");
    std::set<std::string> seen;
    for (const auto& c : r.camera_ids) {
        if (!is_identifier(c)) throw SchemaViolation("robot.cameras", "camera id is not an identifier: " + c);
        if (!seen.insert(c).second) throw SchemaViolation("robot.cameras", "duplicate camera id: " + c);
    }
    if (const auto axes = key_line(r.text, "Axes")) r.axes = list_value(*axes);
    return r;
}

ActionInterface parse_action_interface(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("actions", std::string("malformed JSON: ") + e.what());
    }
    check_keys(doc, {"actions", "action_count"}, "actions_file");
    const auto it = doc.find("actions");
    if (it == doc.end()) throw SchemaViolation("actions", "required field missing");
    if (!it->is_array() || it->empty()) throw SchemaViolation("actions", "expected a non-empty array");

    ActionInterface iface;
    std::set<std::string> names;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& a = (*it)[i];
        const std::string where = "actions[" + std::to_string(i) + "]";
        check_keys(a, {"name", "description", "parameters", "motion"}, where);
        ActionDef def;
        def.name = require_string(a, "name", where);
        if (!is_identifier(def.name)) throw SchemaViolation(where + ".name", "not an identifier: " + def.name);
        def.description = require_string(a, "description", where);
        if (text::trim(def.description).empty()) throw SchemaViolation(where + ".description", "empty");
        if (a.contains("parameters")) {
            const auto& ps = a["parameters"];
            if (!ps.is_array()) throw SchemaViolation(where + ".parameters", "expected an array");
            std::set<std::string> pnames;
            for (std::size_t k = 0; k < ps.size(); ++k) {
                auto p = parse_parameter(ps[k], where + ".parameters[" + std::to_string(k) + "]");
                if (!pnames.insert(p.name).second) {
                    throw SchemaViolation(where + ".parameters", "duplicate parameter " + p.name);
                }
                def.parameters.push_back(std::move(p));
            }
        }
        if (a.contains("motion")) def.motion = parse_motion(a["motion"], where + ".motion");
        if (!names.insert(def.name).second) throw DuplicateActionName(def.name);
        iface.actions.push_back(std::move(def));
    }
    if (doc.contains("action_count")) {
        const auto& k = doc["action_count"];
        if (!k.is_number_integer()) throw SchemaViolation("action_count", "expected an integer");
        if (k.get<std::size_t>() != iface.size()) {
            throw SchemaViolation("action_count", "declares " + std::to_string(k.get<std::size_t>()) +
                                                      " actions but " + std::to_string(iface.size()) +
                                                      " are defined");
        }
    }
    return iface;
}

TaskSpec parse_task_spec(std::string text_in) {
    TaskSpec t;
    t.objective = std::string(text::trim(text_in));
    if (t.objective.empty()) throw SchemaViolation("task.objective", "task text is empty");
    t.target_label = key_line(t.objective, "Target");
    t.success_hint = key_line(t.objective, "Success");
    return t;
}

EmbodimentConfig load_embodiment_config(const std::filesystem::path& robot_path,
                                        const std::filesystem::path& actions_path,
                                        const std::filesystem::path& task_path,
                                        const std::optional<std::filesystem::path>& context_path) {
    EmbodimentConfig cfg;
    cfg.robot = parse_robot_description(read_text_file(robot_path));
    cfg.interface = parse_action_interface(read_text_file(actions_path));
    cfg.task = parse_task_spec(read_text_file(task_path));
    if (context_path) {
        auto ctx = std::string(text::trim(read_text_file(*context_path)));
        if (!ctx.empty()) cfg.environment_context = std::move(ctx);
    }
    return cfg;
}

std::string serialize_action_interface(const ActionInterface& iface) {
    json actions = json::array();
    for (const auto& a : iface.actions) {
        json j = {{"name", a.name}, {"description", a.description}};
        if (!a.parameters.empty()) {
            json ps = json::array();
            for (const auto& p : a.parameters) {
                ps.push_back({{"name", p.name}, {"unit", p.unit}, {"min", p.min}, {"max", p.max},
                              {"default", p.default_value}});
            }
            j["parameters"] = std::move(ps);
        }
        if (a.motion.kind != MotionKind::none) {
            json m = {{"kind", std::string(to_string(a.motion.kind))}};
            if (a.motion.rotation_sectors) m["sectors"] = a.motion.rotation_sectors;
            j["motion"] = std::move(m);
        }
        actions.push_back(std::move(j));
    }
    return json{{"action_count", iface.size()}, {"actions", std::move(actions)}}.dump(2) + "\n";
}

void save_embodiment_config(const EmbodimentConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto write = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot write " + p.string());
        out << body;
    };
    write(dir / "robot.txt", config.robot.text + "\n");
    write(dir / "actions.json", serialize_action_interface(config.interface));
    std::string task = config.task.objective;
    if (config.task.target_label && !key_line(task, "Target")) task += "\nTarget: " + *config.task.target_label;
    if (config.task.success_hint && !key_line(task, "Success")) task += "\nSuccess: " + *config.task.success_hint;
    write(dir / "task.txt", task + "\n");
    if (config.environment_context) write(dir / "context.txt", *config.environment_context + "\n");
}

const ActionDef& validate_action(std::string_view name, const ActionInterface& interface) {
    if (const auto* def = interface.find(name)) return *def;
    throw UnknownAction(std::string(name), interface.names());
}

void check_proprio(const ProprioState& proprio, const RobotDescription& robot) {
    for (const auto& [axis, _] : proprio.joint_displacements) {
        if (std::find(robot.axes.begin(), robot.axes.end(), axis) == robot.axes.end()) {
            throw SchemaViolation("proprio." + axis, "axis not declared in robot description");
        }
    }
}

}  // namespace racas
