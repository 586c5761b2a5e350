#include "racas/error.hpp"
#include "racas/sim_robots.hpp"
#include "racas/text.hpp"

#include <deque>
#include <map>
#include <unordered_set>

namespace racas {

using nlohmann::json;

MonitorOptions RobotAdapter::monitor_options() const {
    MonitorOptions opts;
    for (const auto& cam : cameras()) {
        if (cam.crop) opts.cameras[cam.id].crop = cam.crop;
    }
    return opts;
}

CameraFrame RobotAdapter::make_frame(const CameraSpec& cam, SymbolicScene scene) const {
    if (frame_mode_ == FrameMode::raster) {
        const auto caption = describe_symbolic_scene(scene);
        return make_raster_frame(cam.id, render_scene(scene, cam.resolution), sense_counter_, caption);
    }
    return {cam.id, std::move(scene), sense_counter_};
}

Raster render_scene(const SymbolicScene& scene, Size resolution) {
    Raster img(resolution.width, resolution.height, 96);
    const int w = resolution.width, h = resolution.height;
    for (const auto& e : scene) {
        const double frac = e.apparent_size == ApparentSize::large ? 0.45 : e.apparent_size == ApparentSize::medium ? 0.25 : 0.1;
        const int bw = std::max(1, static_cast<int>(w * frac / 2)), bh = std::max(1, static_cast<int>(h * frac));
        const int cx = e.bearing_in_frame == FrameBearing::left ? w / 6 : e.bearing_in_frame == FrameBearing::right ? 5 * w / 6 : w / 2;
        std::uint32_t hash = 2166136261u;
        for (unsigned char c : e.label) hash = (hash ^ c) * 16777619u;
        img.fill_rect({cx - bw / 2, h / 2 - bh / 2, bw, bh}, static_cast<std::uint8_t>(hash), static_cast<std::uint8_t>(hash >> 8),
                      static_cast<std::uint8_t>(hash >> 16));
    }
    return img;
}

void check_interface_supported(const RobotAdapter& adapter, const ActionInterface& interface) {
    const auto supported = adapter.supported_actions();
    for (const auto& a : interface.actions) {
        if (std::find(supported.begin(), supported.end(), a.name) == supported.end()) {
            throw SchemaViolation("actions." + a.name, "not executable by the " + adapter.kind() + " adapter (supports " +
                                                           text::join(supported, ", ") + ")");
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario parsing helpers

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw SchemaViolation(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw SchemaViolation(where + "." + key, "unknown key");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaViolation(key, e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw SchemaViolation(where + "." + key, "required field missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaViolation(where + "." + key, e.what());
    }
}

FrameMode parse_frames(const json& j) {
    const auto s = get_or<std::string>(j, "frames", "symbolic");
    if (s == "symbolic") return FrameMode::symbolic;
    if (s == "raster") return FrameMode::raster;
    throw SchemaViolation("frames", "expected symbolic|raster");
}

std::vector<CameraSpec> parse_cameras(const json& j, Size default_res) {
    if (!j.contains("cameras") || !j["cameras"].is_array() || j["cameras"].empty()) {
        throw SchemaViolation("cameras", "at least one camera required");
    }
    std::vector<CameraSpec> out;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
        const auto& c = j["cameras"][i];
        const auto where = "cameras[" + std::to_string(i) + "]";
        check_keys(c, {"id", "facing", "enabled", "resolution", "crop"}, where);
        CameraSpec cam;
        cam.id = require<std::string>(c, "id", where);
        if (!ids.insert(cam.id).second) throw SchemaViolation(where + ".id", "duplicate camera " + cam.id);
        const auto facing = get_or<std::string>(c, "facing", "front");
        const auto b = Bearing::parse(facing);
        if (!b) throw SchemaViolation(where + ".facing", "unknown bearing " + facing);
        cam.facing = *b;
        cam.enabled = get_or<bool>(c, "enabled", true);
        cam.resolution = default_res;
        if (c.contains("resolution")) {
            const auto r = c["resolution"].get<std::vector<int>>();
            if (r.size() != 2 || r[0] <= 0 || r[1] <= 0) throw SchemaViolation(where + ".resolution", "expected [w, h]");
            cam.resolution = {r[0], r[1]};
        }
        if (c.contains("crop")) {
            const auto r = c["crop"].get<std::vector<int>>();
            if (r.size() != 4 || r[2] <= 0 || r[3] <= 0) throw SchemaViolation(where + ".crop", "expected [x, y, w, h]");
            cam.crop = Rect{r[0], r[1], r[2], r[3]};
        }
        out.push_back(std::move(cam));
    }
    return out;
}

FrameBearing frame_bearing_field(const json& j, const std::string& where) {
    const auto s = get_or<std::string>(j, "bearing", "center");
    const auto b = parse_frame_bearing(s);
    if (!b) throw SchemaViolation(where + ".bearing", "expected left|center|right");
    return *b;
}

ApparentSize size_field(const json& j, const std::string& where) {
    const auto s = get_or<std::string>(j, "size", "medium");
    const auto v = parse_apparent_size(s);
    if (!v) throw SchemaViolation(where + ".size", "expected small|medium|large");
    return *v;
}

GridCell grid_cell(const json& j, const std::string& where) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 2) throw SchemaViolation(where, "expected [x, y]");
    return {v[0], v[1]};
}

TankCell tank_cell(const json& j, const std::string& where) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 3) throw SchemaViolation(where, "expected [x, y, z]");
    return {v[0], v[1], v[2]};
}

JointRange joint_range(const json& j, const std::string& where) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 2 || v[0] > v[1]) throw SchemaViolation(where, "expected [min, max] with min <= max");
    return {v[0], v[1]};
}

}  // namespace

GridWorldConfig parse_gridworld(const json& j) {
    check_keys(j, {"world", "name", "width", "height", "cell_size", "obstacles", "start", "target", "entities",
                   "success_radius", "view_distance", "size_bands", "cameras", "frames", "notes"},
               "scenario");
    GridWorldConfig c;
    c.width = get_or(j, "width", c.width);
    c.height = get_or(j, "height", c.height);
    c.cell_size = get_or(j, "cell_size", c.cell_size);
    if (c.width <= 0 || c.height <= 0 || c.cell_size <= 0) throw SchemaViolation("width", "grid dimensions must be positive");
    if (j.contains("obstacles")) {
        for (const auto& o : j["obstacles"]) {
            // [x, y] or [x0, y0, x1, y1] inclusive rectangle
            const auto v = o.get<std::vector<int>>();
            if (v.size() == 2) {
                c.blocked.insert({v[0], v[1]});
            } else if (v.size() == 4) {
                for (int x = std::min(v[0], v[2]); x <= std::max(v[0], v[2]); ++x)
                    for (int y = std::min(v[1], v[3]); y <= std::max(v[1], v[3]); ++y) c.blocked.insert({x, y});
            } else {
                throw SchemaViolation("obstacles", "expected [x, y] or [x0, y0, x1, y1]");
            }
        }
    }
    const auto& start = j.at("start");
    check_keys(start, {"cell", "heading"}, "start");
    c.start = grid_cell(start.at("cell"), "start.cell");
    c.start_heading_deg = get_or(start, "heading", 0);
    const auto& target = j.at("target");
    check_keys(target, {"label", "cell"}, "target");
    c.target = {require<std::string>(target, "label", "target"), grid_cell(target.at("cell"), "target.cell")};
    if (j.contains("entities")) {
        for (const auto& e : j["entities"]) {
            check_keys(e, {"label", "cell"}, "entities[]");
            c.entities.push_back({require<std::string>(e, "label", "entities[]"), grid_cell(e.at("cell"), "entities[].cell")});
        }
    }
    c.success_radius = get_or(j, "success_radius", c.success_radius);
    c.view_distance = get_or(j, "view_distance", c.view_distance);
    if (j.contains("size_bands")) {
        const auto v = j["size_bands"].get<std::vector<double>>();
        if (v.size() != 2 || !(v[0] < v[1])) throw SchemaViolation("size_bands", "expected [large_within, medium_within]");
        c.large_within = v[0];
        c.medium_within = v[1];
    }
    c.cameras = parse_cameras(j, {640, 480});
    c.frames = parse_frames(j);
    return c;
}

LimbWorldConfig parse_limb(const json& j) {
    check_keys(j, {"world", "name", "joint_ranges", "cameras", "entities", "target", "frames", "notes"}, "scenario");
    LimbWorldConfig c;
    for (auto& r : c.ranges) r = {-3, 3};
    if (j.contains("joint_ranges")) {
        const auto& jr = j["joint_ranges"];
        check_keys(jr, {"horizontal", "vertical", "rotational", "finger"}, "joint_ranges");
        for (std::size_t i = 0; i < kLimbJoints.size(); ++i) {
            const std::string name(kLimbJoints[i]);
            if (jr.contains(name)) c.ranges[i] = joint_range(jr[name], "joint_ranges." + name);
            if (c.ranges[i].min > 0 || c.ranges[i].max < 0) {
                throw SchemaViolation("joint_ranges." + name, "range must contain the reset position 0");
            }
        }
    }
    c.cameras = parse_cameras(j, {100, 100});
    c.target = require<std::string>(j, "target", "scenario");
    for (std::size_t i = 0; i < j.at("entities").size(); ++i) {
        const auto& e = j["entities"][i];
        const auto where = "entities[" + std::to_string(i) + "]";
        check_keys(e, {"label", "views"}, where);
        LimbEntity ent{require<std::string>(e, "label", where), {}};
        for (const auto& v : e.at("views")) {
            check_keys(v, {"camera", "region", "bearing", "size", "occluded"}, where + ".views[]");
            LimbView view;
            view.camera = require<std::string>(v, "camera", where);
            const bool known = std::any_of(c.cameras.begin(), c.cameras.end(), [&](const CameraSpec& cam) { return cam.id == view.camera; });
            if (!known) throw SchemaViolation(where + ".camera", "unknown camera " + view.camera);
            for (std::size_t k = 0; k < kLimbJoints.size(); ++k) view.region.ranges[k] = c.ranges[k];
            if (v.contains("region")) {
                check_keys(v["region"], {"horizontal", "vertical", "rotational", "finger"}, where + ".region");
                for (std::size_t k = 0; k < kLimbJoints.size(); ++k) {
                    const std::string name(kLimbJoints[k]);
                    if (v["region"].contains(name)) view.region.ranges[k] = joint_range(v["region"][name], where + ".region." + name);
                }
            }
            view.bearing = frame_bearing_field(v, where);
            view.size = size_field(v, where);
            view.occluded = get_or(v, "occluded", false);
            ent.views.push_back(std::move(view));
        }
        c.entities.push_back(std::move(ent));
    }
    c.frames = parse_frames(j);
    return c;
}

TankWorldConfig parse_tank(const json& j) {
    check_keys(j, {"world", "name", "size", "cell_size", "start", "target", "entities", "success_radius", "view_distance",
                   "elevation_range", "size_bands", "cameras", "frames", "notes"},
               "scenario");
    TankWorldConfig c;
    if (j.contains("size")) {
        const auto v = j["size"].get<std::vector<int>>();
        if (v.size() != 3 || v[0] <= 0 || v[1] <= 0 || v[2] <= 0) throw SchemaViolation("size", "expected [nx, ny, nz]");
        c.nx = v[0];
        c.ny = v[1];
        c.nz = v[2];
    }
    c.cell_size = get_or(j, "cell_size", c.cell_size);
    const auto& start = j.at("start");
    check_keys(start, {"cell", "yaw"}, "start");
    c.start = tank_cell(start.at("cell"), "start.cell");
    c.start_yaw = get_or(start, "yaw", 0);
    const auto& target = j.at("target");
    check_keys(target, {"label", "cell"}, "target");
    c.target = {require<std::string>(target, "label", "target"), tank_cell(target.at("cell"), "target.cell")};
    if (j.contains("entities")) {
        for (const auto& e : j["entities"]) {
            check_keys(e, {"label", "cell"}, "entities[]");
            c.entities.push_back({require<std::string>(e, "label", "entities[]"), tank_cell(e.at("cell"), "entities[].cell")});
        }
    }
    c.success_radius = get_or(j, "success_radius", c.success_radius);
    c.view_distance = get_or(j, "view_distance", c.view_distance);
    if (j.contains("elevation_range")) {
        const auto v = j["elevation_range"].get<std::vector<double>>();
        if (v.size() != 2 || !(v[0] < v[1])) throw SchemaViolation("elevation_range", "expected [min_deg, max_deg]");
        c.min_elevation_deg = v[0];
        c.max_elevation_deg = v[1];
    }
    if (j.contains("size_bands")) {
        const auto v = j["size_bands"].get<std::vector<double>>();
        if (v.size() != 2 || !(v[0] < v[1])) throw SchemaViolation("size_bands", "expected [large_within, medium_within]");
        c.large_within = v[0];
        c.medium_within = v[1];
    }
    c.cameras = parse_cameras(j, {1920, 1080});
    c.frames = parse_frames(j);
    return c;
}

namespace {

using Factory = std::function<std::unique_ptr<RobotAdapter>(const json&)>;

const std::map<std::string, Factory>& registry() {
    static const std::map<std::string, Factory> table = {
        {"gridworld", [](const json& j) { return std::make_unique<GridWorld>(parse_gridworld(j)); }},
        {"limb", [](const json& j) { return std::make_unique<LimbWorld>(parse_limb(j)); }},
        {"tank", [](const json& j) { return std::make_unique<TankWorld>(parse_tank(j)); }},
    };
    return table;
}

}  // namespace

std::vector<std::string> registered_world_kinds() {
    std::vector<std::string> out;
    for (const auto& [k, _] : registry()) out.push_back(k);
    return out;
}

std::unique_ptr<RobotAdapter> make_adapter(const json& scenario) {
    if (!scenario.is_object() || !scenario.contains("world")) throw SchemaViolation("world", "required field missing");
    const auto kind = scenario["world"].get<std::string>();
    const auto it = registry().find(kind);
    if (it == registry().end()) {
        throw SchemaViolation("world", "unknown world '" + kind + "' (known: " + text::join(registered_world_kinds(), ", ") + ")");
    }
    try {
        return it->second(scenario);
    } catch (const json::exception& e) {
        throw SchemaViolation("scenario", e.what());
    }
}

std::unique_ptr<RobotAdapter> load_scenario(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaViolation("scenario", std::string("malformed JSON: ") + e.what());
    }
    return make_adapter(doc);
}

// ---------------------------------------------------------------------------

namespace {

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(x))) * 1099511628211ull;
        return h;
    }
};

}  // namespace

int min_steps_oracle(const RobotAdapter& adapter, const ActionInterface& interface, std::size_t max_states) {
    if (adapter.success()) return 0;
    check_interface_supported(adapter, interface);
    auto work = adapter.clone();
    const ParamValues no_params;
    std::unordered_set<std::vector<int>, VecHash> seen;
    std::deque<std::pair<std::vector<int>, int>> frontier;
    seen.insert(adapter.state());
    frontier.emplace_back(adapter.state(), 0);
    while (!frontier.empty()) {
        auto [s, depth] = std::move(frontier.front());
        frontier.pop_front();
        for (const auto& action : interface.actions) {
            work->set_state(s);
            work->dispatch(action, no_params);
            if (work->success()) return depth + 1;
            auto next = work->state();
            if (seen.insert(next).second) {
                if (seen.size() > max_states) throw Unreachable("state space exceeds search limit");
                frontier.emplace_back(std::move(next), depth + 1);
            }
        }
    }
    throw Unreachable("no success state reachable from the start state");
}

const ActionDef& random_policy_step(const ActionInterface& interface, std::mt19937_64& rng) {
    if (interface.actions.empty()) throw Error("random policy needs at least one action");
    std::uniform_int_distribution<std::size_t> pick(0, interface.actions.size() - 1);
    return interface.actions[pick(rng)];
}

}  // namespace racas
