#include "racas/error.hpp"
#include "racas/sim_robots.hpp"

#include <map>

namespace racas {

namespace {

struct LimbMove {
    std::size_t joint;
    int delta;
};

const std::map<std::string, LimbMove, std::less<>>& limb_moves() {
    static const std::map<std::string, LimbMove, std::less<>> moves = {
        {"left", {0, -1}},      {"right", {0, 1}},       {"down", {1, -1}}, {"up", {1, 1}},
        {"rotate_ccw", {2, -1}}, {"rotate_cw", {2, 1}}, {"extend", {3, -1}}, {"bend", {3, 1}},
    };
    return moves;
}

}  // namespace

bool LimbRegion::contains(const std::array<int, 4>& joints) const {
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (joints[i] < ranges[i].min || joints[i] > ranges[i].max) return false;
    }
    return true;
}

LimbWorld::LimbWorld(LimbWorldConfig config) : config_(std::move(config)) {
    frame_mode_ = config_.frames;
    const bool target_known = std::any_of(config_.entities.begin(), config_.entities.end(),
                                          [&](const LimbEntity& e) { return e.label == config_.target; });
    if (!target_known) throw SchemaViolation("target", "target '" + config_.target + "' has no entity entry");
    reset(0);
}

void LimbWorld::reset(std::uint64_t) {
    joints_ = {0, 0, 0, 0};
    sense_counter_ = 0;
}

void LimbWorld::set_joints(const std::array<int, 4>& j) {
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i] < config_.ranges[i].min || j[i] > config_.ranges[i].max) throw Error("joint outside its range");
    }
    joints_ = j;
}

std::vector<std::string> LimbWorld::supported_actions() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : limb_moves()) out.push_back(name);
    out.emplace_back("reset");
    return out;
}

DispatchAck LimbWorld::dispatch(const ActionDef& action, const ParamValues&) {
    if (action.name == "reset") {
        joints_ = {0, 0, 0, 0};
        return DispatchAck::ok("all joints returned to 0");
    }
    const auto it = limb_moves().find(action.name);
    if (it == limb_moves().end()) throw Error("limb cannot execute action " + action.name);
    const auto [joint, delta] = it->second;
    const int next = joints_[joint] + delta;
    const auto& range = config_.ranges[joint];
    const std::string joint_name(kLimbJoints[joint]);
    if (next < range.min || next > range.max) {
        return DispatchAck::limit("limit: " + joint_name + " already at " + std::to_string(joints_[joint]));
    }
    joints_[joint] = next;
    return DispatchAck::ok(joint_name + " now " + std::to_string(next));
}

SymbolicScene LimbWorld::scene_for(const std::string& camera_id) const {
    SymbolicScene scene;
    for (const auto& e : config_.entities) {
        for (const auto& v : e.views) {
            if (v.camera == camera_id && v.region.contains(joints_)) {
                scene.push_back({e.label, v.bearing, v.size, v.occluded});
                break;
            }
        }
    }
    return scene;
}

std::vector<CameraFrame> LimbWorld::sense() const {
    ++sense_counter_;
    std::vector<CameraFrame> frames;
    for (const auto& cam : cameras()) frames.push_back(make_frame(cam, scene_for(cam.id)));
    return frames;
}

ProprioState LimbWorld::proprio() const {
    ProprioState p;
    for (std::size_t i = 0; i < kLimbJoints.size(); ++i) p.joint_displacements[std::string(kLimbJoints[i])] = joints_[i];
    return p;
}

bool LimbWorld::success() const {
    for (const auto& cam : cameras()) {
        for (const auto& e : scene_for(cam.id)) {
            if (e.label == config_.target) return true;
        }
    }
    return false;
}

std::vector<CameraSpec> LimbWorld::cameras() const {
    std::vector<CameraSpec> out;
    for (const auto& c : config_.cameras) {
        if (c.enabled) out.push_back(c);
    }
    return out;
}

std::vector<int> LimbWorld::state() const { return {joints_.begin(), joints_.end()}; }

void LimbWorld::set_state(std::span<const int> s) {
    if (s.size() != 4) throw Error("limb state has 4 components");
    set_joints({s[0], s[1], s[2], s[3]});
}

std::unique_ptr<RobotAdapter> LimbWorld::clone() const { return std::make_unique<LimbWorld>(*this); }

}  // namespace racas
