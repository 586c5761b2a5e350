#include "racas/error.hpp"
#include "racas/sim_robots.hpp"

#include <cmath>

namespace racas {

namespace {

constexpr std::array<std::array<int, 2>, 8> kYawDirs = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = 1e-9;

}  // namespace

TankWorld::TankWorld(TankWorldConfig config) : config_(std::move(config)) {
    frame_mode_ = config_.frames;
    const auto& s = config_.start;
    const auto& t = config_.target.cell;
    if (!in_bounds(s.x, s.y, s.z)) throw SchemaViolation("start.cell", "start outside the tank");
    if (!in_bounds(t.x, t.y, t.z)) throw SchemaViolation("target.cell", "target outside the tank");
    reset(0);
}

void TankWorld::reset(std::uint64_t) {
    pose_ = {config_.start.x, config_.start.y, config_.start.z, ((config_.start_yaw % 8) + 8) % 8};
    sense_counter_ = 0;
}

bool TankWorld::in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < config_.nx && y < config_.ny && z < config_.nz;
}

void TankWorld::set_pose(const TankPose& p) {
    if (!in_bounds(p.x, p.y, p.z) || p.yaw < 0 || p.yaw > 7) throw Error("invalid tank pose");
    pose_ = p;
}

std::vector<std::string> TankWorld::supported_actions() const {
    return {"surge_forward", "surge_backward", "yaw_left", "yaw_right", "heave_up", "heave_down"};
}

DispatchAck TankWorld::dispatch(const ActionDef& action, const ParamValues&) {
    const auto& name = action.name;
    if (name == "yaw_left" || name == "yaw_right") {
        pose_.yaw = (pose_.yaw + (name == "yaw_left" ? 1 : 7)) % 8;
        return DispatchAck::ok(std::string("yawed 45 degrees ") + (name == "yaw_left" ? "left" : "right"));
    }
    TankPose next = pose_;
    if (name == "surge_forward" || name == "surge_backward") {
        const int sign = name == "surge_forward" ? 1 : -1;
        const auto d = kYawDirs[static_cast<std::size_t>(pose_.yaw)];
        next.x += sign * d[0];
        next.y += sign * d[1];
    } else if (name == "heave_up") {
        next.z += 1;
    } else if (name == "heave_down") {
        next.z -= 1;
    } else {
        throw Error("tank cannot execute action " + name);
    }
    if (!in_bounds(next.x, next.y, next.z)) return DispatchAck::blocked("blocked: tank wall, floor or surface");
    pose_ = next;
    return DispatchAck::ok(name == "heave_up" ? "rose one level" : name == "heave_down" ? "descended one level" : "moved one cell");
}

SymbolicScene TankWorld::scene_for(const CameraSpec& cam) const {
    // Camera yaw in eighth turns; facing sectors run clockwise.
    const int yaw = (pose_.yaw - cam.facing.sector() + 8) % 8;
    const double heading = yaw * kPi / 4.0;
    const double cx = std::cos(heading), cy = std::sin(heading);
    SymbolicScene scene;
    auto consider = [&](const TankEntity& e) {
        const double vx = e.cell.x - pose_.x, vy = e.cell.y - pose_.y, vz = e.cell.z - pose_.z;
        const double horiz = std::hypot(vx, vy);
        const double cells = std::sqrt(vx * vx + vy * vy + vz * vz);
        if (cells == 0.0) return;
        const double meters = cells * config_.cell_size;
        if (meters > config_.view_distance + kEps) return;
        const double alpha = std::atan2(cx * vy - cy * vx, cx * vx + cy * vy) * 180.0 / kPi;
        if (horiz > 0.0 && !(alpha > -45.0 + kEps && alpha <= 45.0 + kEps)) return;
        const double elevation = std::atan2(vz, horiz) * 180.0 / kPi;
        if (elevation < config_.min_elevation_deg - kEps || elevation > config_.max_elevation_deg + kEps) return;
        SceneEntity s;
        s.label = e.label;
        s.bearing_in_frame = horiz == 0.0 ? FrameBearing::center
                             : alpha > 15.0 + kEps ? FrameBearing::left
                             : alpha < -15.0 - kEps ? FrameBearing::right
                                                    : FrameBearing::center;
        s.apparent_size = meters <= config_.large_within + kEps    ? ApparentSize::large
                          : meters <= config_.medium_within + kEps ? ApparentSize::medium
                                                                   : ApparentSize::small;
        scene.push_back(std::move(s));
    };
    consider(config_.target);
    for (const auto& e : config_.entities) consider(e);
    return scene;
}

std::vector<CameraFrame> TankWorld::sense() const {
    ++sense_counter_;
    std::vector<CameraFrame> frames;
    for (const auto& cam : cameras()) frames.push_back(make_frame(cam, scene_for(cam)));
    return frames;
}

ProprioState TankWorld::proprio() const {
    ProprioState p;
    const double x = (pose_.x - config_.start.x) * config_.cell_size;
    const double y = (pose_.y - config_.start.y) * config_.cell_size;
    const double depth = (config_.start.z - pose_.z) * config_.cell_size;
    double yaw = ((pose_.yaw - config_.start_yaw + 16) % 8) * 45.0;
    if (yaw > 180.0) yaw -= 360.0;
    p.joint_displacements = {{"surge_x", x}, {"surge_y", y}, {"depth", depth}, {"yaw", yaw}};
    p.pose_estimate = PoseEstimate{x, y, yaw};
    return p;
}

bool TankWorld::success() const {
    const auto& t = config_.target.cell;
    const double cells = std::sqrt(std::pow(pose_.x - t.x, 2) + std::pow(pose_.y - t.y, 2) + std::pow(pose_.z - t.z, 2));
    return cells * config_.cell_size <= config_.success_radius + kEps;
}

std::vector<CameraSpec> TankWorld::cameras() const {
    std::vector<CameraSpec> out;
    for (const auto& c : config_.cameras) {
        if (c.enabled) out.push_back(c);
    }
    return out;
}

std::vector<int> TankWorld::state() const { return {pose_.x, pose_.y, pose_.z, pose_.yaw}; }

void TankWorld::set_state(std::span<const int> s) {
    if (s.size() != 4) throw Error("tank state has 4 components");
    set_pose({s[0], s[1], s[2], s[3]});
}

std::unique_ptr<RobotAdapter> TankWorld::clone() const { return std::make_unique<TankWorld>(*this); }

}  // namespace racas
