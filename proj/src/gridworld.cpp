#include "racas/error.hpp"
#include "racas/sim_robots.hpp"

#include <cmath>

namespace racas {

namespace {

constexpr std::array<GridCell, 4> kHeadingDirs = {{{0, 1}, {-1, 0}, {0, -1}, {1, 0}}};
constexpr double kPi = 3.14159265358979323846;
constexpr double kAngleEps = 1e-9;

int camera_quarter_turns(Bearing facing) {
    // Cameras mount on quarter turns; sector 6 (left) is +1 quarter CCW.
    return ((8 - facing.sector()) % 8) / 2;
}

}  // namespace

GridWorld::GridWorld(GridWorldConfig config) : config_(std::move(config)) {
    frame_mode_ = config_.frames;
    if (config_.start_heading_deg % 90 != 0) throw SchemaViolation("start.heading", "heading must be a multiple of 90");
    if (!free(config_.start)) throw SchemaViolation("start.cell", "robot must start on a free cell");
    if (!free(config_.target.cell)) throw SchemaViolation("target.cell", "target must be on a free cell");
    for (const auto& cam : config_.cameras) {
        if (cam.facing.sector() % 2 != 0) throw SchemaViolation("cameras." + cam.id + ".facing", "grid cameras face quarter turns");
    }
    reset(0);
}

void GridWorld::reset(std::uint64_t) {
    pose_ = {config_.start.x, config_.start.y, ((config_.start_heading_deg / 90) % 4 + 4) % 4};
    sense_counter_ = 0;
}

bool GridWorld::free(GridCell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < config_.width && c.y < config_.height && !config_.blocked.contains(c);
}

void GridWorld::set_pose(const GridPose& p) {
    if (!free({p.x, p.y}) || p.heading < 0 || p.heading > 3) throw Error("invalid grid pose");
    pose_ = p;
}

std::vector<std::string> GridWorld::supported_actions() const { return {"forward", "backward", "rotate_left", "rotate_right"}; }

DispatchAck GridWorld::dispatch(const ActionDef& action, const ParamValues&) {
    const auto& name = action.name;
    if (name == "rotate_left" || name == "rotate_right") {
        pose_.heading = (pose_.heading + (name == "rotate_left" ? 1 : 3)) % 4;
        return DispatchAck::ok("rotated 90 degrees " + std::string(name == "rotate_left" ? "left" : "right"));
    }
    if (name == "forward" || name == "backward") {
        const int sign = name == "forward" ? 1 : -1;
        const auto d = kHeadingDirs[static_cast<std::size_t>(pose_.heading)];
        const GridCell next{pose_.x + sign * d.x, pose_.y + sign * d.y};
        if (!free(next)) return DispatchAck::blocked("blocked: obstacle or boundary");
        pose_.x = next.x;
        pose_.y = next.y;
        return DispatchAck::ok(std::string("moved one cell ") + (sign > 0 ? "forward" : "backward"));
    }
    throw Error("gridworld cannot execute action " + name);
}

bool GridWorld::line_of_sight(GridCell from, GridCell to) const {
    const double dx = to.x - from.x, dy = to.y - from.y;
    const int samples = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)) * 4));
    for (int i = 1; i < samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const GridCell c{static_cast<int>(std::lround(from.x + dx * t)), static_cast<int>(std::lround(from.y + dy * t))};
        if (c == from || c == to) continue;
        if (config_.blocked.contains(c)) return false;
    }
    return true;
}

SymbolicScene GridWorld::scene_for(const CameraSpec& cam) const {
    const auto dir = kHeadingDirs[static_cast<std::size_t>((pose_.heading + camera_quarter_turns(cam.facing)) % 4)];
    SymbolicScene scene;
    const GridCell here{pose_.x, pose_.y};
    auto consider = [&](const GridEntity& e) {
        const double vx = e.cell.x - pose_.x, vy = e.cell.y - pose_.y;
        const double cells = std::hypot(vx, vy);
        if (cells == 0.0) return;
        const double meters = cells * config_.cell_size;
        if (meters > config_.view_distance + kAngleEps) return;
        const double cross = dir.x * vy - dir.y * vx;  // > 0: entity to the left
        const double dot = dir.x * vx + dir.y * vy;
        const double alpha = std::atan2(cross, dot) * 180.0 / kPi;
        if (!(alpha > -45.0 + kAngleEps && alpha <= 45.0 + kAngleEps)) return;
        if (!line_of_sight(here, e.cell)) return;
        SceneEntity s;
        s.label = e.label;
        s.bearing_in_frame = alpha > 15.0 + kAngleEps ? FrameBearing::left
                             : alpha < -15.0 - kAngleEps ? FrameBearing::right
                                                         : FrameBearing::center;
        s.apparent_size = meters <= config_.large_within + kAngleEps    ? ApparentSize::large
                          : meters <= config_.medium_within + kAngleEps ? ApparentSize::medium
                                                                        : ApparentSize::small;
        scene.push_back(std::move(s));
    };
    consider(config_.target);
    for (const auto& e : config_.entities) consider(e);
    return scene;
}

std::vector<CameraFrame> GridWorld::sense() const {
    ++sense_counter_;
    std::vector<CameraFrame> frames;
    for (const auto& cam : cameras()) frames.push_back(make_frame(cam, scene_for(cam)));
    return frames;
}

ProprioState GridWorld::proprio() const {
    ProprioState p;
    const double x = (pose_.x - config_.start.x) * config_.cell_size;
    const double y = (pose_.y - config_.start.y) * config_.cell_size;
    const int start_q = ((config_.start_heading_deg / 90) % 4 + 4) % 4;
    double heading = ((pose_.heading - start_q + 4) % 4) * 90.0;
    if (heading > 180.0) heading -= 360.0;
    p.joint_displacements = {{"x", x}, {"y", y}, {"heading", heading}};
    p.pose_estimate = PoseEstimate{x, y, heading};
    return p;
}

double GridWorld::distance_to_target() const {
    return std::hypot(pose_.x - config_.target.cell.x, pose_.y - config_.target.cell.y) * config_.cell_size;
}

bool GridWorld::success() const { return distance_to_target() <= config_.success_radius + kAngleEps; }

std::vector<CameraSpec> GridWorld::cameras() const {
    std::vector<CameraSpec> out;
    for (const auto& c : config_.cameras) {
        if (c.enabled) out.push_back(c);
    }
    return out;
}

std::vector<int> GridWorld::state() const { return {pose_.x, pose_.y, pose_.heading}; }

void GridWorld::set_state(std::span<const int> s) {
    if (s.size() != 3) throw Error("gridworld state has 3 components");
    set_pose({s[0], s[1], s[2]});
}

std::unique_ptr<RobotAdapter> GridWorld::clone() const { return std::make_unique<GridWorld>(*this); }

}  // namespace racas
