#pragma once

#include "racas/core_model.hpp"
#include "racas/image.hpp"
#include "racas/monitor.hpp"
#include "racas/step_record.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace racas {

struct CameraSpec {
    std::string id;
    Bearing facing;          // mounting direction relative to the robot body
    bool enabled = true;
    Size resolution{640, 480};
    std::optional<Rect> crop;
};

enum class FrameMode { symbolic, raster };

// Hardware abstraction layer. The runner only ever talks to this contract.
class RobotAdapter {
public:
    virtual ~RobotAdapter() = default;

    virtual std::string kind() const = 0;
    virtual void reset(std::uint64_t seed) = 0;
    virtual DispatchAck dispatch(const ActionDef& action, const ParamValues& params) = 0;
    // One frame per enabled camera, in cameras() order.
    virtual std::vector<CameraFrame> sense() const = 0;
    virtual ProprioState proprio() const = 0;
    virtual bool success() const = 0;

    virtual std::vector<CameraSpec> cameras() const = 0;  // enabled cameras only
    virtual std::vector<std::string> supported_actions() const = 0;

    // Discrete state, used by the min-steps search.
    virtual std::vector<int> state() const = 0;
    virtual void set_state(std::span<const int> s) = 0;
    virtual std::unique_ptr<RobotAdapter> clone() const = 0;

    // Per-camera crop rectangles, for the monitor's preprocessing.
    MonitorOptions monitor_options() const;

protected:
    // Shared by the worlds: wraps a symbolic scene as a frame of the
    // configured kind.
    CameraFrame make_frame(const CameraSpec& cam, SymbolicScene scene) const;

    FrameMode frame_mode_ = FrameMode::symbolic;
    mutable int sense_counter_ = 0;
};

// Raster rendering of a symbolic scene: coloured boxes placed by in-frame
// bearing and sized by apparent size, captioned with the scene text.
Raster render_scene(const SymbolicScene& scene, Size resolution);

// Throws SchemaViolation naming the first action the adapter cannot execute.
void check_interface_supported(const RobotAdapter& adapter, const ActionInterface& interface);

// ---------------------------------------------------------------------------
// Ground robot on a 2-D occupancy grid; heading in 90-degree steps.

struct GridCell {
    int x = 0;
    int y = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct GridEntity {
    std::string label;
    GridCell cell;
};

struct GridWorldConfig {
    int width = 40;
    int height = 60;
    double cell_size = 0.5;      // meters per cell
    std::set<GridCell> blocked;
    GridCell start{0, 0};
    int start_heading_deg = 0;   // 0 faces +y; positive turns counter-clockwise
    GridEntity target;
    std::vector<GridEntity> entities;  // non-target scenery
    double success_radius = 1.0;       // meters
    double view_distance = 10.0;       // meters
    double large_within = 1.0;         // meters: apparent size bands
    double medium_within = 4.0;
    std::vector<CameraSpec> cameras;
    FrameMode frames = FrameMode::symbolic;
};

struct GridPose {
    int x = 0;
    int y = 0;
    int heading = 0;  // 0..3, quarter turns counter-clockwise from +y
    friend bool operator==(const GridPose&, const GridPose&) = default;
};

class GridWorld final : public RobotAdapter {
public:
    explicit GridWorld(GridWorldConfig config);

    std::string kind() const override { return "gridworld"; }
    void reset(std::uint64_t seed) override;
    DispatchAck dispatch(const ActionDef& action, const ParamValues& params) override;
    std::vector<CameraFrame> sense() const override;
    ProprioState proprio() const override;
    bool success() const override;
    std::vector<CameraSpec> cameras() const override;
    std::vector<std::string> supported_actions() const override;
    std::vector<int> state() const override;
    void set_state(std::span<const int> s) override;
    std::unique_ptr<RobotAdapter> clone() const override;

    const GridPose& pose() const { return pose_; }
    void set_pose(const GridPose& p);
    bool free(GridCell c) const;
    const GridWorldConfig& config() const { return config_; }
    // Symbolic scene one camera would report right now.
    SymbolicScene scene_for(const CameraSpec& cam) const;
    double distance_to_target() const;  // meters

private:
    bool line_of_sight(GridCell from, GridCell to) const;

    GridWorldConfig config_;
    GridPose pose_;
};

// ---------------------------------------------------------------------------
// Four-axis limb (horizontal, vertical, rotational, finger) with a
// per-camera visibility table over joint configurations.

inline constexpr std::array<std::string_view, 4> kLimbJoints = {"horizontal", "vertical", "rotational", "finger"};

struct JointRange {
    int min = -3;
    int max = 3;
};

struct LimbRegion {
    std::array<JointRange, 4> ranges;  // inclusive, per joint; defaults span everything
    bool contains(const std::array<int, 4>& joints) const;
};

struct LimbView {
    std::string camera;
    LimbRegion region;
    FrameBearing bearing = FrameBearing::center;
    ApparentSize size = ApparentSize::medium;
    bool occluded = false;
};

struct LimbEntity {
    std::string label;
    std::vector<LimbView> views;
};

struct LimbWorldConfig {
    std::array<JointRange, 4> ranges{};
    std::vector<CameraSpec> cameras;  // all mounted cameras; disabled ones never report
    std::vector<LimbEntity> entities;
    std::string target;
    FrameMode frames = FrameMode::symbolic;
};

class LimbWorld final : public RobotAdapter {
public:
    explicit LimbWorld(LimbWorldConfig config);

    std::string kind() const override { return "limb"; }
    void reset(std::uint64_t seed) override;
    DispatchAck dispatch(const ActionDef& action, const ParamValues& params) override;
    std::vector<CameraFrame> sense() const override;
    ProprioState proprio() const override;
    bool success() const override;
    std::vector<CameraSpec> cameras() const override;
    std::vector<std::string> supported_actions() const override;
    std::vector<int> state() const override;
    void set_state(std::span<const int> s) override;
    std::unique_ptr<RobotAdapter> clone() const override;

    const std::array<int, 4>& joints() const { return joints_; }
    void set_joints(const std::array<int, 4>& j);
    SymbolicScene scene_for(const std::string& camera_id) const;

private:
    LimbWorldConfig config_;
    std::array<int, 4> joints_{};
};

// ---------------------------------------------------------------------------
// ROV in a 3-D lattice tank; yaw in 45-degree steps.

struct TankCell {
    int x = 0;
    int y = 0;
    int z = 0;
};

struct TankEntity {
    std::string label;
    TankCell cell;
};

struct TankWorldConfig {
    int nx = 8;
    int ny = 5;
    int nz = 6;               // z = nz - 1 is the surface
    double cell_size = 0.25;  // meters
    TankCell start{1, 2, 5};
    int start_yaw = 0;        // 0..7, eighth turns counter-clockwise from +x
    TankEntity target;
    std::vector<TankEntity> entities;
    double success_radius = 0.25;   // meters
    double view_distance = 3.0;     // meters
    double min_elevation_deg = -30; // lower edge of the (cropped) view
    double max_elevation_deg = 45;
    double large_within = 0.5;
    double medium_within = 1.25;
    std::vector<CameraSpec> cameras;
    FrameMode frames = FrameMode::symbolic;
};

struct TankPose {
    int x = 0;
    int y = 0;
    int z = 0;
    int yaw = 0;
    friend bool operator==(const TankPose&, const TankPose&) = default;
};

class TankWorld final : public RobotAdapter {
public:
    explicit TankWorld(TankWorldConfig config);

    std::string kind() const override { return "tank"; }
    void reset(std::uint64_t seed) override;
    DispatchAck dispatch(const ActionDef& action, const ParamValues& params) override;
    std::vector<CameraFrame> sense() const override;
    ProprioState proprio() const override;
    bool success() const override;
    std::vector<CameraSpec> cameras() const override;
    std::vector<std::string> supported_actions() const override;
    std::vector<int> state() const override;
    void set_state(std::span<const int> s) override;
    std::unique_ptr<RobotAdapter> clone() const override;

    const TankPose& pose() const { return pose_; }
    void set_pose(const TankPose& p);
    bool in_bounds(int x, int y, int z) const;
    SymbolicScene scene_for(const CameraSpec& cam) const;

private:
    TankWorldConfig config_;
    TankPose pose_;
};

// ---------------------------------------------------------------------------
// Scenario files

// Builds an adapter from a scenario document; the "world" key selects the
// factory from a single registry table.
std::unique_ptr<RobotAdapter> make_adapter(const nlohmann::json& scenario);
std::unique_ptr<RobotAdapter> load_scenario(const std::filesystem::path& path);
std::vector<std::string> registered_world_kinds();

GridWorldConfig parse_gridworld(const nlohmann::json& j);
LimbWorldConfig parse_limb(const nlohmann::json& j);
TankWorldConfig parse_tank(const nlohmann::json& j);

// ---------------------------------------------------------------------------

// Breadth-first search from the adapter's current state over the interface's
// actions; length of the shortest action sequence reaching success().
// Throws Unreachable if no success state can be reached.
int min_steps_oracle(const RobotAdapter& adapter, const ActionInterface& interface,
                     std::size_t max_states = 5'000'000);

const ActionDef& random_policy_step(const ActionInterface& interface, std::mt19937_64& rng);

}  // namespace racas
