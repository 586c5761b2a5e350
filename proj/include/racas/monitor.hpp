#pragma once

#include "racas/image.hpp"
#include "racas/llm_backend.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace racas {

enum class FrameBearing { left, center, right };
enum class ApparentSize { small, medium, large };

std::string_view to_string(FrameBearing b);
std::string_view to_string(ApparentSize s);
std::optional<FrameBearing> parse_frame_bearing(std::string_view s);
std::optional<ApparentSize> parse_apparent_size(std::string_view s);

struct SceneEntity {
    std::string label;
    FrameBearing bearing_in_frame = FrameBearing::center;
    ApparentSize apparent_size = ApparentSize::medium;
    bool occluded = false;

    friend bool operator==(const SceneEntity&, const SceneEntity&) = default;
};

using SymbolicScene = std::vector<SceneEntity>;

// Encoded raster (PNG bytes) with its dimensions.
struct EncodedImage {
    int width = 0;
    int height = 0;
    Bytes png;
    friend bool operator==(const EncodedImage&, const EncodedImage&) = default;
};

// I_t^(c): one camera's view at one step, either a raster or a symbolic scene.
struct CameraFrame {
    std::string camera_id;
    std::variant<EncodedImage, SymbolicScene> content;
    int timestamp = 0;

    bool is_symbolic() const { return std::holds_alternative<SymbolicScene>(content); }
    const SymbolicScene& scene() const { return std::get<SymbolicScene>(content); }
    const EncodedImage& image() const { return std::get<EncodedImage>(content); }
};

CameraFrame make_raster_frame(std::string camera_id, const Raster& image, int timestamp,
                              const std::optional<std::string>& caption = {});

struct VisualQuery {
    std::string text;
};

struct MonitorObservation {
    std::string camera_id;
    std::string text;
};

// Text rendering of a symbolic scene, used as the PNG caption of rendered
// frames and as the text payload when a model monitors a symbolic frame.
std::string describe_symbolic_scene(const SymbolicScene& scene);

// Deterministic stand-in for the vision model. Templates:
//   "Yes: <label> visible, <left|center|right> of frame, <size>[, partially occluded]."
//   "No: queried object not visible. Visible: <label> (<bearing>, <size>), ..."
//   "No: nothing visible."
MonitorObservation oracle_describe(const CameraFrame& frame, const VisualQuery& query);

struct CameraOptions {
    std::optional<Rect> crop;
};

struct MonitorOptions {
    int upscale_threshold = 512;  // upscale when min(width, height) < threshold
    Size upscale_target{768, 768};
    std::shared_ptr<const Upscaler> upscaler = std::make_shared<BilinearUpscaler>();
    std::map<std::string, CameraOptions> cameras;
};

// Raster preprocessing applied before the model sees a frame: optional
// per-camera crop, then upscaling when the image is below the threshold.
Raster prepare_frame_image(const Raster& image, const std::string& camera_id, const MonitorOptions& options);

// Language-conditioned VQA for one camera. Raster frames go to the backend
// as PNG; symbolic frames are described to the backend as text.
MonitorObservation describe_scene(const CameraFrame& frame, const VisualQuery& query, ChatBackend& backend,
                                  const MonitorOptions& options = {});

std::string monitor_system_prompt(const std::string& camera_id);

}  // namespace racas
