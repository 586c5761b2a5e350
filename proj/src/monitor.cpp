#include "racas/monitor.hpp"

#include "racas/error.hpp"
#include "racas/text.hpp"

#include <algorithm>

namespace racas {

std::string_view to_string(FrameBearing b) {
    switch (b) {
        case FrameBearing::left: return "left";
        case FrameBearing::center: return "center";
        case FrameBearing::right: return "right";
    }
    return "center";
}

std::string_view to_string(ApparentSize s) {
    switch (s) {
        case ApparentSize::small: return "small";
        case ApparentSize::medium: return "medium";
        case ApparentSize::large: return "large";
    }
    return "medium";
}

std::optional<FrameBearing> parse_frame_bearing(std::string_view s) {
    if (s == "left") return FrameBearing::left;
    if (s == "center") return FrameBearing::center;
    if (s == "right") return FrameBearing::right;
    return std::nullopt;
}

std::optional<ApparentSize> parse_apparent_size(std::string_view s) {
    if (s == "small") return ApparentSize::small;
    if (s == "medium") return ApparentSize::medium;
    if (s == "large") return ApparentSize::large;
    return std::nullopt;
}

CameraFrame make_raster_frame(std::string camera_id, const Raster& image, int timestamp,
                              const std::optional<std::string>& caption) {
    return {std::move(camera_id), EncodedImage{image.width(), image.height(), encode_png(image, caption)}, timestamp};
}

std::string describe_symbolic_scene(const SymbolicScene& scene) {
    if (scene.empty()) return "nothing visible";
    std::vector<std::string> parts;
    for (const auto& e : scene) {
        std::string p = e.label + " (" + std::string(to_string(e.bearing_in_frame)) + ", " +
                        std::string(to_string(e.apparent_size));
        if (e.occluded) p += ", partially occluded";
        parts.push_back(p + ")");
    }
    return text::join(parts, "; ");
}

MonitorObservation oracle_describe(const CameraFrame& frame, const VisualQuery& query) {
    if (!frame.is_symbolic()) throw Error("oracle_describe requires a symbolic frame");
    const auto& scene = frame.scene();
    if (scene.empty()) return {frame.camera_id, "No: nothing visible."};

    std::vector<std::string> hits;
    for (const auto& e : scene) {
        if (!text::contains_ci(query.text, e.label)) continue;
        std::string s = "Yes: " + e.label + " visible, " + std::string(to_string(e.bearing_in_frame)) +
                        " of frame, " + std::string(to_string(e.apparent_size));
        if (e.occluded) s += ", partially occluded";
        hits.push_back(s + ".");
    }
    if (!hits.empty()) return {frame.camera_id, text::join(hits, " ")};

    std::vector<std::string> seen;
    for (const auto& e : scene) {
        seen.push_back(e.label + " (" + std::string(to_string(e.bearing_in_frame)) + ", " +
                       std::string(to_string(e.apparent_size)) + ")");
    }
    return {frame.camera_id, "No: queried object not visible. Visible: " + text::join(seen, ", ") + "."};
}

std::string monitor_system_prompt(const std::string& camera_id) {
    return "You are a Monitor attached to the robot camera '" + camera_id +
           "'. Answer the Controller's visual question about the current view in one or two plain sentences. "
           "Say whether the asked-about object is visible and, if so, where in the frame it is and how large it "
           "appears. If it is not visible, say so and briefly list what is visible. Do not speculate beyond the "
           "image.";
}

Raster prepare_frame_image(const Raster& image, const std::string& camera_id, const MonitorOptions& options) {
    Raster out = image;
    if (const auto it = options.cameras.find(camera_id); it != options.cameras.end() && it->second.crop) {
        out = crop(out, *it->second.crop);
    }
    if (std::min(out.width(), out.height()) < options.upscale_threshold) {
        // Preserve the upscale precondition for sources already larger than the target along one axis.
        const Size target{std::max(options.upscale_target.width, out.width()),
                          std::max(options.upscale_target.height, out.height())};
        out = upscale(out, target, *options.upscaler);
    }
    return out;
}

MonitorObservation describe_scene(const CameraFrame& frame, const VisualQuery& query, ChatBackend& backend,
                                  const MonitorOptions& options) {
    std::vector<ChatMessage> messages{ChatMessage::system(monitor_system_prompt(frame.camera_id))};
    if (frame.is_symbolic()) {
        messages.push_back(ChatMessage::user("Question: " + query.text + "\nScene (camera " + frame.camera_id +
                                             "): " + describe_symbolic_scene(frame.scene())));
    } else {
        const auto& enc = frame.image();
        const auto raster = decode_png(enc.png);
        const auto prepared = prepare_frame_image(raster, frame.camera_id, options);
        Bytes png = prepared == raster ? enc.png : encode_png(prepared, png_caption(enc.png));
        messages.push_back(ChatMessage::user("Question: " + query.text, {std::move(png)}));
    }
    auto answer = std::string(text::trim(complete(messages, backend)));
    if (answer.empty()) throw BackendUnavailable("monitor backend returned blank text");
    return {frame.camera_id, std::move(answer)};
}

}  // namespace racas
