#include "racas/bearing.hpp"

#include <array>

namespace racas {

namespace {

constexpr std::array<std::string_view, Bearing::kSectors> kSectorNames = {
    "front", "front-right", "right", "back-right", "back", "back-left", "left", "front-left"};

constexpr std::array<std::pair<MotionKind, std::string_view>, 7> kMotionNames = {{
    {MotionKind::none, "none"},
    {MotionKind::rotate_left, "rotate_left"},
    {MotionKind::rotate_right, "rotate_right"},
    {MotionKind::translate_left, "translate_left"},
    {MotionKind::translate_right, "translate_right"},
    {MotionKind::translate_forward, "translate_forward"},
    {MotionKind::translate_backward, "translate_backward"},
}};

}  // namespace

std::string_view Bearing::name() const { return kSectorNames[static_cast<std::size_t>(sector_)]; }

std::optional<Bearing> Bearing::parse(std::string_view name) {
    for (std::size_t i = 0; i < kSectorNames.size(); ++i) {
        if (kSectorNames[i] == name) return Bearing(static_cast<int>(i));
    }
    return std::nullopt;
}

std::string_view to_string(MotionKind kind) {
    for (const auto& [k, n] : kMotionNames) {
        if (k == kind) return n;
    }
    return "none";
}

std::optional<MotionKind> parse_motion_kind(std::string_view text) {
    for (const auto& [k, n] : kMotionNames) {
        if (n == text) return k;
    }
    return std::nullopt;
}

bool MotionEvent::valid() const {
    const bool rotation = kind == MotionKind::rotate_left || kind == MotionKind::rotate_right;
    if (rotation) return rotation_sectors > 0;
    return rotation_sectors == 0;
}

}  // namespace racas
