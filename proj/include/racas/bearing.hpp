#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace racas {

// Relative direction of an object with respect to the robot's current pose,
// discretized into eight 45-degree sectors numbered clockwise from the front.
class Bearing {
public:
    static constexpr int kSectors = 8;

    constexpr Bearing() = default;
    // Any integer is accepted and wrapped into [0, 7].
    constexpr explicit Bearing(int sector) : sector_(wrap(sector)) {}

    static constexpr Bearing front() { return Bearing(0); }
    static constexpr Bearing front_right() { return Bearing(1); }
    static constexpr Bearing right() { return Bearing(2); }
    static constexpr Bearing back_right() { return Bearing(3); }
    static constexpr Bearing back() { return Bearing(4); }
    static constexpr Bearing back_left() { return Bearing(5); }
    static constexpr Bearing left() { return Bearing(6); }
    static constexpr Bearing front_left() { return Bearing(7); }

    constexpr int sector() const { return sector_; }
    constexpr Bearing shifted(int delta) const { return Bearing(sector_ + delta); }

    std::string_view name() const;
    static std::optional<Bearing> parse(std::string_view name);

    friend constexpr bool operator==(Bearing, Bearing) = default;

private:
    static constexpr int wrap(int s) { return ((s % kSectors) + kSectors) % kSectors; }
    int sector_ = 0;
};

enum class MotionKind : std::uint8_t {
    none,
    rotate_left,
    rotate_right,
    translate_left,
    translate_right,
    translate_forward,
    translate_backward,
};

std::string_view to_string(MotionKind kind);
std::optional<MotionKind> parse_motion_kind(std::string_view text);

// How an executed action moves the robot, as far as relative bearings care.
// rotation_sectors is only meaningful (and only non-zero) for rotations.
struct MotionEvent {
    MotionKind kind = MotionKind::none;
    int rotation_sectors = 0;

    static MotionEvent none() { return {}; }
    static MotionEvent rotate_left(int sectors) { return {MotionKind::rotate_left, sectors}; }
    static MotionEvent rotate_right(int sectors) { return {MotionKind::rotate_right, sectors}; }
    static MotionEvent translate(MotionKind k) { return {k, 0}; }

    bool valid() const;
    friend bool operator==(const MotionEvent&, const MotionEvent&) = default;
};

}  // namespace racas
