#pragma once

// Private JSON bindings shared by the manifest writers.

#include <json.hpp>

#include "stereodiff/error.hpp"
#include "stereodiff/frame_matrix.hpp"

namespace stereodiff {

NLOHMANN_JSON_SERIALIZE_ENUM(TrajectoryKind, {
    {TrajectoryKind::LinearBaseline, "linear-baseline"},
    {TrajectoryKind::Spiral, "spiral"},
})

inline void to_json(nlohmann::json& j, const CameraOffset& c)
{
    j = {{"baseline_offset", c.baseline_offset}, {"vertical_offset", c.vertical_offset}, {"focal_px", c.focal_px}};
}

inline void from_json(const nlohmann::json& j, CameraOffset& c)
{
    c.baseline_offset = j.at("baseline_offset").get<double>();
    c.vertical_offset = j.value("vertical_offset", 0.0);
    c.focal_px = j.at("focal_px").get<double>();
}

inline void to_json(nlohmann::json& j, const Trajectory& t)
{
    j = {{"kind", t.kind}, {"views", t.views}};
}

inline void from_json(const nlohmann::json& j, Trajectory& t)
{
    t.kind = j.at("kind").get<TrajectoryKind>();
    t.views = j.at("views").get<std::vector<CameraOffset>>();
}

/// Parses JSON text, mapping parse failures onto the library's error type.
inline nlohmann::json parse_json(const std::string& text, const std::string& what)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, what + ": " + e.what());
    }
}

}  // namespace stereodiff
