#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "polymesh/types.hpp"

namespace polymesh {

using json = nlohmann::json;

json to_json_vec(const Vec& v);
json to_json_mat(const Mat& m);
json to_json_points(const PointCloud& points);

// These throw ParseError with `what` in the message on malformed input.
Vec vec_from_json(const json& j, const std::string& what);
Mat mat_from_json(const json& j, const std::string& what);
PointCloud points_from_json(const json& j, const std::string& what);

// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

json read_json_file(const std::string& path);
// Writes through a temporary file and renames it into place.
void write_text_atomic(const std::string& path, const std::string& text);
void write_json_atomic(const std::string& path, const json& j);

}  // namespace polymesh
