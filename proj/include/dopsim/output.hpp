#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dopsim {

/// Fixed 12-significant-digit rendering used for every CSV value.
std::string format_number(double value);

/// CSV with header time_s,value; sample i is at i * dt_s + t0_s.
void write_series_csv(std::ostream& out, std::span<const double> values, double dt_s, double t0_s = 0.0);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dopsim
