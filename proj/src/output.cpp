#include "dopsim/output.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "dopsim/errors.hpp"

namespace dopsim {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // fold -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_series_csv(std::ostream& out, std::span<const double> values, double dt_s, double t0_s) {
  out << "time_s,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_number(t0_s + static_cast<double>(i) * dt_s) << ',' << format_number(values[i]) << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace dopsim
