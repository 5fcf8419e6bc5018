#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pom/analysis.hpp"

namespace pom::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 12 significant digits, '.' separator, independent of the locale.
std::string format_number(double v);

// "min:max:steps"; scale multiplies both bounds (pi for angle axes).
Axis parse_axis(const std::string& name, const std::string& text, double scale = 1.0);

// Flat object with ProtocolConfig keys; angles in units of pi. Unknown keys
// throw InvalidArgument.
void apply_config_json(const nlohmann::json& j, ProtocolConfig& config);
ProtocolConfig load_config_file(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string write_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);

CsvTable scan_table(const ScanGrid& g, double axis_scale = 1.0);

}  // namespace pom::cli
