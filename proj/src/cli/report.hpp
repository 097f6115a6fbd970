#pragma once

// JSON/CSV rendering shared by the subcommands.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ebshrink::cli {

using Json = nlohmann::ordered_json;

// Quantized to 12 significant digits; null when not finite.
Json number(double v);
Json number(const std::optional<double>& v);

// Lower-case hex SHA-256 of the file's bytes.
std::string sha256_file(const std::filesystem::path& path);

std::string render_json(const Json& j);

// CSV with the manifest as a leading '#' comment line.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& add(const std::string& text);
  CsvTable& add(double v);
  CsvTable& add(const std::optional<double>& v);
  CsvTable& add_count(unsigned long long v);

  std::string render(const Json& manifest) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// A named output; `name` is a file name, or "-" for the primary stream.
struct Output {
  std::string name;
  std::string content;
};

}  // namespace ebshrink::cli
