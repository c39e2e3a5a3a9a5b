#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace emm {

inline constexpr std::string_view kVersion = "1.0.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Provenance block embedded in every artifact. No timestamps, so equal
/// inputs give byte-identical files.
struct Provenance {
  std::string command;
  nlohmann::json parameters;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256

  void add_input(const std::filesystem::path& path);
  std::string input_sha256() const;  // hash over parameters and input hashes
  nlohmann::json to_json() const;
  /// `# key: value` comment lines for CSV artifacts.
  std::string csv_header() const;
};

/// Plain CSV with the provenance header; numbers use 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(const std::vector<std::string>& cells);
  void add_numbers(const std::vector<double>& cells);
  std::string str(const Provenance& prov) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace emm
