#include "emm/report.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "emm/error.hpp"
#include "emm/io.hpp"

namespace emm {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

void Provenance::add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), sha256_file(path)); }

std::string Provenance::input_sha256() const {
  std::string blob = command + '\n' + parameters.dump() + '\n';
  for (const auto& [path, hash] : inputs) blob += hash + '\n';
  return sha256_hex(blob);
}

nlohmann::json Provenance::to_json() const {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [path, hash] : inputs) in[path] = hash;
  return {{"tool", "emm"},
          {"version", std::string(kVersion)},
          {"command", command},
          {"input_sha256", input_sha256()},
          {"inputs", in},
          {"parameters", parameters}};
}

std::string Provenance::csv_header() const {
  std::string out = "# tool: emm " + std::string(kVersion) + "\n# command: " + command +
                    "\n# input_sha256: " + input_sha256() + "\n# parameters: " + parameters.dump() + "\n";
  for (const auto& [path, hash] : inputs) out += "# input: " + path + " " + hash + "\n";
  return out;
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw Error(ErrorCode::InvalidParameters, "CSV row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

void CsvTable::add_numbers(const std::vector<double>& cells) {
  std::vector<std::string> text;
  text.reserve(cells.size());
  for (double v : cells) text.push_back(format_real(v));
  add_row(text);
}

std::string CsvTable::str(const Provenance& prov) const {
  std::string out = prov.csv_header();
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& r : rows_) out += r + '\n';
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

}  // namespace emm
