#include "g4v/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace g4v {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width differs from header");
  rows_.push_back(std::move(cells));
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out += ',';
    out += quote(cells[k]);
  }
  out += "\r\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_metadata(const std::filesystem::path& artifact, const std::string& experiment,
                    const std::string& config_hash, std::uint64_t seed) {
  nlohmann::json meta;
  meta["artifact"] = artifact.filename().string();
  meta["experiment"] = experiment;
  meta["config_hash"] = config_hash;
  meta["seed"] = seed;
  meta["version"] = G4V_VERSION;
  std::filesystem::path side = artifact;
  side.replace_extension(".meta.json");
  write_json(side, meta);
}

}  // namespace g4v
