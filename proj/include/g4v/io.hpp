#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace g4v {

// 64-bit FNV-1a digest.
std::uint64_t fnv1a(const std::string& data);
std::string hex_digest(std::uint64_t h);

// Shortest round-trip representation of a double; "nan"/"inf" spelled out.
std::string format_number(double x);

// RFC 4180 table: header plus rows of pre-formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Sidecar <stem>.meta.json next to an artifact.
void write_metadata(const std::filesystem::path& artifact, const std::string& experiment,
                    const std::string& config_hash, std::uint64_t seed);

}  // namespace g4v
