#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace basinlab::output {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

struct WrittenFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes;
};

/// Collects data files for one run and writes the manifest last.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);

  /// Writes `content` to dir/name atomically (temp file + rename). Throws
  /// std::runtime_error on I/O failure.
  void write(const std::string& name, const std::string& content);
  const std::vector<WrittenFile>& files() const noexcept { return files_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// manifest.json: `extra` merged with the file checksums.
  void write_manifest(nlohmann::json extra);

 private:
  std::filesystem::path dir_;
  std::vector<WrittenFile> files_;
};

}  // namespace basinlab::output
