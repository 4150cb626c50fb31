#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mcflab {

// CSV writer with a fixed column count.  Files are opened in binary mode so
// line endings are LF on every platform; numbers are printed with 17
// significant digits so a re-run reproduces the bytes exactly.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header);
  ~CsvWriter();

  void row(const std::vector<double>& values);
  // Mixed row; cells are written verbatim (caller formats numbers).
  void raw_row(const std::vector<std::string>& cells);
  void close();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

// Flat `key = value` files: config echoes and result sidecars.
void write_key_value(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, std::string>>& entries);
std::map<std::string, std::string> read_key_value(const std::filesystem::path& path);

// FNV-1a over the raw bytes of a file.
std::uint64_t checksum_file(const std::filesystem::path& path);

// A single run's output directory: every file produced is registered here and
// `finalize` writes a manifest listing each one with its content checksum.
class OutputSession {
 public:
  explicit OutputSession(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& name) const;

  // Register a file already written into the session directory.
  void note(const std::string& name);
  // Write verbatim text (binary mode) and register it.
  void write_text(const std::string& name, const std::string& content);
  void write_key_value_file(
      const std::string& name,
      const std::vector<std::pair<std::string, std::string>>& entries);
  // Companion gnuplot script for a CSV in this session: plots the listed
  // columns (1-based) against `x_column` into <csv stem>.png.
  void write_gnuplot(const std::string& csv_name, const std::string& title,
                     int x_column, const std::vector<int>& y_columns);

  // Writes manifest.txt (one "checksum  name" line per registered file,
  // sorted by name) and returns its path.
  std::filesystem::path finalize();

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct ManifestEntry {
  std::string checksum;
  std::string name;
};

// Parses a manifest written by OutputSession::finalize.  Throws
// std::runtime_error on malformed lines.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Re-checksums every file listed in the manifest against its recorded value.
// Returns the names of files that are missing or differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& path);

}  // namespace mcflab
