#include "mcflab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mcflab/common.hpp"

namespace mcflab {

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
  raw_row(header);
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt17(v));
  raw_row(cells);
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::invalid_argument("CsvWriter: row has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(columns_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("CsvWriter: write failed for " + path_.string());
}

void CsvWriter::close() {
  if (out_.is_open()) {
    out_.close();
    if (!out_) throw std::runtime_error("CsvWriter: close failed for " + path_.string());
  }
}

void write_key_value(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_key_value: cannot open " + path.string());
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out) throw std::runtime_error("write_key_value: write failed for " + path.string());
}

std::map<std::string, std::string> read_key_value(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_key_value: cannot open " + path.string());
  std::map<std::string, std::string> result;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const std::size_t a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("read_key_value: " + path.string() + ":" +
                               std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::runtime_error("read_key_value: " + path.string() + ":" +
                               std::to_string(lineno) + ": empty key");
    result[key] = trim(t.substr(eq + 1));
  }
  return result;
}

std::uint64_t checksum_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checksum_file: cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

OutputSession::OutputSession(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path OutputSession::path_for(const std::string& name) const {
  return dir_ / name;
}

void OutputSession::note(const std::string& name) {
  if (!std::filesystem::exists(dir_ / name))
    throw std::runtime_error("OutputSession: noted file missing: " + name);
  if (std::find(files_.begin(), files_.end(), name) == files_.end())
    files_.push_back(name);
}

void OutputSession::write_text(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("OutputSession: cannot open " + name);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("OutputSession: write failed for " + name);
  note(name);
}

void OutputSession::write_key_value_file(
    const std::string& name,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  write_key_value(dir_ / name, entries);
  note(name);
}

void OutputSession::write_gnuplot(const std::string& csv_name,
                                  const std::string& title, int x_column,
                                  const std::vector<int>& y_columns) {
  const std::string stem = std::filesystem::path(csv_name).stem().string();
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set grid\n"
    << "set title '" << title << "'\n"
    << "set terminal pngcairo size 960,640\n"
    << "set output '" << stem << ".png'\n"
    << "plot ";
  for (std::size_t i = 0; i < y_columns.size(); ++i) {
    if (i) s << ", \\\n     ";
    s << "'" << csv_name << "' using " << x_column << ":" << y_columns[i]
      << " with lines";
  }
  s << '\n';
  write_text(stem + ".gp", s.str());
}

std::filesystem::path OutputSession::finalize() {
  std::vector<std::string> names = files_;
  std::sort(names.begin(), names.end());
  std::ostringstream s;
  for (const std::string& name : names) {
    const std::uint64_t h = checksum_file(dir_ / name);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    s << hex << "  " << name << '\n';
  }
  const std::filesystem::path mpath = dir_ / "manifest.txt";
  std::ofstream out(mpath, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("OutputSession: cannot open manifest.txt");
  out << s.str();
  out.close();
  if (!out) throw std::runtime_error("OutputSession: manifest write failed");
  return mpath;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_manifest: cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t sep = line.find("  ");
    if (sep == std::string::npos || sep != 16 || line.size() <= 18)
      throw std::runtime_error("read_manifest: " + path.string() + ":" +
                               std::to_string(lineno) + ": malformed line");
    const std::string checksum = line.substr(0, 16);
    if (checksum.find_first_not_of("0123456789abcdef") != std::string::npos)
      throw std::runtime_error("read_manifest: " + path.string() + ":" +
                               std::to_string(lineno) + ": bad checksum");
    entries.push_back({checksum, line.substr(18)});
  }
  return entries;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& path) {
  const std::vector<ManifestEntry> entries = read_manifest(path);
  const std::filesystem::path dir = path.parent_path();
  std::vector<std::string> bad;
  for (const ManifestEntry& e : entries) {
    const std::filesystem::path f = dir / e.name;
    if (!std::filesystem::exists(f)) {
      bad.push_back(e.name);
      continue;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(checksum_file(f)));
    if (e.checksum != hex) bad.push_back(e.name);
  }
  return bad;
}

}  // namespace mcflab
