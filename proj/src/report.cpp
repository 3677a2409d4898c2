#include "occ/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace occ {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Json meta_json(const std::string& config_text, std::uint64_t seed) {
  Json j;
  j["config_hash"] = hash_hex(fnv1a64(config_text));
  j["seed"] = seed;
  return j;
}

CsvBuilder::CsvBuilder(const std::string& config_text, std::uint64_t seed) {
  body_ = "# config_hash=" + hash_hex(fnv1a64(config_text)) + " seed=" + std::to_string(seed) + "\n";
}

void CsvBuilder::header(const std::vector<std::string>& names) {
  n_cols_ = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    body_ += names[i];
    body_ += (i + 1 == names.size()) ? '\n' : ',';
  }
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
  if (n_cols_ != 0 && cells.size() != n_cols_) {
    throw PreconditionError("CsvBuilder: row width does not match header");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    body_ += cells[i];
    body_ += (i + 1 == cells.size()) ? '\n' : ',';
  }
}

void CsvBuilder::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (const double v : cells) s.push_back(format_double(v));
  row(s);
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("write_file: cannot open " + path);
  out << content;
  out.flush();
  if (!out) throw PreconditionError("write_file: short write to " + path);
}

void write_json_file(const std::string& path, const Json& j) {
  write_file(path, j.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("read_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace occ
