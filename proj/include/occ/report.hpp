// Deterministic report emission: every artifact (CSV or JSON) embeds the seed and a hash
// of the generating configuration, uses fixed 17-significant-digit number formatting, and
// is written whole-file so failed jobs leave no partial outputs.
#ifndef OCC_REPORT_HPP
#define OCC_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "occ/common.hpp"

namespace occ {

using Json = nlohmann::ordered_json;

// FNV-1a 64-bit hash of the canonical configuration text.
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t h);

// {"config_hash": "...", "seed": seed} — prepended to every JSON report and embedded as a
// comment line in every CSV.
Json meta_json(const std::string& config_text, std::uint64_t seed);

// CSV accumulator with deterministic formatting.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::string& config_text, std::uint64_t seed);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);
  // Convenience: all-numeric row via format_double.
  void row(const std::vector<double>& cells);
  const std::string& str() const { return body_; }

 private:
  std::string body_;
  std::size_t n_cols_ = 0;
};

// Whole-file writers; create parent directories as needed.
void write_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const Json& j);
std::string read_file(const std::string& path);

}  // namespace occ

#endif  // OCC_REPORT_HPP
