#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "isingmc/ising.hpp"

namespace isingmc {

/// Input file missing, unreadable or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Theta TSV: header "r<TAB>s<TAB>value", then one row per edge with 1-based
/// r < s. Omitted pairs are zero. When d is absent it is the largest vertex
/// id that appears.
Theta read_theta_tsv(const std::filesystem::path& path, std::optional<int> d = std::nullopt);
Theta parse_theta_tsv(std::string_view text, std::optional<int> d, const std::string& origin = "<memory>");
/// Nonzero entries only, unless include_zeros.
std::string format_theta_tsv(const Theta& theta, bool include_zeros = false);

/// Dataset CSV: one row per observation, d comma-separated entries of -1 or 1.
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(std::string_view text, const std::string& origin = "<memory>");
std::string format_dataset_csv(const Dataset& data);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

}  // namespace isingmc
