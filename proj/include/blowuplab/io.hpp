#pragma once

#include <string>
#include <vector>

#include "blowuplab/profiles.hpp"

namespace blowuplab::io {

std::string version();

/// FNV-1a 64-bit digest as 16 hex digits.
std::string config_hash(const std::string& canonical);

/// Shortest round-trip decimal form.
std::string fmt_double(double v);

/// Comment line carried by every output file.
std::string header_comment(const std::string& hash);

/// Writes to a temporary sibling and renames it over path.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
    /// Header comment, column row, then one line per row.
    std::string str(const std::string& hash) const;
};

std::string profile_csv(const profiles::PhaseProfile& q, const std::string& hash);
/// Parses a profile CSV written by profile_csv onto the given space (grids must agree).
profiles::PhaseProfile parse_profile_csv(const std::string& text, const profiles::SpacePtr& sp);

}  // namespace blowuplab::io
