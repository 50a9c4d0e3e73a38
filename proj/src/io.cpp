#include "blowuplab/io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

namespace blowuplab::io {

std::string version() { return BLOWUPLAB_VERSION; }

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

std::string header_comment(const std::string& hash) {
    return fmt::format("# blowuplab {} config {}\n", version(), hash);
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError(fmt::format("cannot open {} for writing", tmp.string()));
        out << content;
        if (!out) throw ConfigError(fmt::format("write failed for {}", tmp.string()));
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read {}", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void CsvTable::add(std::vector<double> row) {
    if (row.size() != columns.size())
        throw ConfigError(fmt::format("csv row has {} fields, expected {}", row.size(), columns.size()));
    rows.push_back(std::move(row));
}

std::string CsvTable::str(const std::string& hash) const {
    std::string out = header_comment(hash);
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += "\r\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + fmt_double(r[c]);
        out += "\r\n";
    }
    return out;
}

std::string profile_csv(const profiles::PhaseProfile& q, const std::string& hash) {
    CsvTable t{{"chi", "y", "w1", "w2"}, {}};
    const auto& sp = *q.space;
    for (int j = 0; j < sp.n(); ++j) t.add({sp.grid().chi(j), sp.y()[j], q.w1[j], q.w2[j]});
    return t.str(hash);
}

profiles::PhaseProfile parse_profile_csv(const std::string& text, const profiles::SpacePtr& sp) {
    profiles::PhaseProfile q = profiles::PhaseProfile::zero(sp);
    std::istringstream in(text);
    std::string line;
    int j = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "chi,y,w1,w2") throw ConfigError("profile csv: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        if (j >= sp->n()) throw ConfigError("profile csv: more rows than grid nodes");
        double v[4];
        std::istringstream ls(line);
        std::string field;
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ls, field, ',')) throw ConfigError(fmt::format("profile csv: short row {}", j));
            v[c] = std::stod(field);
        }
        if (std::abs(v[0] - sp->grid().chi(j)) > 1e-9 * (1.0 + std::abs(v[0])))
            throw ConfigError(fmt::format("profile csv: chi mismatch at row {}", j));
        q.w1[j] = v[2];
        q.w2[j] = v[3];
        ++j;
    }
    if (j != sp->n()) throw ConfigError(fmt::format("profile csv: {} rows for {} nodes", j, sp->n()));
    return q;
}

}  // namespace blowuplab::io
