/**
 * @file io.hpp
 * @brief Rate-table cache files, result CSVs and run manifests
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbshare/rate_table.hpp"

namespace fbshare {

using json = nlohmann::json;

inline json to_json(const TableMeta& m) {
    json j = {{"m", m.m},
              {"streams", m.streams},
              {"codebook", to_string(m.codebook)},
              {"precoder", to_string(m.precoding)},
              {"stream_beam", to_string(m.stream_beam)},
              {"samples", m.samples},
              {"seed", m.seed},
              {"stream", m.stream}};
    j["co_user_bits"] = m.co_user_bits ? json(*m.co_user_bits) : json(nullptr);
    return j;
}

inline TableMeta meta_from_json(const json& j) {
    TableMeta m;
    m.m = j.at("m").get<std::size_t>();
    m.streams = j.at("streams").get<std::size_t>();
    m.codebook = parse_codebook(j.at("codebook").get<std::string>());
    m.precoding = parse_precoding(j.at("precoder").get<std::string>());
    m.stream_beam = parse_stream_beam(j.at("stream_beam").get<std::string>());
    m.samples = j.at("samples").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.stream = j.at("stream").get<std::uint64_t>();
    if (!j.at("co_user_bits").is_null()) m.co_user_bits = j.at("co_user_bits").get<int>();
    return m;
}

inline json to_json(const RateTable& t) {
    return {{"meta", to_json(t.meta)}, {"snr_db", t.snr_db},   {"bits", t.bits},
            {"rate", t.rate},          {"ci95", t.ci95},       {"degenerate", t.degenerate}};
}

inline RateTable table_from_json(const json& j) {
    RateTable t;
    t.meta = meta_from_json(j.at("meta"));
    t.snr_db = j.at("snr_db").get<std::vector<double>>();
    t.bits = j.at("bits").get<std::vector<int>>();
    t.rate = j.at("rate").get<std::vector<std::vector<double>>>();
    t.ci95 = j.at("ci95").get<std::vector<std::vector<double>>>();
    t.degenerate = j.value("degenerate", std::size_t{0});
    if (t.rate.size() != t.snr_db.size() || t.ci95.size() != t.snr_db.size())
        throw std::runtime_error("rate table rows do not match the SNR grid");
    for (std::size_t i = 0; i < t.rate.size(); ++i)
        if (t.rate[i].size() != t.bits.size() || t.ci95[i].size() != t.bits.size())
            throw std::runtime_error("rate table columns do not match the bit grid");
    return t;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

inline void save_rate_table(const RateTable& t, const std::filesystem::path& path) { write_json_file(path, to_json(t)); }

inline RateTable load_rate_table(const std::filesystem::path& path) { return table_from_json(read_json_file(path)); }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline json config_json(const TableConfig& cfg) {
    return {{"meta", to_json(cfg.meta)}, {"snr_db", cfg.snr_db}, {"max_bits", cfg.max_bits}};
}

inline std::string cache_key(const TableConfig& cfg) { return hex64(fnv1a(config_json(cfg).dump())); }

inline std::filesystem::path cache_path(const TableConfig& cfg, const std::filesystem::path& dir) {
    return dir / ("rate_table_" + cache_key(cfg) + ".json");
}

/// True when a stored table was built from exactly this configuration.
inline bool table_matches(const RateTable& t, const TableConfig& cfg) {
    if (!(t.meta == cfg.meta) || t.snr_db != cfg.snr_db) return false;
    if (t.bits.size() != static_cast<std::size_t>(cfg.max_bits + 1)) return false;
    for (std::size_t i = 0; i < t.bits.size(); ++i)
        if (t.bits[i] != static_cast<int>(i)) return false;
    return true;
}

/**
 * Returns the cached table for `cfg` if one exists under `dir` and matches,
 * otherwise builds it and writes the cache. `reused` reports which happened.
 */
inline RateTable load_or_build(const TableConfig& cfg, const std::filesystem::path& dir, bool* reused = nullptr) {
    const auto path = cache_path(cfg, dir);
    if (std::filesystem::exists(path)) {
        try {
            RateTable t = load_rate_table(path);
            if (table_matches(t, cfg)) {
                if (reused) *reused = true;
                return t;
            }
        } catch (const std::exception&) {
            // unreadable or stale cache: rebuild below
        }
    }
    RateTable t = build_rate_table(cfg);
    save_rate_table(t, path);
    if (reused) *reused = false;
    return t;
}

/// One plotted point.
struct CsvRow {
    double snr_db = 0.0;
    std::string series;
    double value = 0.0;
    double ci95 = 0.0;
};

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Quotes a field that contains a comma, quote or newline.
inline std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Splits one CSV line, honouring quoted fields.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "snr_db,series_label,value,ci95\n";
    for (const auto& r : rows)
        out << format_double(r.snr_db) << ',' << csv_field(r.series) << ',' << format_double(r.value) << ','
            << format_double(r.ci95) << '\n';
}

inline std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "snr_db,series_label,value,ci95") throw std::runtime_error("unexpected CSV header in " + path.string());
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) throw std::runtime_error("malformed CSV row in " + path.string());
        rows.push_back({std::stod(f[0]), f[1], std::stod(f[2]), std::stod(f[3])});
    }
    return rows;
}

}  // namespace fbshare
