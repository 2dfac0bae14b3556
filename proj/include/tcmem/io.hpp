#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcmem/errors.hpp"

namespace tcmem {

inline constexpr const char* kVersion = "1.0.0";

// Full-precision decimal rendering; 17 significant digits round-trip doubles.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Accumulates CSV text with a fixed column count and '\n' line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) {
        append_cells(header);
    }

    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != width_)
            throw invalid_config("CsvWriter: row width does not match header");
        append_cells(cells);
    }

    const std::string& str() const { return text_; }

private:
    void append_cells(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t width_;
    std::string text_;
};

// Relative output paths are rooted at $TCMEM_OUTPUT_DIR when it is set.
inline std::filesystem::path resolve_output_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* base = std::getenv("TCMEM_OUTPUT_DIR"); base && *base)
            p = std::filesystem::path(base) / p;
    }
    return p;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);  // best effort
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw invalid_config("cannot open output file: " + path.string());
    out << content;
    out.flush();
    if (!out)
        throw invalid_config("failed while writing output file: " + path.string());
}

// Writes `content` to `path` plus a sidecar `<path>.provenance.json` holding
// the fully resolved run description, so the run can be reproduced from the
// sidecar alone. Deterministic: no timestamps or host data.
inline void write_with_provenance(const std::string& out_path, const std::string& content,
                                  const nlohmann::json& run_record) {
    const std::filesystem::path resolved = resolve_output_path(out_path);
    write_file(resolved, content);
    nlohmann::json sidecar = {
        {"tool", "tcmem"},
        {"version", kVersion},
        {"output", resolved.filename().string()},
    };
    sidecar.update(run_record);
    write_file(resolved.string() + ".provenance.json", sidecar.dump(2) + "\n");
}

}  // namespace tcmem
