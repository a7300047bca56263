#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plurispec/errors.hpp"
#include "plurispec/version.hpp"

namespace plurispec {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Relative paths are rooted at PLURISPEC_OUT_DIR when it is set.
inline std::filesystem::path resolve_output_path(const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return path;
    if (const char* root = std::getenv("PLURISPEC_OUT_DIR")) return std::filesystem::path(root) / path;
    return path;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

// Streams rows to <path>.partial and renames on commit, so an interrupted or
// failed run leaves its partial output behind for inspection. Line endings are
// fixed to \n and doubles to %.17g, making reruns byte-identical.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path)
        : final_path_(resolve_output_path(path)), partial_path_(final_path_.string() + ".partial") {
        if (final_path_.has_parent_path())
            std::filesystem::create_directories(final_path_.parent_path());
        out_.open(partial_path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw config_error("cannot open output file " + partial_path_.string());
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(cells[i]);
        }
        out_ << '\n';
        out_.flush();
    }

    void commit() {
        out_.close();
        std::filesystem::rename(partial_path_, final_path_);
        committed_ = true;
    }

    const std::filesystem::path& path() const { return final_path_; }

    ~CsvWriter() {
        if (!committed_ && out_.is_open()) out_.close();
    }

private:
    std::filesystem::path final_path_;
    std::filesystem::path partial_path_;
    std::ofstream out_;
    bool committed_ = false;
};

// Every JSON report carries the artifact version and the fully resolved config.
inline nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    return j;
}

inline void write_json_report(const std::string& path, const nlohmann::json& j) {
    const auto final_path = resolve_output_path(path);
    if (final_path.has_parent_path())
        std::filesystem::create_directories(final_path.parent_path());
    const auto partial = final_path.string() + ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open output file " + partial);
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(partial, final_path);
}

} // namespace plurispec
