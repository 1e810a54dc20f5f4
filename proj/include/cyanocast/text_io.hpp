#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cyanocast/errors.hpp"

namespace cyano {

// Shortest round-trip decimal form. Every float the pipeline writes goes
// through here so that rerunning a stage yields byte-identical artifacts.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    double value = 0;
    const char* first = text.data();
    const auto res = std::from_chars(first, first + text.size(), value);
    if (res.ec != std::errc() || res.ptr != first + text.size())
        throw DataError("not a number: '" + std::string(text) + "'");
    return value;
}

inline long parse_long(std::string_view text) {
    long value = 0;
    const char* first = text.data();
    const auto res = std::from_chars(first, first + text.size(), value);
    if (res.ec != std::errc() || res.ptr != first + text.size())
        throw DataError("not an integer: '" + std::string(text) + "'");
    return value;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                          s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write-to-temp-then-rename so readers never observe a half-written file.
inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename " + tmp.string() + " to " +
                            path.string() + ": " + ec.message());
}

}  // namespace cyano
