#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "srm/linear_map.hpp"

namespace srm {

/// Shortest round-trip decimal form (std::to_chars), so emitted CSV is
/// byte-stable across runs and platforms.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    if (r.ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, r.ptr);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// One decimal value per line; blank lines and '#' comments skipped.
inline Vec read_vector_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    Vec v;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        char* end = nullptr;
        const double x = std::strtod(line.c_str() + start, &end);
        if (end == line.c_str() + start)
            throw std::runtime_error("malformed number in " + path + ": '" + line + "'");
        v.push_back(x);
    }
    return v;
}

inline void write_vector_csv(const std::string& path, const Vec& v,
                             const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    for (double x : v) out << format_double(x) << "\n";
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace srm
