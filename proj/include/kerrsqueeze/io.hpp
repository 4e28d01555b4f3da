// io.hpp
// Locale-independent number formatting, small CSV tables, atomic file writes,
// git-style content hashes and plot-data emission for the command-line tool.

#pragma once

#include "kerrsqueeze/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace kerrsqueeze::io {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr int kSignificantDigits = 12;

// Decimal, 12 significant digits, '.' radix.
inline std::string format_number(double v, int digits = kSignificantDigits) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        v = 0.0; // drop the sign of -0
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
    if (ec != std::errc()) {
        throw Error("number formatting failed");
    }
    return std::string(buf.data(), end);
}

// Shortest round-trip form, used in file names such as mc_cubic_0.05.csv.
inline std::string format_short(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) {
        throw Error("number formatting failed");
    }
    return std::string(buf.data(), end);
}

inline double parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (s == "inf" || s == "-inf") {
        return s.front() == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw ConfigError("CSV has no column '" + std::string(name) + "'");
    }

    bool has_column(std::string_view name) const {
        return std::find(header.begin(), header.end(), name) != header.end();
    }
};

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.emplace_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        out += (i ? "," : "") + t.header[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline Table parse_csv(std::string_view text, std::string_view origin = "CSV") {
    Table t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split_fields(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            try {
                row.push_back(parse_number(f));
            } catch (const ConfigError& e) {
                throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) {
        throw ConfigError(std::string(origin) + " is empty");
    }
    if (t.rows.empty()) {
        throw ConfigError(std::string(origin) + " has a header but no data rows");
    }
    return t;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Writes to a sibling temporary file and renames it over the target.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
inline std::string git_blob_hash(std::string_view content) {
    const std::string prefix = "blob " + std::to_string(content.size()) + '\0';
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, prefix.data(), prefix.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) {
        throw Error("SHA-1 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

inline bool is_mc_table(const Table& t) {
    return t.has_column("mean_xi") && t.has_column("sigma_plus") && t.has_column("sigma_minus");
}

// Long form: x, series, value.  Monte Carlo tables become lower/mean/upper.
inline std::string tidy_csv(const Table& t) {
    std::ostringstream os;
    os << "x,series,value\n";
    const std::string xname = t.header.front();
    if (is_mc_table(t)) {
        const std::size_t m = t.column("mean_xi");
        const std::size_t sp = t.column("sigma_plus");
        const std::size_t sm = t.column("sigma_minus");
        for (const auto& row : t.rows) {
            os << format_number(row[0]) << ",lower," << format_number(row[m] - row[sm]) << '\n';
            os << format_number(row[0]) << ",mean," << format_number(row[m]) << '\n';
            os << format_number(row[0]) << ",upper," << format_number(row[m] + row[sp]) << '\n';
        }
        return os.str();
    }
    for (const auto& row : t.rows) {
        for (std::size_t c = 1; c < t.header.size(); ++c) {
            os << format_number(row[0]) << ',' << t.header[c] << ',' << format_number(row[c]) << '\n';
        }
    }
    return os.str();
}

struct SvgFrame {
    double width = 640.0;
    double height = 400.0;
    double margin = 48.0;
};

namespace detail {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!(lo < hi)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

inline std::string point(const SvgFrame& f, const Range& xr, const Range& yr, double x, double y) {
    const double px = f.margin + (x - xr.lo) / (xr.hi - xr.lo) * (f.width - 2 * f.margin);
    const double py = f.height - f.margin - (y - yr.lo) / (yr.hi - yr.lo) * (f.height - 2 * f.margin);
    return format_number(px, 6) + "," + format_number(py, 6);
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

} // namespace detail

// One polyline per series, or for Monte Carlo tables a band between
// mean - sigma_minus and mean + sigma_plus with the mean on top.
inline std::string svg(const Table& t, const SvgFrame& frame = {}) {
    static constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                                        "#9467bd", "#ff7f0e", "#8c564b"};
    detail::Range xr;
    detail::Range yr;
    const bool mc = is_mc_table(t);
    std::size_t m = 0;
    std::size_t sp = 0;
    std::size_t sm = 0;
    if (mc) {
        m = t.column("mean_xi");
        sp = t.column("sigma_plus");
        sm = t.column("sigma_minus");
    }
    for (const auto& row : t.rows) {
        xr.include(row[0]);
        if (mc) {
            yr.include(row[m] - row[sm]);
            yr.include(row[m] + row[sp]);
        } else {
            for (std::size_t c = 1; c < row.size(); ++c) {
                yr.include(row[c]);
            }
        }
    }
    xr.pad();
    yr.pad();

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(frame.width, 6) << "\" height=\""
       << format_number(frame.height, 6) << "\">\n";
    os << "<rect x=\"" << format_number(frame.margin, 6) << "\" y=\"" << format_number(frame.margin, 6)
       << "\" width=\"" << format_number(frame.width - 2 * frame.margin, 6) << "\" height=\""
       << format_number(frame.height - 2 * frame.margin, 6) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << format_number(frame.width / 2, 6) << "\" y=\"" << format_number(frame.height - 12, 6)
       << "\" text-anchor=\"middle\">" << detail::escape(t.header.front()) << " [" << format_number(xr.lo, 4)
       << ", " << format_number(xr.hi, 4) << "]</text>\n";
    os << "<text x=\"4\" y=\"" << format_number(frame.margin - 8, 6) << "\">y [" << format_number(yr.lo, 4) << ", "
       << format_number(yr.hi, 4) << "]</text>\n";

    if (mc) {
        os << "<polygon class=\"band\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (const auto& row : t.rows) {
            os << detail::point(frame, xr, yr, row[0], row[m] + row[sp]) << ' ';
        }
        for (auto it = t.rows.rbegin(); it != t.rows.rend(); ++it) {
            os << detail::point(frame, xr, yr, (*it)[0], (*it)[m] - (*it)[sm]) << ' ';
        }
        os << "\"/>\n";
        os << "<polyline class=\"series\" data-series=\"mean_xi\" fill=\"none\" stroke=\"#1f77b4\" "
              "stroke-dasharray=\"6,3\" points=\"";
        for (const auto& row : t.rows) {
            os << detail::point(frame, xr, yr, row[0], row[m]) << ' ';
        }
        os << "\"/>\n";
    } else {
        for (std::size_t c = 1; c < t.header.size(); ++c) {
            os << "<polyline class=\"series\" data-series=\"" << detail::escape(t.header[c])
               << "\" fill=\"none\" stroke=\"" << kColors[(c - 1) % kColors.size()] << "\" points=\"";
            for (const auto& row : t.rows) {
                if (std::isfinite(row[c])) {
                    os << detail::point(frame, xr, yr, row[0], row[c]) << ' ';
                }
            }
            os << "\"/>\n";
            os << "<text x=\"" << format_number(frame.width - frame.margin + 4, 6) << "\" y=\""
               << format_number(frame.margin + 14.0 * static_cast<double>(c), 6) << "\" fill=\""
               << kColors[(c - 1) % kColors.size()] << "\" font-size=\"10\">" << detail::escape(t.header[c])
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace kerrsqueeze::io
