#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "accs/grid.hpp"
#include "accs/transforms.hpp"

namespace accs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace detail

/// Line-based `key = value` configuration with `#` comments and
/// comma-separated lists. Keys are consumed by the typed getters; any key
/// left unconsumed when finish() runs is an error, so misspelled options
/// never pass silently.
class Config {
public:
    static Config from_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected `key = value`, got: " + line);
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": duplicate key `" + key + "`");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config from_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << is.rdbuf();
        return from_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError(origin_ + ": missing required key `" + key + "`");
        consumed_.insert(key);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return get_string(key);
    }

    long long get_int(const std::string& key) { return parse_int(key, get_string(key)); }
    long long get_int(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        return get_int(key);
    }

    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key `" + key + "`: not an unsigned integer: " + v);
        }
    }

    double get_double(const std::string& key) { return parse_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return get_double(key);
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(origin_ + ": key `" + key + "`: not a boolean: " + v);
    }

    std::vector<long long> get_int_list(const std::string& key) {
        std::vector<long long> out;
        for (const auto& item : split_list(get_string(key), key))
            out.push_back(parse_int(key, item));
        return out;
    }
    std::vector<long long> get_int_list(const std::string& key,
                                        const std::vector<long long>& fallback) {
        if (!has(key)) return fallback;
        return get_int_list(key);
    }

    std::vector<double> get_double_list(const std::string& key) {
        std::vector<double> out;
        for (const auto& item : split_list(get_string(key), key))
            out.push_back(parse_double(key, item));
        return out;
    }
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) {
        if (!has(key)) return fallback;
        return get_double_list(key);
    }

    /// Errors out on any key that no getter asked for.
    void finish() const {
        std::vector<std::string> unknown;
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key)) unknown.push_back(key);
        if (!unknown.empty()) {
            std::string msg = origin_ + ": unknown key(s):";
            for (const auto& k : unknown) msg += " `" + k + "`";
            throw ConfigError(msg);
        }
    }

private:
    long long parse_int(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key `" + key + "`: not an integer: " + v);
        }
    }
    double parse_double(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key `" + key + "`: not a number: " + v);
        }
    }
    std::vector<std::string> split_list(const std::string& v, const std::string& key) const {
        std::vector<std::string> out;
        std::string item;
        std::istringstream is(v);
        while (std::getline(is, item, ',')) {
            item = detail::trim(item);
            if (item.empty())
                throw ConfigError(origin_ + ": key `" + key + "`: empty list element");
            out.push_back(item);
        }
        if (out.empty()) throw ConfigError(origin_ + ": key `" + key + "`: empty list");
        return out;
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
    std::string origin_;
};

/// Number formatting for CSV cells: shortest form at 10 significant digits.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

// ---------------------------------------------------------------------------
// k-space container (binary, little-endian)
//
//   magic  "ACSK"
//   u32    version (= 1)
//   u32    n1, n2, L, C, k
//   u8     flags (bit 0: B present)
//   u32[L]          omega indices
//   c128[L*C]       Y, re/im interleaved, column-major
//   c128[N*k]       B, column-major (only when flags bit 0)
// ---------------------------------------------------------------------------

struct KSpaceFile {
    GridShape shape;
    int k = 0;
    SamplingPattern omega;
    Eigen::MatrixXcd Y;
    std::optional<Eigen::MatrixXcd> B;
};

static_assert(std::endian::native == std::endian::little,
              "the k-space container assumes a little-endian host");

namespace detail {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const char* section) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw IoError(std::string("truncated k-space file: missing ") + section);
}

inline void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, &v, 4); }

inline std::uint32_t read_u32(std::istream& is, const char* section) {
    std::uint32_t v;
    read_bytes(is, &v, 4, section);
    return v;
}

} // namespace detail

inline void write_kspace(const std::string& path, const KSpaceFile& ks) {
    if (ks.Y.rows() != ks.omega.count())
        throw std::invalid_argument("write_kspace: Y rows must equal L");
    if (ks.B && (ks.B->rows() != ks.shape.size() || ks.B->cols() != ks.k))
        throw std::invalid_argument("write_kspace: B must be N x k");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    detail::write_bytes(os, "ACSK", 4);
    detail::write_u32(os, 1);
    detail::write_u32(os, static_cast<std::uint32_t>(ks.shape.n1));
    detail::write_u32(os, static_cast<std::uint32_t>(ks.shape.n2));
    detail::write_u32(os, static_cast<std::uint32_t>(ks.omega.count()));
    detail::write_u32(os, static_cast<std::uint32_t>(ks.Y.cols()));
    detail::write_u32(os, static_cast<std::uint32_t>(ks.k));
    const std::uint8_t flags = ks.B ? 1 : 0;
    detail::write_bytes(os, &flags, 1);
    for (int i : ks.omega.indices) detail::write_u32(os, static_cast<std::uint32_t>(i));
    detail::write_bytes(os, ks.Y.data(), sizeof(std::complex<double>) * ks.Y.size());
    if (ks.B) detail::write_bytes(os, ks.B->data(), sizeof(std::complex<double>) * ks.B->size());
    if (!os) throw IoError("write failed: " + path);
}

inline KSpaceFile read_kspace(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    detail::read_bytes(is, magic, 4, "magic");
    if (std::memcmp(magic, "ACSK", 4) != 0)
        throw IoError("bad magic in k-space file: " + path);
    const std::uint32_t version = detail::read_u32(is, "version");
    if (version != 1)
        throw IoError("unsupported k-space container version " + std::to_string(version));
    const auto n1 = detail::read_u32(is, "header");
    const auto n2 = detail::read_u32(is, "header");
    const auto L = detail::read_u32(is, "header");
    const auto C = detail::read_u32(is, "header");
    const auto k = detail::read_u32(is, "header");
    std::uint8_t flags;
    detail::read_bytes(is, &flags, 1, "flags");
    if (n1 < 1 || n2 < 1 || L < 1 || C < 1)
        throw IoError("k-space header has zero dimensions");

    KSpaceFile ks;
    ks.shape = GridShape(static_cast<int>(n1), static_cast<int>(n2));
    ks.k = static_cast<int>(k);
    std::vector<int> omega(L);
    for (auto& idx : omega)
        idx = static_cast<int>(detail::read_u32(is, "omega"));
    try {
        ks.omega = SamplingPattern(std::move(omega), ks.shape.size());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("invalid omega section: ") + e.what());
    }
    ks.Y.resize(L, C);
    detail::read_bytes(is, ks.Y.data(), sizeof(std::complex<double>) * ks.Y.size(), "Y");
    if (flags & 1) {
        Eigen::MatrixXcd B(ks.shape.size(), ks.k);
        detail::read_bytes(is, B.data(), sizeof(std::complex<double>) * B.size(), "B");
        ks.B = std::move(B);
    }
    return ks;
}

// ---------------------------------------------------------------------------
// PGM (binary P5, maxval 65535, big-endian samples per the netpbm format)
// ---------------------------------------------------------------------------

struct PgmImage {
    GridShape shape;            // n1 = height, n2 = width
    Eigen::VectorXd values;     // column-major, normalized to [0, 1]
};

/// Writes nonnegative magnitudes linearly scaled to [0, 65535].
inline void write_pgm16(const std::string& path, const GridShape& shape,
                        const Eigen::VectorXd& values) {
    if (values.size() != shape.size())
        throw std::invalid_argument("write_pgm16: value count does not match shape");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P5\n" << shape.n2 << " " << shape.n1 << "\n65535\n";
    const double vmax = values.maxCoeff();
    const double scale = vmax > 0 ? 65535.0 / vmax : 0.0;
    for (int r = 0; r < shape.n1; ++r) {
        for (int c = 0; c < shape.n2; ++c) {
            const double v = std::max(0.0, values(shape.flatten(r, c))) * scale;
            const auto q = static_cast<std::uint16_t>(std::lround(std::min(v, 65535.0)));
            const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                            static_cast<unsigned char>(q & 0xff)};
            os.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

inline PgmImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    auto next_token = [&is, &path]() {
        std::string tok;
        while (true) {
            int ch = is.get();
            if (ch == EOF) throw IoError("truncated PGM header: " + path);
            if (ch == '#') {
                while (ch != EOF && ch != '\n') ch = is.get();
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(ch));
        }
    };
    if (next_token() != "P5") throw IoError("not a binary PGM (P5) file: " + path);
    const int width = std::stoi(next_token());
    const int height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw IoError("bad PGM header in " + path);
    PgmImage img;
    img.shape = GridShape(height, width);
    img.values.resize(img.shape.size());
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * bytes_per);
    for (int r = 0; r < height; ++r) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (static_cast<std::size_t>(is.gcount()) != row.size())
            throw IoError("truncated PGM raster: " + path);
        for (int c = 0; c < width; ++c) {
            const unsigned v = bytes_per == 2
                                   ? (static_cast<unsigned>(row[2 * c]) << 8) | row[2 * c + 1]
                                   : row[c];
            img.values(img.shape.flatten(r, c)) = static_cast<double>(v) / maxval;
        }
    }
    return img;
}

} // namespace accs
