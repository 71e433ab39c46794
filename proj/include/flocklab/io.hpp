#ifndef FLOCKLAB_IO_HPP
#define FLOCKLAB_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace flocklab {

// Deterministic CSV writer: fixed "%.12g" formatting so identical runs
// produce byte-identical files.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {
        std::string line;
        for (std::size_t i = 0; i < cols_.size(); ++i) {
            if (i) line += ',';
            line += cols_[i];
        }
        lines_.push_back(std::move(line));
    }

    void row(const std::vector<double>& vals) {
        if (vals.size() != cols_.size())
            throw std::invalid_argument("CsvWriter: column count mismatch");
        std::string line;
        char buf[40];
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) line += ',';
            std::snprintf(buf, sizeof buf, "%.12g", vals[i]);
            line += buf;
        }
        lines_.push_back(std::move(line));
    }

    std::string str() const {
        std::string out;
        for (const auto& l : lines_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path);
        f << str();
    }

  private:
    std::vector<std::string> cols_;
    std::vector<std::string> lines_;
};

// FNV-1a 64-bit over raw bytes; used for run artifacts and the
// determinism check.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t hash_string(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << content;
}

}  // namespace flocklab

#endif
