#include "srcimg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "srcimg/errors.hpp"

namespace srcimg::io {

std::string fmt17(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    auto out = open_out(path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string matrix_csv_text(const std::vector<double>& values, size_t P, size_t Q) {
    if (values.size() != P * Q) throw ArgumentError("matrix size does not match P*Q");
    std::string s;
    s.reserve(P * Q * 24);
    for (size_t q = 0; q < Q; ++q) {
        for (size_t p = 0; p < P; ++p) {
            if (p) s.push_back(',');
            s += fmt17(values[q * P + p]);
        }
        s.push_back('\n');
    }
    return s;
}

void write_matrix_csv(const std::string& path, const std::vector<double>& values, size_t P, size_t Q) {
    write_text(path, matrix_csv_text(values, P, Q));
}

std::vector<double> read_matrix_csv(const std::string& path, size_t& P, size_t& Q) {
    std::istringstream is(read_text(path));
    std::string line;
    std::vector<double> v;
    P = 0;
    Q = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (Q == 0) P = f.size();
        else if (f.size() != P) throw IoError(path + ": ragged row " + std::to_string(Q));
        for (const auto& x : f) {
            double d = 0.0;
            auto r = std::from_chars(x.data(), x.data() + x.size(), d);
            if (r.ec != std::errc()) throw IoError(path + ": bad number '" + x + "'");
            v.push_back(d);
        }
        ++Q;
    }
    return v;
}

std::vector<std::uint8_t> encode_pgm(const std::vector<double>& values, size_t P, size_t Q) {
    if (values.size() != P * Q) throw ArgumentError("matrix size does not match P*Q");
    for (double x : values)
        if (!std::isfinite(x)) throw NumericalError("cannot write a non-finite field as PGM");
    std::string head = "P5\n" + std::to_string(P) + " " + std::to_string(Q) + "\n255\n";
    std::vector<std::uint8_t> out(head.begin(), head.end());
    double lo = 0.0, hi = 0.0;
    if (!values.empty()) {
        auto [a, b] = std::minmax_element(values.begin(), values.end());
        lo = *a;
        hi = *b;
    }
    for (size_t r = 0; r < Q; ++r) {
        const size_t q = Q - 1 - r;
        for (size_t p = 0; p < P; ++p) {
            if (hi <= lo) {
                out.push_back(128);
                continue;
            }
            const double t = (values[q * P + p] - lo) / (hi - lo);
            out.push_back(static_cast<std::uint8_t>(std::clamp(std::floor(255.0 * t), 0.0, 255.0)));
        }
    }
    return out;
}

void write_pgm(const std::string& path, const std::vector<double>& values, size_t P, size_t Q) {
    write_bytes(path, encode_pgm(values, P, Q));
}

}  // namespace srcimg::io
