#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srcimg::io {

// Shortest form that still carries 17 significant digits ("%.17g").
std::string fmt17(double v);
std::vector<std::string> split(const std::string& s, char sep);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

// values[q*P + p]; CSV rows are q (ascending y), columns p (ascending x).
std::string matrix_csv_text(const std::vector<double>& values, size_t P, size_t Q);
void write_matrix_csv(const std::string& path, const std::vector<double>& values, size_t P, size_t Q);
std::vector<double> read_matrix_csv(const std::string& path, size_t& P, size_t& Q);

// Binary P5 image, maxval 255, linear min-max scaling floor(255 t); the first image row is
// q = Q-1 (largest y). A constant field maps to 128 everywhere.
std::vector<std::uint8_t> encode_pgm(const std::vector<double>& values, size_t P, size_t Q);
void write_pgm(const std::string& path, const std::vector<double>& values, size_t P, size_t Q);

}  // namespace srcimg::io
