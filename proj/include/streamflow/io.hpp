#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "streamflow/types.hpp"

namespace streamflow {

// Long-format sample table. Header: t,row,dim,value
void write_samples_csv(std::ostream& os, double t, const Matrix& samples);
// Returns (t, samples) per distinct t in order of first appearance.
std::vector<std::pair<double, Matrix>> read_samples_csv(std::istream& is);

// Binary column format, little-endian:
//   8 bytes  magic "SFLW1\0\0\0"
//   uint64   n_stops, rows, dims
//   per stop: float64 t, then dims columns of rows float64 each
void write_samples_binary(std::ostream& os, const std::vector<double>& stops, const std::vector<Matrix>& samples);
std::vector<std::pair<double, Matrix>> read_samples_binary(std::istream& is);

// Shortest round-trip text for a time value, used in file names ("0.5", "1").
std::string format_time(double t);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

}  // namespace streamflow
