#include "streamflow/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

static_assert(std::endian::native == std::endian::little, "binary sample format assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'F', 'L', 'W', '1', 0, 0, 0};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ConfigError("truncated SFLW1 file");
  return v;
}

}  // namespace

void write_samples_csv(std::ostream& os, double t, const Matrix& samples) {
  const auto old = os.precision(17);
  os << "t,row,dim,value\n";
  for (Eigen::Index r = 0; r < samples.rows(); ++r)
    for (Eigen::Index c = 0; c < samples.cols(); ++c) os << t << ',' << r << ',' << c << ',' << samples(r, c) << '\n';
  os.precision(old);
}

std::vector<std::pair<double, Matrix>> read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,row,dim,value")
    throw ConfigError("sample CSV must start with header t,row,dim,value");
  std::vector<double> order;
  std::map<double, std::map<std::pair<long, long>, double>> cells;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t, value;
    long row, dim;
    char c1, c2, c3;
    if (!(ls >> t >> c1 >> row >> c2 >> dim >> c3 >> value) || c1 != ',' || c2 != ',' || c3 != ',' || row < 0 ||
        dim < 0)
      throw ConfigError("malformed sample CSV line " + std::to_string(lineno));
    if (!cells.count(t)) order.push_back(t);
    cells[t][{row, dim}] = value;
  }
  std::vector<std::pair<double, Matrix>> out;
  for (double t : order) {
    const auto& entries = cells[t];
    long rows = 0, dims = 0;
    for (const auto& [key, v] : entries) {
      rows = std::max(rows, key.first + 1);
      dims = std::max(dims, key.second + 1);
    }
    if (static_cast<long>(entries.size()) != rows * dims)
      throw ConfigError("sample CSV block at t=" + format_time(t) + " is not a full rows x dims grid");
    Matrix m(rows, dims);
    for (const auto& [key, v] : entries) m(key.first, key.second) = v;
    out.emplace_back(t, std::move(m));
  }
  return out;
}

void write_samples_binary(std::ostream& os, const std::vector<double>& stops, const std::vector<Matrix>& samples) {
  if (stops.size() != samples.size()) throw DimensionError("one sample matrix per stop required");
  const Eigen::Index rows = samples.empty() ? 0 : samples.front().rows();
  const Eigen::Index dims = samples.empty() ? 0 : samples.front().cols();
  for (const auto& m : samples)
    if (m.rows() != rows || m.cols() != dims) throw DimensionError("all stops must share rows and dims");
  os.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(os, stops.size());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(rows));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(dims));
  for (std::size_t k = 0; k < stops.size(); ++k) {
    put<double>(os, stops[k]);
    // Eigen's default storage is column-major, matching the file layout.
    os.write(reinterpret_cast<const char*>(samples[k].data()),
             static_cast<std::streamsize>(sizeof(double) * rows * dims));
  }
}

std::vector<std::pair<double, Matrix>> read_samples_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ConfigError("not an SFLW1 sample file (bad magic)");
  const auto n_stops = take<std::uint64_t>(is);
  const auto rows = static_cast<Eigen::Index>(take<std::uint64_t>(is));
  const auto dims = static_cast<Eigen::Index>(take<std::uint64_t>(is));
  std::vector<std::pair<double, Matrix>> out;
  for (std::uint64_t k = 0; k < n_stops; ++k) {
    const double t = take<double>(is);
    Matrix m(rows, dims);
    if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * rows * dims)))
      throw ConfigError("truncated SFLW1 file");
    out.emplace_back(t, std::move(m));
  }
  return out;
}

std::string format_time(double t) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, t);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace streamflow
