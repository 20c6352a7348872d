#include "adpp/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "adpp/errors.hpp"
#include "adpp/random.hpp"

namespace adpp {

Matrix load_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (first && header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
      } catch (const std::exception&) {
        throw IngestError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
      }
    }
    if (row.empty()) continue;
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw IngestError(path + ":" + std::to_string(lineno) + ": ragged row (" +
                        std::to_string(row.size()) + " vs " + std::to_string(width) + " columns)");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IngestError(path + ": no data rows");
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<ItemIndex>(i), static_cast<ItemIndex>(j)) = rows[i][j];
  return m;
}

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'D', 'P', 'P'};

std::uint32_t read_u32_le(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const std::array<unsigned char, 4> b = {
      static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b.data()), 4);
}

}  // namespace

Matrix load_f32bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw IngestError(path + ": bad magic, expected ADPP");
  const std::uint32_t n = read_u32_le(in);
  const std::uint32_t d = read_u32_le(in);
  if (!in) throw IngestError(path + ": truncated header");
  std::vector<float> buf(static_cast<std::size_t>(n) * d);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw IngestError(path + ": truncated payload");
  static_assert(sizeof(float) == 4);
  Matrix m(n, d);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j)
      m(i, j) = static_cast<double>(buf[static_cast<std::size_t>(i) * d + j]);
  return m;
}

void save_f32bin(const std::string& path, const Matrix& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path);
  out.write(kMagic.data(), 4);
  write_u32_le(out, static_cast<std::uint32_t>(points.rows()));
  write_u32_le(out, static_cast<std::uint32_t>(points.cols()));
  for (ItemIndex i = 0; i < points.rows(); ++i)
    for (ItemIndex j = 0; j < points.cols(); ++j) {
      const float v = static_cast<float>(points(i, j));
      out.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  if (!out) throw IngestError("write failed for " + path);
}

Matrix synthetic_gaussian_mixture(ItemIndex n, int dims, std::uint64_t seed, int components) {
  if (n < 0 || dims <= 0 || components <= 0)
    throw ConfigError("synthetic_gaussian_mixture: invalid shape");
  RandomStream centers_rng = RandomStream::keyed(seed, 0xC0FFEE);
  Matrix centers(components, dims);
  for (int c = 0; c < components; ++c)
    for (int j = 0; j < dims; ++j) centers(c, j) = 10.0 * centers_rng.normal();

  Matrix points(n, dims);
  for (ItemIndex i = 0; i < n; ++i) {
    RandomStream rng = RandomStream::keyed(seed, static_cast<std::uint64_t>(i), 0xDA7A);
    const int c = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(components)));
    for (int j = 0; j < dims; ++j) {
      const double v = centers(c, j) + rng.normal();
      points(i, j) = static_cast<double>(static_cast<float>(v));
    }
  }
  return points;
}

}  // namespace adpp
