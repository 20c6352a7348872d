#pragma once

#include <cstdint>
#include <string>

#include "adpp/linalg.hpp"

namespace adpp {

// CSV: one row per item, numeric columns, optional header line.
Matrix load_csv(const std::string& path, bool header);

// Raw binary feature format: magic "ADPP", little-endian u32 n, u32 d, then
// n*d little-endian f32 values row-major.
Matrix load_f32bin(const std::string& path);
void save_f32bin(const std::string& path, const Matrix& points);

// Seeded 10-component Gaussian mixture in `dims` dimensions. Values are
// rounded through f32 so the generated dataset is identical to what a
// save/load round trip through the binary format would produce.
Matrix synthetic_gaussian_mixture(ItemIndex n, int dims, std::uint64_t seed,
                                  int components = 10);

}  // namespace adpp
