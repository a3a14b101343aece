#ifndef PEXLAB_FOCK_IO_HPP
#define PEXLAB_FOCK_IO_HPP

// Binary dump of assembled operators for caching between runs.
// Layout (little-endian):
//   bytes 0..3   magic "PXF1"
//   u32          format version (1)
//   u32          flags: bit 0 hermitian, bit 1 skew-hermitian
//   u64 x3       rows, cols, nnz
//   nnz records  { u64 row, u64 col, f64 re, f64 im }

#include <cstdint>
#include <cstring>
#include <fstream>

#include "pexlab/core.hpp"

namespace pexlab {

struct OperatorDump {
  SpMat mat;
  bool hermitian = false;
  bool skew_hermitian = false;
};

inline void dump_operator(const std::string& path, const SpMat& m,
                          bool hermitian = false, bool skew = false) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_operator: cannot open " + path);
  const char magic[4] = {'P', 'X', 'F', '1'};
  f.write(magic, 4);
  std::uint32_t version = 1, flags = (hermitian ? 1u : 0u) | (skew ? 2u : 0u);
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&flags), 4);
  std::uint64_t rows = m.rows(), cols = m.cols(), nnz = m.nonZeros();
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&cols), 8);
  f.write(reinterpret_cast<const char*>(&nnz), 8);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      std::uint64_t r = it.row(), c = it.col();
      double re = it.value().real(), im = it.value().imag();
      f.write(reinterpret_cast<const char*>(&r), 8);
      f.write(reinterpret_cast<const char*>(&c), 8);
      f.write(reinterpret_cast<const char*>(&re), 8);
      f.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!f) throw std::runtime_error("dump_operator: write failed for " + path);
}

inline OperatorDump load_operator(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_operator: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (std::memcmp(magic, "PXF1", 4) != 0)
    throw std::runtime_error("load_operator: bad magic in " + path);
  std::uint32_t version = 0, flags = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&flags), 4);
  if (version != 1)
    throw std::runtime_error("load_operator: unsupported version");
  std::uint64_t rows = 0, cols = 0, nnz = 0;
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&cols), 8);
  f.read(reinterpret_cast<char*>(&nnz), 8);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    std::uint64_t r, c;
    double re, im;
    f.read(reinterpret_cast<char*>(&r), 8);
    f.read(reinterpret_cast<char*>(&c), 8);
    f.read(reinterpret_cast<char*>(&re), 8);
    f.read(reinterpret_cast<char*>(&im), 8);
    trips.emplace_back((int)r, (int)c, cplx(re, im));
  }
  if (!f) throw std::runtime_error("load_operator: truncated file " + path);
  OperatorDump out;
  out.mat = SpMat(rows, cols);
  out.mat.setFromTriplets(trips.begin(), trips.end());
  out.hermitian = flags & 1u;
  out.skew_hermitian = flags & 2u;
  return out;
}

}  // namespace pexlab

#endif
