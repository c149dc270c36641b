#pragma once

#include "strb/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace strb::io {

namespace fs = std::filesystem;

/// Binary container: "STRB", u32 version, u8 ndims, u64 dims[ndims], then
/// little-endian f64 values with the first index fastest.
inline constexpr std::uint32_t kContainerVersion = 1;

struct ArrayData {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

void write_array(const fs::path& path, const ArrayData& data);
ArrayData read_array(const fs::path& path);

void write_matrix(const fs::path& path, const linalg::Matrix& m);
linalg::Matrix read_matrix(const fs::path& path);
void write_vector(const fs::path& path, const linalg::Vector& v);
linalg::Vector read_vector(const fs::path& path);
void write_tensor(const fs::path& path, const linalg::Tensor3& t);
linalg::Tensor3 read_tensor(const fs::path& path);

/// Matrix Market coordinate real general.
void write_matrix_market(const fs::path& path, const linalg::SparseMatrix& s);
linalg::SparseMatrix read_matrix_market(const fs::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t h);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace strb::io
