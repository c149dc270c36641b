#include "strb/io.hpp"

#include "strb/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace strb::io {

static_assert(std::endian::native == std::endian::little, "little-endian host assumed");

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const fs::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw ConfigError("truncated container: " + path.string());
  return v;
}

}  // namespace

void write_array(const fs::path& path, const ArrayData& data) {
  std::uint64_t count = 1;
  for (auto d : data.dims) count *= d;
  if (count != data.values.size()) throw DimensionError("write_array: dims/value count mismatch");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path.string());
  os.write("STRB", 4);
  put(os, kContainerVersion);
  put(os, static_cast<std::uint8_t>(data.dims.size()));
  for (auto d : data.dims) put(os, d);
  os.write(reinterpret_cast<const char*>(data.values.data()),
           static_cast<std::streamsize>(data.values.size() * sizeof(double)));
  if (!os) throw ConfigError("write failed: " + path.string());
}

ArrayData read_array(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "STRB", 4) != 0)
    throw ConfigError("bad magic in " + path.string());
  const auto version = get<std::uint32_t>(is, path);
  if (version != kContainerVersion) throw ConfigError("unsupported container version in " + path.string());
  const auto nd = get<std::uint8_t>(is, path);
  ArrayData out;
  std::uint64_t count = 1;
  for (int k = 0; k < nd; ++k) {
    out.dims.push_back(get<std::uint64_t>(is, path));
    count *= out.dims.back();
  }
  out.values.resize(count);
  if (!is.read(reinterpret_cast<char*>(out.values.data()),
               static_cast<std::streamsize>(count * sizeof(double))))
    throw ConfigError("truncated payload in " + path.string());
  return out;
}

void write_matrix(const fs::path& path, const linalg::Matrix& m) {
  ArrayData d{{static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
              std::vector<double>(m.data(), m.data() + m.size())};
  write_array(path, d);
}

linalg::Matrix read_matrix(const fs::path& path) {
  const auto d = read_array(path);
  if (d.dims.size() != 2) throw ConfigError("expected a 2-d array in " + path.string());
  linalg::Matrix m(static_cast<linalg::Index>(d.dims[0]), static_cast<linalg::Index>(d.dims[1]));
  std::copy(d.values.begin(), d.values.end(), m.data());
  return m;
}

void write_vector(const fs::path& path, const linalg::Vector& v) {
  write_array(path, {{static_cast<std::uint64_t>(v.size())},
                     std::vector<double>(v.data(), v.data() + v.size())});
}

linalg::Vector read_vector(const fs::path& path) {
  const auto d = read_array(path);
  if (d.dims.size() != 1) throw ConfigError("expected a 1-d array in " + path.string());
  linalg::Vector v(static_cast<linalg::Index>(d.dims[0]));
  std::copy(d.values.begin(), d.values.end(), v.data());
  return v;
}

void write_tensor(const fs::path& path, const linalg::Tensor3& t) {
  const auto dims = t.dims();
  write_array(path, {{static_cast<std::uint64_t>(dims[0]), static_cast<std::uint64_t>(dims[1]),
                      static_cast<std::uint64_t>(dims[2])},
                     t.values()});
}

linalg::Tensor3 read_tensor(const fs::path& path) {
  auto d = read_array(path);
  if (d.dims.size() != 3) throw ConfigError("expected a 3-d array in " + path.string());
  linalg::Tensor3 t(static_cast<linalg::Index>(d.dims[0]), static_cast<linalg::Index>(d.dims[1]),
                    static_cast<linalg::Index>(d.dims[2]));
  t.values() = std::move(d.values);
  return t;
}

void write_matrix_market(const fs::path& path, const linalg::SparseMatrix& s) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path.string());
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << s.rows() << ' ' << s.cols() << ' ' << s.nonZeros() << '\n';
  os << std::setprecision(17);
  for (linalg::Index k = 0; k < s.outerSize(); ++k)
    for (linalg::SparseMatrix::InnerIterator it(s, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

linalg::SparseMatrix read_matrix_market(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    throw ConfigError("unsupported Matrix Market header in " + path.string());
  while (std::getline(is, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream hdr(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(hdr >> rows >> cols >> nnz)) throw ConfigError("bad size line in " + path.string());
  std::vector<linalg::Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw ConfigError("truncated entries in " + path.string());
    if (i < 1 || i > rows || j < 1 || j > cols) throw ConfigError("index out of range in " + path.string());
    t.emplace_back(i - 1, j - 1, v);
  }
  return linalg::from_triplets(rows, cols, t);
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) { return fnv1a(s.data(), s.size(), seed); }

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open: " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path.string());
  os << text;
}

}  // namespace strb::io
