#include "uot/problem_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "uot/error.hpp"

namespace uot {

namespace {

constexpr char kMagic[4] = {'U', 'O', 'T', 'P'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 40;

void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) b.push_back((v >> s) & 0xff);
}
void put_f64(std::vector<unsigned char>& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::vector<unsigned char>& b, float v) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
  for (int s = 0; s < 32; s += 8) b.push_back((u >> s) & 0xff);
}

std::uint16_t get_u16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
  return v;
}
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }
float get_f32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | p[k];
  return std::bit_cast<float>(v);
}

template <typename T>
void serialize(std::vector<unsigned char>& buf, const Problem<T>& p) {
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u16(buf, kVersion);
  put_u16(buf, std::uint16_t(dtype_of<T>));
  put_u64(buf, p.a.rows());
  put_u64(buf, p.a.cols());
  put_f64(buf, p.er);
  put_f64(buf, p.ep);
  for (const T v : p.a.data()) {
    if constexpr (std::is_same_v<T, float>) put_f32(buf, v);
    else put_f64(buf, v);
  }
  for (const double v : p.rpd) put_f64(buf, v);
  for (const double v : p.cpd) put_f64(buf, v);
}

template <typename T>
Problem<T> deserialize(const std::vector<unsigned char>& buf, std::uint64_t m, std::uint64_t n,
                       double er, double ep) {
  Problem<T> p;
  p.a = Matrix<T>(m, n);
  const unsigned char* cur = buf.data() + kHeaderBytes;
  for (auto& v : p.a.data()) {
    if constexpr (std::is_same_v<T, float>) { v = get_f32(cur); cur += 4; }
    else { v = get_f64(cur); cur += 8; }
  }
  p.rpd.resize(m);
  for (auto& v : p.rpd) { v = get_f64(cur); cur += 8; }
  p.cpd.resize(n);
  for (auto& v : p.cpd) { v = get_f64(cur); cur += 8; }
  p.er = er;
  p.ep = ep;
  return p;
}

}  // namespace

AnyProblem gen_problem(std::uint64_t seed, std::size_t m, std::size_t n, Dtype dtype) {
  if (dtype == Dtype::f32) return gen_problem_t<float>(seed, m, n);
  return gen_problem_t<double>(seed, m, n);
}

std::size_t problem_rows(const AnyProblem& p) {
  return std::visit([](const auto& q) { return q.a.rows(); }, p);
}
std::size_t problem_cols(const AnyProblem& p) {
  return std::visit([](const auto& q) { return q.a.cols(); }, p);
}
Dtype problem_dtype(const AnyProblem& p) {
  return std::holds_alternative<Problem<float>>(p) ? Dtype::f32 : Dtype::f64;
}

void write_problem(const std::filesystem::path& path, const AnyProblem& p) {
  std::vector<unsigned char> buf;
  std::visit([&](const auto& q) { serialize(buf, q); }, p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_problem: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw IoError("write_problem: short write to " + path.string());
}

AnyProblem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("read_problem: cannot open " + path.string());
  const std::uint64_t file_size = std::uint64_t(in.tellg());
  in.seekg(0);
  if (file_size < kHeaderBytes) throw IoError("read_problem: truncated header");

  std::vector<unsigned char> buf(file_size);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(file_size));
  if (!in) throw IoError("read_problem: short read from " + path.string());

  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw IoError("read_problem: bad magic");
  const std::uint16_t version = get_u16(buf.data() + 4);
  if (version != kVersion)
    throw IoError("read_problem: unsupported version " + std::to_string(version));
  const std::uint16_t dtype_code = get_u16(buf.data() + 6);
  if (dtype_code != 1 && dtype_code != 2)
    throw IoError("read_problem: unknown dtype code " + std::to_string(dtype_code));
  const std::uint64_t m = get_u64(buf.data() + 8);
  const std::uint64_t n = get_u64(buf.data() + 16);
  if (m < 1 || n < 1) throw IoError("read_problem: matrix must be at least 1x1");
  const double er = get_f64(buf.data() + 24);
  const double ep = get_f64(buf.data() + 32);

  // Header-driven size check before touching the payload; catches truncation
  // and absurd extents in one comparison (128-bit to dodge overflow).
  const std::size_t elem = dtype_code == 1 ? 4 : 8;
  const unsigned __int128 expected =
      (unsigned __int128)kHeaderBytes + (unsigned __int128)m * n * elem +
      (unsigned __int128)8 * (m + n);
  if ((unsigned __int128)file_size != expected)
    throw IoError("read_problem: payload size does not match header extents");

  if (dtype_code == 1) return deserialize<float>(buf, m, n, er, ep);
  return deserialize<double>(buf, m, n, er, ep);
}

}  // namespace uot
