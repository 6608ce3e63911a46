#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "uot/problem.hpp"
#include "uot/rng.hpp"

namespace uot {

using AnyProblem = std::variant<Problem<float>, Problem<double>>;

// Deterministic random instance: one SplitMix64 stream seeded with `seed`
// fills A row-major (cast to the element type), then the row marginals, then
// the column marginals, all from (0,1]; er = ep = 1.
template <typename T>
Problem<T> gen_problem_t(std::uint64_t seed, std::size_t m, std::size_t n) {
  if (m < 1 || n < 1) throw InvalidParameter("gen_problem: matrix must be at least 1x1");
  SplitMix64 rng(seed);
  Problem<T> p;
  p.a = Matrix<T>(m, n);
  for (auto& v : p.a.data()) v = T(rng.next_unit());
  p.rpd.resize(m);
  for (auto& v : p.rpd) v = rng.next_unit();
  p.cpd.resize(n);
  for (auto& v : p.cpd) v = rng.next_unit();
  p.er = 1.0;
  p.ep = 1.0;
  return p;
}

AnyProblem gen_problem(std::uint64_t seed, std::size_t m, std::size_t n, Dtype dtype);

std::size_t problem_rows(const AnyProblem& p);
std::size_t problem_cols(const AnyProblem& p);
Dtype problem_dtype(const AnyProblem& p);

// Problem container file, little-endian throughout:
//   bytes 0..3   magic "UOTP"
//   bytes 4..5   u16 version (1)
//   bytes 6..7   u16 dtype  (1 = 32-bit float, 2 = 64-bit float)
//   bytes 8..15  u64 M
//   bytes 16..23 u64 N
//   bytes 24..31 f64 er
//   bytes 32..39 f64 ep
//   then A row-major (M*N elements at dtype), RPD (M f64), CPD (N f64).
// read_problem throws IoError on bad magic, unsupported version, an unknown
// dtype code, or a payload whose size disagrees with the header.
void write_problem(const std::filesystem::path& path, const AnyProblem& p);
AnyProblem read_problem(const std::filesystem::path& path);

}  // namespace uot
