#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace latlab {

// Dimension d is a runtime quantity, so all dense types are dynamically
// sized. Real coordinates are doubles throughout.
using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A lattice point is carried as its integer coordinate vector z; the real
// point q + h*z is derived on demand. Equality and order on lattice points
// are exact integer operations, never float comparisons.
using LatticeIndex = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

inline bool same_index(const LatticeIndex& a, const LatticeIndex& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

// Componentwise partial order.
inline bool cw_leq(const LatticeIndex& a, const LatticeIndex& b) {
  return (a.array() <= b.array()).all();
}
inline bool cw_leq(const Vector& a, const Vector& b) {
  return (a.array() <= b.array()).all();
}

inline bool lex_less(const LatticeIndex& a, const LatticeIndex& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct LatticeIndexHash {
  std::size_t operator()(const LatticeIndex& z) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      std::uint64_t x = static_cast<std::uint64_t>(z[i]);
      x ^= x >> 30;
      x *= 0xBF58476D1CE4E5B9ull;
      x ^= x >> 27;
      h = (h ^ x) * 0x94D049BB133111EBull;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

struct LatticeIndexEq {
  bool operator()(const LatticeIndex& a, const LatticeIndex& b) const noexcept {
    return same_index(a, b);
  }
};

}  // namespace latlab
