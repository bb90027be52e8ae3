#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace accs {

namespace detail {

// splitmix64 finalizer; used both as a mixing step and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace detail

/// Deterministically combine a master seed with integer coordinates
/// (experiment cell, trial index, ...) into a derived stream seed.
template <typename... Ints>
std::uint64_t seed_mix(std::uint64_t master, Ints... parts) {
    std::uint64_t h = detail::splitmix64(master);
    ((h = detail::splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(detail::splitmix64(seed));
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2),
/// so E|w|^2 = 1.
inline std::complex<double> complex_gaussian(std::mt19937_64& eng) {
    static constexpr double kScale = 0.7071067811865476; // 1/sqrt(2)
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(eng);
    const double im = nd(eng);
    return {kScale * re, kScale * im};
}

inline Eigen::VectorXcd complex_gaussian_vector(int n, std::mt19937_64& eng) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = complex_gaussian(eng);
    return v;
}

inline Eigen::MatrixXcd complex_gaussian_matrix(int rows, int cols, std::mt19937_64& eng) {
    Eigen::MatrixXcd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = complex_gaussian(eng);
    return m;
}

} // namespace accs
