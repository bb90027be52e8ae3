#pragma once

#include <stdexcept>
#include <string>

namespace accs {

/// Rectangular grid of n1 rows by n2 columns (n2 == 1 for 1-D signals).
/// Grids are flattened column-major: index = i1 + n1 * i2.
struct GridShape {
    int n1 = 1;
    int n2 = 1;

    GridShape() = default;
    GridShape(int rows, int cols) : n1(rows), n2(cols) {
        if (n1 < 1 || n2 < 1)
            throw std::invalid_argument("GridShape: dimensions must be positive, got " +
                                        std::to_string(n1) + "x" + std::to_string(n2));
    }

    int size() const { return n1 * n2; }
    bool is_1d() const { return n2 == 1; }

    int flatten(int i1, int i2) const { return i1 + n1 * i2; }
    void unflatten(int idx, int& i1, int& i2) const {
        i1 = idx % n1;
        i2 = idx / n1;
    }

    bool operator==(const GridShape& o) const { return n1 == o.n1 && n2 == o.n2; }
    bool operator!=(const GridShape& o) const { return !(*this == o); }
};

} // namespace accs
