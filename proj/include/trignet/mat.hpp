#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace trignet {

/// Dense row-major matrix of doubles. Rows or columns may be zero
/// (empty edge lists and wordless graphs produce 0-row operands).
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::runtime_error("Mat: negative dimension");
    }
    Mat(int r, int c, std::initializer_list<double> vals) : Mat(r, c) {
        if (vals.size() != data.size()) throw std::runtime_error("Mat: initializer size mismatch");
        std::copy(vals.begin(), vals.end(), data.begin());
    }

    static Mat zeros(int r, int c) { return Mat(r, c); }
    static Mat filled(int r, int c, double v) {
        Mat m(r, c);
        std::fill(m.data.begin(), m.data.end(), v);
        return m;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline std::string shape_str(const Mat& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

/// C = A * B. Throws on inner-dimension mismatch.
inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        throw std::runtime_error("matmul: shape mismatch " + shape_str(a) + " * " + shape_str(b));
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
        double* crow = c.data.data() + static_cast<size_t>(i) * c.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

}  // namespace trignet
