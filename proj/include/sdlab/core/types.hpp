#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdlab/core/error.hpp"

namespace sdlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMaxDim = 6;
inline constexpr int kMaxColumns = 30;

/// A value with its one-sigma standard error (`error`); exact results carry 0.
/// `degenerate` is set when the underlying set has dimension below n.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool degenerate = false;
};

/// The n x N matrix [x_1 ... x_N] of column vectors.
///
/// Entries are finite and 1 <= n <= 6, 1 <= N <= 30; construction throws
/// DimensionError otherwise.
class Matrix {
public:
    explicit Matrix(Mat m) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() > kMaxDim)
            throw DimensionError("matrix row count n=" + std::to_string(m_.rows()) +
                                 " outside [1, 6]");
        if (m_.cols() < 1 || m_.cols() > kMaxColumns)
            throw DimensionError("matrix column count N=" + std::to_string(m_.cols()) +
                                 " outside [1, 30]");
        if (!m_.allFinite()) throw DimensionError("matrix has non-finite entries");
    }

    static Matrix from_columns(const std::vector<Vec>& cols) {
        if (cols.empty()) throw DimensionError("matrix needs at least one column");
        Mat m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i].size() != m.rows())
                throw DimensionError("columns of unequal length");
            m.col(static_cast<Eigen::Index>(i)) = cols[i];
        }
        return Matrix(std::move(m));
    }

    int n() const noexcept { return static_cast<int>(m_.rows()); }
    int N() const noexcept { return static_cast<int>(m_.cols()); }
    Vec column(int i) const { return m_.col(i); }
    const Mat& data() const noexcept { return m_; }

private:
    Mat m_;
};

inline Vec unit(int n, int i) {
    Vec v = Vec::Zero(n);
    v(i) = 1.0;
    return v;
}

} // namespace sdlab
