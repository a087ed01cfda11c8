#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "ssc/error.hpp"

namespace ssc {

/// Small dense symmetric matrix; set() writes both triangles.
template <std::size_t N>
class SymMatrix {
public:
    static constexpr std::size_t dim = N;

    SymMatrix() { a_.fill(0.0); }

    double operator()(std::size_t i, std::size_t j) const { return a_[i * N + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        a_[i * N + j] = v;
        a_[j * N + i] = v;
    }

    SymMatrix operator+(const SymMatrix& o) const {
        SymMatrix r;
        for (std::size_t k = 0; k < N * N; ++k) r.a_[k] = a_[k] + o.a_[k];
        return r;
    }

    SymMatrix operator*(double s) const {
        SymMatrix r;
        for (std::size_t k = 0; k < N * N; ++k) r.a_[k] = a_[k] * s;
        return r;
    }

    bool operator==(const SymMatrix&) const = default;

private:
    std::array<double, N * N> a_;
};

template <std::size_t N>
struct Eigenvalues {
    std::array<double, N> values;  ///< ascending
    int sweeps = 0;

    double max() const { return values.back(); }
    double min() const { return values.front(); }
};

/// Cyclic Jacobi rotations until every off-diagonal magnitude is below 1e-12
/// (relative to the matrix scale when it exceeds one).
template <std::size_t N>
Eigenvalues<N> symmetric_eigenvalues(const SymMatrix<N>& m, int max_sweeps = 100) {
    std::array<std::array<double, N>, N> a{};
    double scale = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            a[i][j] = m(i, j);
            scale = std::max(scale, std::abs(a[i][j]));
        }
    const double threshold = 1e-12 * std::max(1.0, scale);

    Eigenvalues<N> out;
    for (int sweep = 0;; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off = std::max(off, std::abs(a[p][q]));
        if (off < threshold) {
            out.sweeps = sweep;
            break;
        }
        if (sweep >= max_sweeps) throw NumericalError("Jacobi eigenvalue iteration did not converge");

        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const double apq = a[p][q];
                if (apq == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < N; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = a[q][p] = 0.0;
            }
        }
    }
    for (std::size_t i = 0; i < N; ++i) out.values[i] = a[i][i];
    std::sort(out.values.begin(), out.values.end());
    return out;
}

struct SemidefiniteVerdict {
    bool negative_semidefinite;
    double lambda_max;
};

template <std::size_t N>
SemidefiniteVerdict is_negative_semidefinite(const SymMatrix<N>& m, double tol) {
    const double lmax = symmetric_eigenvalues(m).max();
    return {lmax <= tol, lmax};
}

}  // namespace ssc
