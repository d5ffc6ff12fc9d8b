#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gemqp {

/// Seeded random source with a fixed, implementation-independent mapping
/// from engine output to doubles, so equal seeds reproduce equal streams
/// bit for bit. std::*_distribution is avoided on purpose: its output is
/// implementation-defined.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi_v<double> * u2);
    }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gemqp
