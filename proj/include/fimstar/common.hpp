#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fimstar {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Dense complex matrix, row-major. Dimensions here are tiny (M x K_RIS).
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<cd> data;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

    cd& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const cd& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace fimstar
