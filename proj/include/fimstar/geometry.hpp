#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fimstar/common.hpp"

namespace fimstar {

// Carrier wavelength kappa and wavenumber omega = 2*pi/kappa.
struct CarrierConfig {
    double wavelength_m = 0.0;
    double wavenumber = 0.0;

    static CarrierConfig from_wavelength(double wavelength_m) {
        require(wavelength_m > 0.0, "CarrierConfig: wavelength must be positive");
        return {wavelength_m, kTwoPi / wavelength_m};
    }

    static CarrierConfig from_frequency_hz(double frequency_hz) {
        require(frequency_hz > 0.0, "CarrierConfig: frequency must be positive");
        return from_wavelength(kSpeedOfLight / frequency_hz);
    }

    void validate() const {
        require(wavelength_m > 0.0 && wavenumber > 0.0, "CarrierConfig: fields must be positive");
        require(std::abs(wavenumber * wavelength_m - kTwoPi) <= 1e-12,
                "CarrierConfig: wavenumber * wavelength must equal 2*pi");
    }
};

// Uniform planar array on the x-z plane. Element m (0-indexed here) sits at
//   x_m = d_x * (m mod M_x),  z_m = d_z * floor(m / M_x).
struct FimGeometry {
    int m_x = 0;
    int m_z = 0;
    double d_x = 0.0;
    double d_z = 0.0;
    std::vector<double> x_coords;
    std::vector<double> z_coords;

    int size() const { return m_x * m_z; }
};

inline FimGeometry build_fim_geometry(int m_x, int m_z, double d_x, double d_z) {
    require(m_x >= 1 && m_z >= 1, "build_fim_geometry: element counts must be >= 1");
    require(d_x > 0.0 && d_z > 0.0, "build_fim_geometry: spacings must be positive");
    FimGeometry g{m_x, m_z, d_x, d_z, {}, {}};
    const int m = m_x * m_z;
    g.x_coords.resize(m);
    g.z_coords.resize(m);
    for (int i = 0; i < m; ++i) {
        g.x_coords[i] = d_x * (i % m_x);
        g.z_coords[i] = d_z * (i / m_x);
    }
    return g;
}

// Morphable per-element heights y_m, bounded to [y_min, y_max].
struct FimShape {
    std::vector<double> y;
    double y_min = 0.0;
    double y_max = 0.0;

    double range() const { return y_max - y_min; }

    void validate() const {
        require(y_max > y_min, "FimShape: morphing range must be positive");
        for (double v : y)
            require(v >= y_min && v <= y_max, "FimShape: height outside [y_min, y_max]");
    }

    static FimShape flat(int m, double y_max, double y_min = 0.0) {
        FimShape s;
        s.y.assign(m, y_min);
        s.y_min = y_min;
        s.y_max = y_max;
        return s;
    }
};

// Array response to a plane wave at (azimuth phi, elevation theta):
//   v_m = exp(j*omega*(x_m sin(theta) cos(phi) + y_m sin(theta) sin(phi) + z_m cos(theta)))
inline CVec steering_vector(const FimGeometry& geom, const FimShape& shape, double azimuth,
                            double elevation, const CarrierConfig& carrier) {
    const int m = geom.size();
    require(static_cast<int>(shape.y.size()) == m,
            "steering_vector: shape length does not match geometry");
    require(std::isfinite(azimuth) && std::isfinite(elevation),
            "steering_vector: angles must be finite");
    const double st = std::sin(elevation);
    const double ct = std::cos(elevation);
    const double cp = std::cos(azimuth);
    const double sp = std::sin(azimuth);
    CVec v(m);
    for (int i = 0; i < m; ++i) {
        const double phase =
            carrier.wavenumber * (geom.x_coords[i] * st * cp + shape.y[i] * st * sp + geom.z_coords[i] * ct);
        v[i] = std::polar(1.0, phase);
    }
    return v;
}

}  // namespace fimstar
