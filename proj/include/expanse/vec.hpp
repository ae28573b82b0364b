#pragma once

#include <array>
#include <cmath>
#include <string>

namespace expanse {

/// Small stack vector for ambient coordinates (dimension 2 or 3).
struct Vec {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int n = 0;

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0.0}, n(2) {}
    Vec(double x, double y, double z) : c{x, y, z}, n(3) {}

    static Vec zero(int dim) {
        Vec v;
        v.n = dim;
        return v;
    }

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] += o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] -= o.c[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r.c[i] *= s;
        return r;
    }
    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const {
        for (int i = 0; i < n; ++i)
            if (!std::isfinite(c[i])) return false;
        return true;
    }

    std::string str() const;
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

inline double euclid(const Vec& a, const Vec& b) { return (a - b).norm(); }

inline Vec cross3(const Vec& a, const Vec& b) {
    return Vec(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
               a[0] * b[1] - a[1] * b[0]);
}

/// Square matrix up to 3x3, row major.
struct Mat {
    std::array<double, 9> a{};
    int n = 0;

    static Mat zero(int n) {
        Mat m;
        m.n = n;
        return m;
    }
    static Mat identity(int n) {
        Mat m = zero(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

    Vec mul(const Vec& v) const {
        Vec r = Vec::zero(n);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += at(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    Mat transpose() const {
        Mat t = zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t.at(i, j) = at(j, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < n * n; ++i) m = std::max(m, std::abs(a[i]));
        return m;
    }

    bool finite() const {
        for (int i = 0; i < n * n; ++i)
            if (!std::isfinite(a[i])) return false;
        return true;
    }

    /// Spectral norm (largest singular value).
    double op_norm() const;
};

}  // namespace expanse
