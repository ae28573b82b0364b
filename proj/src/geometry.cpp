#include "expanse/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace expanse {

std::string Vec::str() const {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (int i = 0; i < n; ++i) {
        if (i) os << ", ";
        os << c[i];
    }
    os << ")";
    return os.str();
}

double Mat::op_norm() const {
    if (n == 0) return 0.0;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = at(i, j);
    return m.jacobiSvd().singularValues()(0);
}

// ---------------------------------------------------------------------------
// Space
// ---------------------------------------------------------------------------

Space Space::plane(int dim) {
    Space s;
    s.kind_ = SpaceKind::EuclideanRegion;
    s.dim_ = dim;
    s.shape_.type = RegionShape::Type::All;
    s.id_ = "euclidean:plane" + std::to_string(dim);
    return s;
}

Space Space::disk(const Vec& center, double radius) {
    Space s;
    s.kind_ = SpaceKind::EuclideanRegion;
    s.dim_ = center.n;
    s.shape_.type = RegionShape::Type::Disk;
    s.shape_.center = center;
    s.shape_.r1 = radius;
    std::ostringstream os;
    os << "euclidean:disk" << center.str() << "r=" << radius;
    s.id_ = os.str();
    return s;
}

Space Space::annulus(const Vec& center, double r0, double r1) {
    Space s;
    s.kind_ = SpaceKind::EuclideanRegion;
    s.dim_ = center.n;
    s.shape_.type = RegionShape::Type::Annulus;
    s.shape_.center = center;
    s.shape_.r0 = r0;
    s.shape_.r1 = r1;
    std::ostringstream os;
    os << "euclidean:annulus" << center.str() << "r=[" << r0 << "," << r1 << "]";
    s.id_ = os.str();
    return s;
}

Space Space::box(const Vec& lo, const Vec& hi) {
    Space s;
    s.kind_ = SpaceKind::EuclideanRegion;
    s.dim_ = lo.n;
    s.shape_.type = RegionShape::Type::Box;
    s.shape_.lo = lo;
    s.shape_.hi = hi;
    s.id_ = "euclidean:box" + lo.str() + hi.str();
    return s;
}

Space Space::flat_torus() {
    Space s;
    s.kind_ = SpaceKind::FlatTorus2;
    s.dim_ = 2;
    s.id_ = "flat_torus_2";
    return s;
}

Space Space::unit_sphere() {
    Space s;
    s.kind_ = SpaceKind::UnitSphere2;
    s.dim_ = 3;
    s.id_ = "unit_sphere_2";
    return s;
}

Space Space::invariant_subset(const std::string& label, Space ambient,
                              std::function<bool(const Vec&, double)> member,
                              std::function<Vec(const Vec&)> project) {
    Space s;
    s.kind_ = SpaceKind::InvariantSubset;
    s.dim_ = ambient.dim();
    s.id_ = "subset:" + label + "@" + ambient.id();
    s.ambient_ = std::make_shared<Space>(std::move(ambient));
    s.member_ = std::move(member);
    s.project_ = std::move(project);
    return s;
}

const Space& Space::ambient() const {
    if (kind_ == SpaceKind::InvariantSubset) return *ambient_;
    return *this;
}

bool Space::contains(const Vec& p, double tol) const {
    if (!p.finite() || p.n != dim_) return false;
    switch (kind_) {
        case SpaceKind::EuclideanRegion: {
            switch (shape_.type) {
                case RegionShape::Type::All:
                    return true;
                case RegionShape::Type::Disk:
                    return euclid(p, shape_.center) <= shape_.r1 + tol;
                case RegionShape::Type::Annulus: {
                    const double r = euclid(p, shape_.center);
                    return r >= shape_.r0 - tol && r <= shape_.r1 + tol;
                }
                case RegionShape::Type::Box:
                    for (int i = 0; i < dim_; ++i)
                        if (p[i] < shape_.lo[i] - tol || p[i] > shape_.hi[i] + tol)
                            return false;
                    return true;
            }
            return false;
        }
        case SpaceKind::FlatTorus2:
            return true;  // every representative names a torus point
        case SpaceKind::UnitSphere2:
            return std::abs(p.norm() - 1.0) <= tol;
        case SpaceKind::InvariantSubset:
            return member_(p, tol);
    }
    return false;
}

void Space::require_member(const Vec& p, double tol) const {
    if (contains(p, tol)) return;
    std::ostringstream os;
    os << "point " << p.str() << " is not on space " << id_;
    if (!p.finite() || p.n != dim_) {
        os << ": wrong dimension or non-finite coordinate";
    } else if (kind_ == SpaceKind::UnitSphere2) {
        os << ": |p| = " << p.norm() << " deviates from 1 beyond " << tol;
    } else if (kind_ == SpaceKind::EuclideanRegion) {
        if (shape_.type == RegionShape::Type::Box) {
            for (int i = 0; i < dim_; ++i)
                if (p[i] < shape_.lo[i] - tol || p[i] > shape_.hi[i] + tol)
                    os << ": coordinate " << i + 1 << " = " << p[i] << " outside ["
                       << shape_.lo[i] << ", " << shape_.hi[i] << "]";
        } else {
            os << ": radius " << euclid(p, shape_.center) << " outside the region";
        }
    }
    throw DomainError(os.str());
}

namespace {

double torus_distance(const Vec& p, const Vec& q) {
    // Minimum over the 9 integer translates of the representative difference.
    double best = std::numeric_limits<double>::infinity();
    const double dx0 = p[0] - q[0], dy0 = p[1] - q[1];
    for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
            const double dx = dx0 - std::round(dx0) + a;
            const double dy = dy0 - std::round(dy0) + b;
            best = std::min(best, dx * dx + dy * dy);
        }
    }
    return std::sqrt(best);
}

double mod_unit(double x) {
    double m = x - std::floor(x);
    if (m >= 1.0) m = 0.0;  // guard against floor rounding at exact integers
    return m;
}

}  // namespace

double Space::distance(const Vec& p, const Vec& q) const {
    require_member(p);
    require_member(q);
    return distance_unchecked(p, q);
}

double Space::distance_unchecked(const Vec& p, const Vec& q) const {
    if (kind_ == SpaceKind::FlatTorus2) return torus_distance(p, q);
    if (kind_ == SpaceKind::InvariantSubset) return ambient_->distance_unchecked(p, q);
    return euclid(p, q);
}

Vec Space::project(const Vec& p) const {
    switch (kind_) {
        case SpaceKind::EuclideanRegion:
            return p;
        case SpaceKind::FlatTorus2:
            return Vec(mod_unit(p[0]), mod_unit(p[1]));
        case SpaceKind::UnitSphere2: {
            const double r = p.norm();
            if (r == 0.0)
                throw DomainError("cannot project the origin onto the unit sphere");
            return p * (1.0 / r);
        }
        case SpaceKind::InvariantSubset:
            if (project_) return project_(p);
            return ambient_->project(p);
    }
    return p;
}

void Space::bounding_box(Vec& lo, Vec& hi) const {
    switch (kind_) {
        case SpaceKind::EuclideanRegion:
            switch (shape_.type) {
                case RegionShape::Type::All:
                    lo = Vec::zero(dim_);
                    hi = Vec::zero(dim_);
                    for (int i = 0; i < dim_; ++i) {
                        lo[i] = -1.0;
                        hi[i] = 1.0;
                    }
                    return;
                case RegionShape::Type::Disk:
                case RegionShape::Type::Annulus: {
                    lo = shape_.center;
                    hi = shape_.center;
                    for (int i = 0; i < dim_; ++i) {
                        lo[i] -= shape_.r1;
                        hi[i] += shape_.r1;
                    }
                    return;
                }
                case RegionShape::Type::Box:
                    lo = shape_.lo;
                    hi = shape_.hi;
                    return;
            }
            return;
        case SpaceKind::FlatTorus2:
            lo = Vec(0.0, 0.0);
            hi = Vec(1.0, 1.0);
            return;
        case SpaceKind::UnitSphere2:
            lo = Vec(-1.0, -1.0, -1.0);
            hi = Vec(1.0, 1.0, 1.0);
            return;
        case SpaceKind::InvariantSubset:
            ambient_->bounding_box(lo, hi);
            return;
    }
}

double Space::diameter_hint() const {
    switch (kind_) {
        case SpaceKind::UnitSphere2:
            return 2.0;
        case SpaceKind::FlatTorus2:
            return std::sqrt(0.5);  // quotient metric peaks at (1/2, 1/2)
        case SpaceKind::InvariantSubset:
            return ambient_->diameter_hint();
        case SpaceKind::EuclideanRegion: {
            Vec lo, hi;
            bounding_box(lo, hi);
            return euclid(lo, hi);
        }
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// Jacobians and spectra
// ---------------------------------------------------------------------------

Mat jacobian(const VectorField& field, const Vec& p) {
    if (field.jacobian_analytic) return field.jacobian_analytic(p);
    return jacobian_fd(field, p);
}

Mat jacobian_fd(const VectorField& field, const Vec& p, double eta) {
    Mat j = Mat::zero(field.dim);
    for (int k = 0; k < field.dim; ++k) {
        Vec hi = p, lo = p;
        hi[k] += eta;
        lo[k] -= eta;
        const Vec fp = field.value(hi);
        const Vec fm = field.value(lo);
        for (int i = 0; i < field.dim; ++i) j.at(i, k) = (fp[i] - fm[i]) / (2.0 * eta);
    }
    return j;
}

SpectrumSummary spectrum(const Mat& m) {
    if (!m.finite()) throw NumericError("spectrum: matrix has non-finite entries");
    SpectrumSummary s;
    s.n = m.n;
    if (m.n == 0) return s;

    Eigen::MatrixXd em(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) em(i, j) = m.at(i, j);

    Eigen::EigenSolver<Eigen::MatrixXd> es(em, /*computeEigenvectors=*/false);
    for (int i = 0; i < m.n; ++i) s.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    // Deterministic order: by real part, then imaginary part.
    std::sort(s.eigenvalues.begin(), s.eigenvalues.begin() + m.n,
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });

    s.min_singular_value = em.jacobiSvd().singularValues()(m.n - 1);
    return s;
}

// ---------------------------------------------------------------------------
// Meshes
// ---------------------------------------------------------------------------

std::vector<Vec> mesh_points(const Space& space, int target_count) {
    std::vector<Vec> pts;
    switch (space.kind()) {
        case SpaceKind::UnitSphere2: {
            // Fibonacci lattice; exactly target_count points.
            const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
            pts.reserve(static_cast<std::size_t>(target_count));
            for (int i = 0; i < target_count; ++i) {
                const double z = 1.0 - (2.0 * i + 1.0) / target_count;
                const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double phi = ga * i;
                pts.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
            }
            return pts;
        }
        case SpaceKind::FlatTorus2: {
            const int k = std::max(2, static_cast<int>(std::lround(std::sqrt(double(target_count)))));
            pts.reserve(static_cast<std::size_t>(k) * k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    pts.emplace_back((i + 0.5) / k, (j + 0.5) / k);
            return pts;
        }
        case SpaceKind::EuclideanRegion:
        case SpaceKind::InvariantSubset: {
            Vec lo, hi;
            space.bounding_box(lo, hi);
            const Space& s = space.ambient();
            const int k = std::max(2, static_cast<int>(std::lround(std::sqrt(double(target_count)))));
            pts.reserve(static_cast<std::size_t>(k) * k);
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    Vec p(lo[0] + (hi[0] - lo[0]) * (i + 0.5) / k,
                          lo[1] + (hi[1] - lo[1]) * (j + 0.5) / k);
                    if (s.contains(p, 0.0)) pts.push_back(p);
                }
            }
            return pts;
        }
    }
    return pts;
}

double mesh_spacing(const Space& space, int target_count) {
    switch (space.kind()) {
        case SpaceKind::UnitSphere2:
            return std::sqrt(4.0 * std::numbers::pi / target_count);
        case SpaceKind::FlatTorus2:
            return 1.0 / std::max(2.0, std::round(std::sqrt(double(target_count))));
        default: {
            Vec lo, hi;
            space.bounding_box(lo, hi);
            const double k = std::max(2.0, std::round(std::sqrt(double(target_count))));
            return std::max(hi[0] - lo[0], hi[1] - lo[1]) / k;
        }
    }
}

}  // namespace expanse
