#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expanse/errors.hpp"
#include "expanse/vec.hpp"

namespace expanse {

constexpr double kMembershipTol = 1e-9;
constexpr double kProjectionTol = 1e-3;
constexpr double kJacobianStep = 1e-5;

enum class SpaceKind { EuclideanRegion, FlatTorus2, UnitSphere2, InvariantSubset };

/// Planar region shapes used by the registered flows.
struct RegionShape {
    enum class Type { All, Disk, Annulus, Box } type = Type::All;
    Vec center;
    double r0 = 0.0, r1 = 0.0;  // annulus radii; disk uses r1
    Vec lo, hi;                 // box corners
};

/// One of the supported point sets: a planar region, the flat 2-torus
/// (R^2/Z^2 with the quotient distance), the unit 2-sphere with chordal
/// distance, or a labeled invariant subset of one of those.
class Space {
  public:
    static Space plane(int dim);
    static Space disk(const Vec& center, double radius);
    static Space annulus(const Vec& center, double r0, double r1);
    static Space box(const Vec& lo, const Vec& hi);
    static Space flat_torus();
    static Space unit_sphere();
    static Space invariant_subset(const std::string& label, Space ambient,
                                  std::function<bool(const Vec&, double)> member,
                                  std::function<Vec(const Vec&)> project = {});

    SpaceKind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::string& id() const { return id_; }
    const Space& ambient() const;

    bool contains(const Vec& p, double tol = kMembershipTol) const;
    /// Throws DomainError naming the violated constraint.
    void require_member(const Vec& p, double tol = kMembershipTol) const;

    double distance(const Vec& p, const Vec& q) const;
    /// Same metric without the membership precondition check.
    double distance_unchecked(const Vec& p, const Vec& q) const;

    Vec project(const Vec& p) const;

    /// Axis-aligned bounding box of the coordinate chart (regions/torus)
    /// or of the embedding (sphere).
    void bounding_box(Vec& lo, Vec& hi) const;

    /// Largest distance the metric can produce on this space.
    double diameter_hint() const;

    bool same_as(const Space& other) const { return id_ == other.id_; }

    const RegionShape& region() const { return shape_; }

  private:
    SpaceKind kind_ = SpaceKind::EuclideanRegion;
    int dim_ = 2;
    std::string id_;
    RegionShape shape_;
    std::shared_ptr<const Space> ambient_;
    std::function<bool(const Vec&, double)> member_;
    std::function<Vec(const Vec&)> project_;
};

/// Velocity field on a space: values plus (optionally analytic) Jacobians.
struct VectorField {
    int dim = 0;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian_analytic;  // empty -> finite differences
};

/// Analytic Jacobian when the field provides one, otherwise central
/// finite differences with step eta per coordinate.
Mat jacobian(const VectorField& field, const Vec& p);
Mat jacobian_fd(const VectorField& field, const Vec& p, double eta = kJacobianStep);

struct SpectrumSummary {
    int n = 0;
    std::array<std::complex<double>, 3> eigenvalues{};
    double min_singular_value = 0.0;
};

/// Eigenvalues and smallest singular value. Throws NumericError on
/// non-finite entries.
SpectrumSummary spectrum(const Mat& m);

/// Uniform sample of roughly `target_count` points of the space:
/// grid for regions and the torus, Fibonacci lattice for the sphere.
/// Invariant subsets are meshed through their ambient space.
std::vector<Vec> mesh_points(const Space& space, int target_count);

/// Approximate spacing between neighboring mesh points at the given count.
double mesh_spacing(const Space& space, int target_count);

}  // namespace expanse
