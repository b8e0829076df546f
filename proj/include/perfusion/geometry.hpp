#pragma once

#include <memory>
#include <string>
#include <vector>

#include "perfusion/errors.hpp"
#include "perfusion/vec3.hpp"

namespace perfusion {

// ---------------------------------------------------------------------------
// Centerline: unit-length arclength-parameterized C^3 curve X(s), s in [0,1],
// with X(0) on the tissue boundary {z = 0} and X_s(0) = e_z. The free end
// X(1) is interior to the upper half space.
// ---------------------------------------------------------------------------
class Centerline {
  public:
    virtual ~Centerline() = default;
    virtual Vec3 point(double s) const = 0;
    virtual Vec3 tangent(double s) const = 0;    // X_s, unit
    virtual Vec3 curvature(double s) const = 0;  // X_ss
    virtual std::string kind() const = 0;
};

class StraightCenterline final : public Centerline {
  public:
    Vec3 point(double s) const override { return {0.0, 0.0, s}; }
    Vec3 tangent(double) const override { return {0.0, 0.0, 1.0}; }
    Vec3 curvature(double) const override { return {0.0, 0.0, 0.0}; }
    std::string kind() const override { return "straight"; }
};

/// Planar circular arc of radius R in the xz-plane, rising from the wall.
/// Requires R > 1/pi so the unit-length arc stays in {z > 0}.
class ArcCenterline final : public Centerline {
  public:
    explicit ArcCenterline(double radius);
    Vec3 point(double s) const override;
    Vec3 tangent(double s) const override;
    Vec3 curvature(double s) const override;
    std::string kind() const override { return "arc"; }
    double radius() const { return radius_; }

  private:
    double radius_;
};

/// Polynomial curve c(u), u in [0,1], rescaled to unit length and
/// reparameterized to exact arclength by quadrature + Newton inversion.
/// Coefficients are ascending powers per component; c'(0) must be parallel
/// to e_z for the base-tangent condition to hold.
class PolynomialCenterline final : public Centerline {
  public:
    PolynomialCenterline(std::vector<double> cx, std::vector<double> cy, std::vector<double> cz);
    Vec3 point(double s) const override;
    Vec3 tangent(double s) const override;
    Vec3 curvature(double s) const override;
    std::string kind() const override { return "polynomial"; }
    double total_length() const { return length_; }

  private:
    Vec3 eval(double u) const;
    Vec3 deriv(double u) const;
    Vec3 deriv2(double u) const;
    double arclength(double u) const;  // of the raw curve, from 0
    double u_of_s(double s) const;

    std::vector<double> cx_, cy_, cz_;
    double length_ = 0.0;
    std::vector<double> cum_;  // cumulative arclength at uniform u grid
    int grid_n_ = 0;
};

// ---------------------------------------------------------------------------
// Radius profile a(s) on [0,1], dimensionless, sup a = 1, with spheroidal
// decay a ~ sqrt(1 - s^2) at the free end. The products a a' and a^3 a''
// stay bounded even where a' blows up, so they are exposed directly.
// ---------------------------------------------------------------------------
struct RadiusSample {
    double a;        // a(s)
    double da;       // a'(s)   (unbounded at the spheroidal tip)
    double a_da;     // a(s) a'(s),     bounded for admissible radii
    double a3_d2a;   // a^3(s) a''(s),  bounded for admissible radii
};

class RadiusProfile {
  public:
    virtual ~RadiusProfile() = default;
    virtual RadiusSample eval(double s) const = 0;
    virtual std::string kind() const = 0;
    double value(double s) const { return eval(s).a; }
};

class SpheroidalRadius final : public RadiusProfile {
  public:
    RadiusSample eval(double s) const override;
    std::string kind() const override { return "spheroidal"; }
};

/// Natural cubic spline through user samples. The spline interpolates the
/// squared radius w = a^2, which stays polynomial through a spheroidal tip
/// (w = 1 - s^2) where a itself has a vertical tangent; the bounded products
/// follow as a a' = w'/2 and a^3 a'' = w w''/2 - w'^2/4.
class TabulatedRadius final : public RadiusProfile {
  public:
    TabulatedRadius(std::vector<double> s, std::vector<double> a);
    RadiusSample eval(double s) const override;
    std::string kind() const override { return "tabulated"; }

  private:
    std::vector<double> s_, w_, m_;  // w = a^2 samples, m = spline second derivatives
};

/// a(s) = c0 + c1 s; handy for closed-form checks away from the tip.
class LinearRadius final : public RadiusProfile {
  public:
    LinearRadius(double c0, double c1) : c0_(c0), c1_(c1) {}
    RadiusSample eval(double s) const override {
        const double a = c0_ + c1_ * s;
        return {a, c1_, a * c1_, 0.0};
    }
    std::string kind() const override { return "linear"; }

  private:
    double c0_, c1_;
};

// ---------------------------------------------------------------------------
// Bishop frame: rotation-minimizing orthonormal triad (e_t, e_1, e_2) with
//   d/ds e_t = kappa1 e_1 + kappa2 e_2,  d/ds e_i = -kappa_i e_t,
// and kappa1^2 + kappa2^2 = |X_ss|^2.
// ---------------------------------------------------------------------------
class BishopFrame {
  public:
    struct Triad {
        Vec3 e_t, e1, e2;
    };

    Triad at(double s) const;                          // orthonormal by construction
    Vec3 radial(double s, double theta) const;         // e_r(s,theta)
    void curvatures(double s, double& k1, double& k2) const;
    double kappa_hat(double s, double theta) const;    // kappa1 cos + kappa2 sin
    double kappa_max() const { return kappa_max_; }
    int samples() const { return static_cast<int>(s_.size()) - 1; }

    const std::vector<double>& grid() const { return s_; }
    const std::vector<Vec3>& e1_samples() const { return e1_; }
    const std::vector<double>& kappa1_samples() const { return k1_; }
    const std::vector<double>& kappa2_samples() const { return k2_; }

    friend BishopFrame build_bishop_frame(std::shared_ptr<const Centerline> curve,
                                          int n_samples, const Vec3& e1_initial);

  private:
    std::shared_ptr<const Centerline> curve_;
    std::vector<double> s_;
    std::vector<Vec3> e1_;
    std::vector<double> k1_, k2_;
    double kappa_max_ = 0.0;
};

BishopFrame build_bishop_frame(std::shared_ptr<const Centerline> curve, int n_samples,
                               const Vec3& e1_initial);

// ---------------------------------------------------------------------------
// Vessel geometry: tube of radius eps * a(s) around the centerline.
// ---------------------------------------------------------------------------
struct GeometrySettings {
    double a0 = 0.25;            // lower radius bound on [0, 1-delta]
    double delta = 0.1;          // tip-region width
    double tip_constant = 10.0;  // C in |a - sqrt(1-s^2)| <= C eps^2 sqrt(1-s^2)
    double c_gamma_min = 1e-3;   // required non-self-intersection margin
    int frame_samples = 2048;
    int validation_samples = 512;
};

class VesselGeometry {
  public:
    VesselGeometry(std::shared_ptr<const Centerline> curve,
                   std::shared_ptr<const RadiusProfile> radius, double epsilon,
                   GeometrySettings settings = {});

    double epsilon() const { return eps_; }
    const Centerline& centerline() const { return *curve_; }
    std::shared_ptr<const Centerline> centerline_ptr() const { return curve_; }
    const RadiusProfile& radius() const { return *radius_; }
    const BishopFrame& frame() const { return frame_; }
    const GeometrySettings& settings() const { return settings_; }

    double surface_radius(double s) const { return eps_ * radius_->value(s); }
    Vec3 surface_point(double s, double theta) const;
    Vec3 surface_normal(double s, double theta) const;
    double surface_jacobian(double s, double theta) const;
    double volume_jacobian(double r, double s, double theta) const;
    double kappa_hat(double s, double theta) const { return frame_.kappa_hat(s, theta); }

    /// Nearest centerline parameter (global coarse scan + Newton polish).
    struct ClosestPoint {
        double s;
        double distance;
    };
    ClosestPoint closest_centerline_point(const Vec3& x) const;

    /// Curvilinear coordinates of a Cartesian point near the vessel.
    struct Curvilinear {
        double r, theta, s;
        bool inside;  // r < eps a(s)
    };
    Curvilinear invert(const Vec3& x) const;

  private:
    std::shared_ptr<const Centerline> curve_;
    std::shared_ptr<const RadiusProfile> radius_;
    double eps_;
    GeometrySettings settings_;
    BishopFrame frame_;
};

// ---------------------------------------------------------------------------
// Admissibility validation (never throws; returns structured results).
// ---------------------------------------------------------------------------
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    double c_gamma = 0.0;
    double kappa_max = 0.0;
    double a_star = 0.0;   // sup |a a'|
    double a_star2 = 0.0;  // sup |a^3 a''|
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

ValidationReport validate_admissible(const VesselGeometry& geom);

} // namespace perfusion
