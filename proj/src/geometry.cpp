#include "perfusion/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perfusion/parallel.hpp"
#include "perfusion/quadrature.hpp"

namespace perfusion {

namespace {

double poly_eval(const std::vector<double>& c, double u) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * u + c[k];
    return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<double>(k));
    if (d.empty()) d.push_back(0.0);
    return d;
}

} // namespace

// ---------------------------------------------------------------------------
// ArcCenterline
// ---------------------------------------------------------------------------
ArcCenterline::ArcCenterline(double radius) : radius_(radius) {
    if (!(radius > 1.0 / M_PI))
        throw ValidationError("arc radius must exceed 1/pi so the curve stays above the wall");
}

Vec3 ArcCenterline::point(double s) const {
    const double phi = s / radius_;
    return {radius_ * (1.0 - std::cos(phi)), 0.0, radius_ * std::sin(phi)};
}

Vec3 ArcCenterline::tangent(double s) const {
    const double phi = s / radius_;
    return {std::sin(phi), 0.0, std::cos(phi)};
}

Vec3 ArcCenterline::curvature(double s) const {
    const double phi = s / radius_;
    return {std::cos(phi) / radius_, 0.0, -std::sin(phi) / radius_};
}

// ---------------------------------------------------------------------------
// PolynomialCenterline
// ---------------------------------------------------------------------------
PolynomialCenterline::PolynomialCenterline(std::vector<double> cx, std::vector<double> cy,
                                           std::vector<double> cz)
    : cx_(std::move(cx)), cy_(std::move(cy)), cz_(std::move(cz)) {
    if (cx_.empty()) cx_.push_back(0.0);
    if (cy_.empty()) cy_.push_back(0.0);
    if (cz_.empty()) cz_.push_back(0.0);
    if (norm(deriv(0.0)) < 1e-12)
        throw ValidationError("degenerate centerline: c'(0) = 0");

    grid_n_ = 1024;
    cum_.assign(static_cast<std::size_t>(grid_n_) + 1, 0.0);
    const double h = 1.0 / grid_n_;
    for (int k = 0; k < grid_n_; ++k) {
        const double seg = gauss_integrate(k * h, (k + 1) * h, 16,
                                           [this](double u) { return norm(deriv(u)); });
        cum_[static_cast<std::size_t>(k) + 1] = cum_[static_cast<std::size_t>(k)] + seg;
    }
    length_ = cum_.back();
    if (length_ < 1e-10) throw ValidationError("degenerate centerline: zero length");
}

Vec3 PolynomialCenterline::eval(double u) const {
    return {poly_eval(cx_, u), poly_eval(cy_, u), poly_eval(cz_, u)};
}

Vec3 PolynomialCenterline::deriv(double u) const {
    return {poly_eval(poly_derivative(cx_), u), poly_eval(poly_derivative(cy_), u),
            poly_eval(poly_derivative(cz_), u)};
}

Vec3 PolynomialCenterline::deriv2(double u) const {
    return {poly_eval(poly_derivative(poly_derivative(cx_)), u),
            poly_eval(poly_derivative(poly_derivative(cy_)), u),
            poly_eval(poly_derivative(poly_derivative(cz_)), u)};
}

double PolynomialCenterline::arclength(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    const double h = 1.0 / grid_n_;
    const int k = std::min(static_cast<int>(u / h), grid_n_ - 1);
    return cum_[static_cast<std::size_t>(k)] +
           gauss_integrate(k * h, u, 16, [this](double v) { return norm(deriv(v)); });
}

double PolynomialCenterline::u_of_s(double s) const {
    const double target = std::clamp(s, 0.0, 1.0) * length_;
    // bracket from the cumulative table, then Newton
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
    double u = static_cast<double>(std::distance(cum_.begin(), it)) / grid_n_;
    u = std::clamp(u, 0.0, 1.0);
    for (int iter = 0; iter < 50; ++iter) {
        const double f = arclength(u) - target;
        const double fp = norm(deriv(u));
        const double du = f / fp;
        u = std::clamp(u - du, 0.0, 1.0);
        if (std::abs(du) < 1e-15) break;
    }
    return u;
}

Vec3 PolynomialCenterline::point(double s) const { return eval(u_of_s(s)) / length_; }

Vec3 PolynomialCenterline::tangent(double s) const { return normalized(deriv(u_of_s(s))); }

Vec3 PolynomialCenterline::curvature(double s) const {
    const double u = u_of_s(s);
    const Vec3 d1 = deriv(u);
    const Vec3 d2 = deriv2(u);
    const Vec3 t = normalized(d1);
    const Vec3 d2_perp = d2 - dot(d2, t) * t;
    return (length_ / norm2(d1)) * d2_perp;
}

// ---------------------------------------------------------------------------
// Radius profiles
// ---------------------------------------------------------------------------
RadiusSample SpheroidalRadius::eval(double s) const {
    const double w = std::max(1.0 - s * s, 0.0);
    const double a = std::sqrt(w);
    const double da = a > 0.0 ? -s / a : -std::numeric_limits<double>::infinity();
    // a a' = -s and a^3 a'' = -1 hold exactly for the spheroid
    return {a, da, -s, -1.0};
}

TabulatedRadius::TabulatedRadius(std::vector<double> s, std::vector<double> a)
    : s_(std::move(s)) {
    const std::size_t n = s_.size();
    if (n < 3 || a.size() != n) throw ValidationError("tabulated radius needs >= 3 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(s_[i] > s_[i - 1])) throw ValidationError("tabulated radius grid must increase");
    w_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < 0.0) throw ValidationError("tabulated radius samples must be nonnegative");
        w_[i] = a[i] * a[i];
    }
    // natural cubic spline second derivatives (Thomas algorithm)
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 1.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = s_[i] - s_[i - 1];
        const double hr = s_[i + 1] - s_[i];
        diag[i] = 2.0 * (hl + hr);
        upper[i] = hr;
        rhs[i] = 6.0 * ((w_[i + 1] - w_[i]) / hr - (w_[i] - w_[i - 1]) / hl);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double hl = s_[i] - s_[i - 1];
        const double c = hl / diag[i - 1];
        diag[i] -= c * upper[i - 1];
        rhs[i] -= c * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (rhs[i] - upper[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / diag[i];
        if (i == 1) break;
    }
}

RadiusSample TabulatedRadius::eval(double s) const {
    s = std::clamp(s, s_.front(), s_.back());
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(s_.begin(), it));
    i = std::clamp<std::size_t>(i, 1, s_.size() - 1) - 1;
    const double h = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / h;
    const double w = std::max(
        w_[i] * (1.0 - t) + w_[i + 1] * t +
            h * h / 6.0 *
                ((1.0 - t) * ((1.0 - t) * (1.0 - t) - 1.0) * m_[i] + t * (t * t - 1.0) * m_[i + 1]),
        0.0);
    const double dw = (w_[i + 1] - w_[i]) / h +
                      h / 6.0 *
                          ((3.0 * t * t - 1.0) * m_[i + 1] -
                           (3.0 * (1.0 - t) * (1.0 - t) - 1.0) * m_[i]);
    const double d2w = (1.0 - t) * m_[i] + t * m_[i + 1];
    const double a = std::sqrt(w);
    const double da = a > 0.0 ? dw / (2.0 * a) : -std::numeric_limits<double>::infinity();
    return {a, da, 0.5 * dw, 0.5 * w * d2w - 0.25 * dw * dw};
}

// ---------------------------------------------------------------------------
// Bishop frame
// ---------------------------------------------------------------------------
namespace {

Vec3 gram_schmidt(const Vec3& v, const Vec3& t) { return normalized(v - dot(v, t) * t); }

} // namespace

BishopFrame build_bishop_frame(std::shared_ptr<const Centerline> curve, int n_samples,
                               const Vec3& e1_initial) {
    if (n_samples < 2) throw ValidationError("bishop frame needs at least 2 samples");
    const Vec3 t0 = curve->tangent(0.0);
    if (std::abs(norm(t0) - 1.0) > 1e-8)
        throw ValidationError("centerline tangent is not unit length at s=0");
    if (std::abs(norm(e1_initial) - 1.0) > 1e-10)
        throw ValidationError("e1 initial vector must be unit length");
    if (std::abs(dot(e1_initial, t0)) > 1e-10)
        throw ValidationError("e1 initial vector must be perpendicular to the tangent");

    BishopFrame frame;
    frame.curve_ = curve;
    const int n = n_samples;
    frame.s_.resize(static_cast<std::size_t>(n) + 1);
    frame.e1_.resize(static_cast<std::size_t>(n) + 1);
    frame.k1_.resize(static_cast<std::size_t>(n) + 1);
    frame.k2_.resize(static_cast<std::size_t>(n) + 1);

    const double h = 1.0 / n;
    Vec3 e1 = e1_initial;
    // d/ds e1 = -(X_ss . e1) X_s, integrated with RK4 and re-orthonormalized
    // against the exact tangent every step
    auto rhs = [&curve](double s, const Vec3& v) {
        return -dot(curve->curvature(s), v) * curve->tangent(s);
    };
    for (int i = 0; i <= n; ++i) {
        const double s = i * h;
        frame.s_[static_cast<std::size_t>(i)] = s;
        const Vec3 t = curve->tangent(s);
        e1 = gram_schmidt(e1, t);
        frame.e1_[static_cast<std::size_t>(i)] = e1;
        const Vec3 xss = curve->curvature(s);
        frame.k1_[static_cast<std::size_t>(i)] = dot(xss, e1);
        frame.k2_[static_cast<std::size_t>(i)] = dot(xss, cross(t, e1));
        frame.kappa_max_ = std::max(frame.kappa_max_, norm(xss));
        if (i < n) {
            const Vec3 k1v = rhs(s, e1);
            const Vec3 k2v = rhs(s + 0.5 * h, e1 + 0.5 * h * k1v);
            const Vec3 k3v = rhs(s + 0.5 * h, e1 + 0.5 * h * k2v);
            const Vec3 k4v = rhs(s + h, e1 + h * k3v);
            e1 += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
    }
    return frame;
}

BishopFrame::Triad BishopFrame::at(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const int n = samples();
    const double h = 1.0 / n;
    const int k = std::min(static_cast<int>(s / h), n - 1);
    const double tau = (s - s_[static_cast<std::size_t>(k)]) / h;

    const Vec3 t = curve_->tangent(s);
    const Vec3 pa = e1_[static_cast<std::size_t>(k)];
    const Vec3 pb = e1_[static_cast<std::size_t>(k) + 1];
    const Vec3 da = -k1_[static_cast<std::size_t>(k)] * curve_->tangent(s_[static_cast<std::size_t>(k)]);
    const Vec3 db = -k1_[static_cast<std::size_t>(k) + 1] * curve_->tangent(s_[static_cast<std::size_t>(k) + 1]);

    const double t2 = tau * tau, t3 = t2 * tau;
    const Vec3 hermite = (2.0 * t3 - 3.0 * t2 + 1.0) * pa + (t3 - 2.0 * t2 + tau) * h * da +
                         (-2.0 * t3 + 3.0 * t2) * pb + (t3 - t2) * h * db;
    const Vec3 e1 = gram_schmidt(hermite, t);
    return {t, e1, cross(t, e1)};
}

Vec3 BishopFrame::radial(double s, double theta) const {
    const Triad f = at(s);
    return std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
}

void BishopFrame::curvatures(double s, double& k1, double& k2) const {
    const Triad f = at(s);
    const Vec3 xss = curve_->curvature(s);
    k1 = dot(xss, f.e1);
    k2 = dot(xss, f.e2);
}

double BishopFrame::kappa_hat(double s, double theta) const {
    double k1 = 0.0, k2 = 0.0;
    curvatures(s, k1, k2);
    return k1 * std::cos(theta) + k2 * std::sin(theta);
}

// ---------------------------------------------------------------------------
// VesselGeometry
// ---------------------------------------------------------------------------
VesselGeometry::VesselGeometry(std::shared_ptr<const Centerline> curve,
                               std::shared_ptr<const RadiusProfile> radius, double epsilon,
                               GeometrySettings settings)
    : curve_(std::move(curve)), radius_(std::move(radius)), eps_(epsilon),
      settings_(settings),
      frame_(build_bishop_frame(curve_, settings.frame_samples, [&] {
          const Vec3 t0 = curve_->tangent(0.0);
          Vec3 seed{1.0, 0.0, 0.0};
          if (std::abs(dot(seed, t0)) > 0.9) seed = {0.0, 1.0, 0.0};
          return gram_schmidt(seed, t0);
      }())) {
    if (!(eps_ > 0.0)) throw ValidationError("epsilon must be positive");
}

Vec3 VesselGeometry::surface_point(double s, double theta) const {
    if (s < 0.0 || s > 1.0) throw DomainError("surface_point: s outside [0,1]");
    return curve_->point(s) + surface_radius(s) * frame_.radial(s, theta);
}

Vec3 VesselGeometry::surface_normal(double s, double theta) const {
    if (s < 0.0 || s >= 1.0)
        throw TipSingularityError("surface_normal undefined at s = 1; stop at the last grid node");
    const RadiusSample rs = radius_->eval(s);
    if (!std::isfinite(rs.da))
        throw TipSingularityError("radius slope unbounded at evaluation point");
    const BishopFrame::Triad f = frame_.at(s);
    const Vec3 e_r = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
    const double g = std::sqrt(1.0 + eps_ * eps_ * rs.da * rs.da);
    return (1.0 / g) * (e_r - (eps_ * rs.da) * f.e_t);
}

double VesselGeometry::surface_jacobian(double s, double theta) const {
    if (s < 0.0 || s > 1.0) throw DomainError("surface_jacobian: s outside [0,1]");
    const RadiusSample rs = radius_->eval(s);
    const double kh = kappa_hat(s, theta);
    // eps a sqrt((1 - eps a kh)^2 + eps^2 a'^2), written with the bounded
    // product a a' so the spheroidal tip evaluates cleanly
    const double term1 = rs.a * (1.0 - eps_ * rs.a * kh);
    const double term2 = eps_ * rs.a_da;
    return eps_ * std::sqrt(term1 * term1 + term2 * term2);
}

double VesselGeometry::volume_jacobian(double r, double s, double theta) const {
    if (r < 0.0) throw DomainError("volume_jacobian: negative radius");
    const double kmax = frame_.kappa_max();
    if (kmax > 0.0 && r >= 0.5 / kmax)
        throw DomainError("volume_jacobian: r beyond the injectivity radius 1/(2 kappa*)");
    return r * (1.0 - r * kappa_hat(s, theta));
}

VesselGeometry::ClosestPoint VesselGeometry::closest_centerline_point(const Vec3& x) const {
    const int n = frame_.samples();
    const double h = 1.0 / n;
    double best_s = 0.0;
    double best_d2 = std::numeric_limits<double>::max();
    for (int i = 0; i <= n; ++i) {
        const double s = i * h;
        const double d2 = norm2(x - curve_->point(s));
        if (d2 < best_d2) {
            best_d2 = d2;
            best_s = s;
        }
    }
    double s = best_s;
    for (int iter = 0; iter < 30; ++iter) {
        const Vec3 d = x - curve_->point(s);
        const double g1 = -2.0 * dot(d, curve_->tangent(s));
        const double g2 = 2.0 - 2.0 * dot(d, curve_->curvature(s));
        if (g2 <= 0.0) break;
        double step = -g1 / g2;
        step = std::clamp(step, -h, h);
        const double s_new = std::clamp(s + step, 0.0, 1.0);
        if (std::abs(s_new - s) < 1e-15) {
            s = s_new;
            break;
        }
        s = s_new;
    }
    return {s, dist(x, curve_->point(s))};
}

VesselGeometry::Curvilinear VesselGeometry::invert(const Vec3& x) const {
    const ClosestPoint cp = closest_centerline_point(x);
    const Vec3 d = x - curve_->point(cp.s);
    const BishopFrame::Triad f = frame_.at(cp.s);
    double theta = std::atan2(dot(d, f.e2), dot(d, f.e1));
    if (theta < 0.0) theta += 2.0 * M_PI;
    const double r = cp.distance;
    const bool inside = cp.s > 0.0 && cp.s < 1.0 && r < surface_radius(cp.s) * (1.0 - 1e-10);
    return {r, theta, cp.s, inside};
}

// ---------------------------------------------------------------------------
// Admissibility validation
// ---------------------------------------------------------------------------
ValidationReport validate_admissible(const VesselGeometry& geom) {
    ValidationReport rep;
    const Centerline& curve = geom.centerline();
    const RadiusProfile& radius = geom.radius();
    const GeometrySettings& cfg = geom.settings();
    const int n = cfg.validation_samples;

    auto add = [&rep](std::string name, bool pass, double measured, double threshold,
                      std::string detail = "") {
        rep.checks.push_back({std::move(name), pass, measured, threshold, std::move(detail)});
    };

    // -- centerline ----------------------------------------------------------
    std::vector<double> sgrid(static_cast<std::size_t>(n) + 1);
    std::vector<Vec3> pts(sgrid.size());
    for (int i = 0; i <= n; ++i) {
        sgrid[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
        pts[static_cast<std::size_t>(i)] = curve.point(sgrid[static_cast<std::size_t>(i)]);
    }

    double unit_dev = 0.0;
    for (int i = 0; i <= n; ++i)
        unit_dev = std::max(unit_dev, std::abs(norm(curve.tangent(i * 1.0 / n)) - 1.0));
    add("centerline.unit_speed", unit_dev <= 1e-10, unit_dev, 1e-10);

    add("centerline.base_on_wall", std::abs(pts[0].z) <= 1e-12, std::abs(pts[0].z), 1e-12);
    const double tdev = norm(curve.tangent(0.0) - Vec3{0.0, 0.0, 1.0});
    add("centerline.base_tangent", tdev <= 1e-10, tdev, 1e-10);

    double min_z = std::numeric_limits<double>::max();
    for (int i = 1; i <= n; ++i) min_z = std::min(min_z, pts[static_cast<std::size_t>(i)].z);
    add("centerline.interior", min_z > 0.0, min_z, 0.0, "min z over s > 0");

    // c_Gamma (eq. of the non-self-intersection constant): pairwise chord/arc
    // ratios plus the distance-to-wall component z(s)/s
    std::vector<double> row_min(static_cast<std::size_t>(n) + 1,
                                std::numeric_limits<double>::max());
    par::parallel_for(n + 1, [&](std::int64_t i) {
        double m = std::numeric_limits<double>::max();
        for (int j = 0; j < static_cast<int>(i); ++j) {
            const double ratio = dist(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) /
                                 (sgrid[static_cast<std::size_t>(i)] - sgrid[static_cast<std::size_t>(j)]);
            m = std::min(m, ratio);
        }
        if (i > 0) m = std::min(m, pts[static_cast<std::size_t>(i)].z / sgrid[static_cast<std::size_t>(i)]);
        row_min[static_cast<std::size_t>(i)] = m;
    });
    double c_gamma = std::numeric_limits<double>::max();
    for (double m : row_min) c_gamma = std::min(c_gamma, m);
    rep.c_gamma = c_gamma;
    add("centerline.self_distance", c_gamma >= cfg.c_gamma_min, c_gamma, cfg.c_gamma_min);

    // -- radius ---------------------------------------------------------------
    const int nr = 4096;
    double sup_a = 0.0, min_lower = std::numeric_limits<double>::max();
    double tip_dev = 0.0, a_star = 0.0, a_star2 = 0.0;
    bool products_finite = true;
    for (int i = 0; i <= nr; ++i) {
        const double s = static_cast<double>(i) / nr;
        const RadiusSample rs = radius.eval(s);
        sup_a = std::max(sup_a, rs.a);
        if (s <= 1.0 - cfg.delta) min_lower = std::min(min_lower, rs.a);
        const double sph = std::sqrt(std::max(1.0 - s * s, 0.0));
        if (s > 1.0 - cfg.delta && sph > 1e-8)
            tip_dev = std::max(tip_dev, std::abs(rs.a - sph) / sph);
        a_star = std::max(a_star, std::abs(rs.a_da));
        a_star2 = std::max(a_star2, std::abs(rs.a3_d2a));
        if (!std::isfinite(rs.a_da) || !std::isfinite(rs.a3_d2a)) products_finite = false;
    }
    rep.a_star = a_star;
    rep.a_star2 = a_star2;
    add("radius.sup_norm", std::abs(sup_a - 1.0) <= 1e-8, sup_a, 1.0, "sup |a| must be 1");
    add("radius.lower_bound", min_lower >= cfg.a0, min_lower, cfg.a0, "a >= a0 on [0, 1-delta]");
    const double tip_tol = cfg.tip_constant * geom.epsilon() * geom.epsilon();
    add("radius.tip_decay", tip_dev <= tip_tol, tip_dev, tip_tol,
        "|a - sqrt(1-s^2)| / sqrt(1-s^2) on (1-delta, 1)");
    add("radius.products_finite", products_finite && std::isfinite(a_star) && std::isfinite(a_star2),
        std::max(a_star, a_star2), std::numeric_limits<double>::infinity(),
        "a* and a** finite");

    // -- frame ----------------------------------------------------------------
    const BishopFrame& frame = geom.frame();
    rep.kappa_max = frame.kappa_max();
    const int nf = frame.samples();
    const double hf = 1.0 / nf;
    double ortho_dev = 0.0, curv_dev = 0.0, ode_res = 0.0;
    for (int i = 0; i <= nf; ++i) {
        const double s = i * hf;
        const BishopFrame::Triad f = frame.at(s);
        ortho_dev = std::max({ortho_dev, std::abs(norm(f.e1) - 1.0), std::abs(norm(f.e2) - 1.0),
                              std::abs(norm(f.e_t) - 1.0), std::abs(dot(f.e1, f.e2)),
                              std::abs(dot(f.e1, f.e_t)), std::abs(dot(f.e2, f.e_t))});
        double k1 = 0.0, k2 = 0.0;
        frame.curvatures(s, k1, k2);
        const double xss2 = norm2(curve.curvature(s));
        curv_dev = std::max(curv_dev, std::abs(k1 * k1 + k2 * k2 - xss2));
        if (i > 0 && i < nf) {
            const Vec3 fd = (frame.at(s + hf).e1 - frame.at(s - hf).e1) / (2.0 * hf);
            ode_res = std::max(ode_res, norm(fd + k1 * f.e_t));
        }
    }
    add("frame.orthonormality", ortho_dev <= 1e-9, ortho_dev, 1e-9);
    add("frame.curvature_identity", curv_dev <= 1e-8, curv_dev, 1e-8);
    const double km = rep.kappa_max;
    const double ode_tol = 100.0 * (1.0 + km * km * km) * hf * hf;
    add("frame.ode_residual", ode_res <= ode_tol, ode_res, ode_tol, "centered FD vs frame ODE");

    // -- vessel ---------------------------------------------------------------
    const double eps = geom.epsilon();
    const double eight_ek = 8.0 * eps * km;
    add("vessel.max_radius_curvature", eight_ek < 1.0, eight_ek, 1.0, "requires eps < 1/(8 kappa*)");

    // injectivity of (r,theta,s) -> x on r <= 2 eps a: points laid on the
    // doubled tube must not be closer to any other part of the centerline
    const int ns_inj = 64, nth_inj = 8;
    std::vector<double> inj_ratio(static_cast<std::size_t>(ns_inj), 1.0);
    par::parallel_for(ns_inj, [&](std::int64_t i) {
        const double s = (static_cast<double>(i) + 0.5) / ns_inj;
        const double ra = 2.0 * eps * radius.value(s);
        if (ra <= 0.0) return;
        double worst = 1.0;
        for (int j = 0; j < nth_inj; ++j) {
            const double theta = 2.0 * M_PI * j / nth_inj;
            const Vec3 x = curve.point(s) + ra * geom.frame().radial(s, theta);
            const auto cp = geom.closest_centerline_point(x);
            worst = std::min(worst, cp.distance / ra);
        }
        inj_ratio[static_cast<std::size_t>(i)] = worst;
    });
    double inj_min = 1.0;
    for (double v : inj_ratio) inj_min = std::min(inj_min, v);
    add("vessel.injectivity", inj_min >= 0.7, inj_min, 0.7,
        "closest-approach ratio on the doubled tube");

    double surf_min_z = std::numeric_limits<double>::max();
    for (int i = 1; i <= 64; ++i) {
        const double s = static_cast<double>(i) / 64.0;
        for (int j = 0; j < 8; ++j)
            surf_min_z = std::min(surf_min_z, geom.surface_point(s, 2.0 * M_PI * j / 8.0).z);
    }
    add("vessel.surface_interior", surf_min_z > 0.0, surf_min_z, 0.0, "surface stays above the wall");

    return rep;
}

} // namespace perfusion
