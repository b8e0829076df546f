#include "perfusion/greens.hpp"

#include <algorithm>
#include <cmath>

#include "perfusion/errors.hpp"
#include "perfusion/quadrature.hpp"

namespace perfusion {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double point_kernel(double d) { return 1.0 / (kFourPi * d); }

} // namespace

double eval_green(const KernelContext& ctx, const Vec3& x, const Vec3& y) {
    const double d = dist(x, y);
    if (d < 1e-14) throw SingularityError("eval_green: coincident points");
    double g = point_kernel(d);
    if (ctx.variant == KernelVariant::HalfSpaceNeumann) {
        const double dim = dist(x, reflect_z(y));
        if (dim < 1e-14) throw SingularityError("eval_green: x coincides with the image point");
        g += point_kernel(dim);
    }
    return g;
}

// ---------------------------------------------------------------------------
// LineDensity
// ---------------------------------------------------------------------------
LineDensity::LineDensity(std::vector<double> grid, std::vector<double> values)
    : t(std::move(grid)), f(std::move(values)) {
    if (t.size() < 2 || t.size() != f.size())
        throw ValidationError("line density needs >= 2 nodes and matching values");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ValidationError("line density grid must be strictly increasing");
}

double LineDensity::value(double ti) const {
    if (ti <= t.front()) return f.front();
    if (ti >= t.back()) return f.back();
    const auto it = std::upper_bound(t.begin(), t.end(), ti);
    const std::size_t j = static_cast<std::size_t>(std::distance(t.begin(), it)) - 1;
    const double lam = (ti - t[j]) / (t[j + 1] - t[j]);
    return (1.0 - lam) * f[j] + lam * f[j + 1];
}

// ---------------------------------------------------------------------------
// SnOperator
// ---------------------------------------------------------------------------
SnOperator::SnOperator(const KernelContext& ctx, const VesselGeometry& geom,
                       std::vector<double> tgrid)
    : ctx_(ctx), geom_(&geom), tgrid_(std::move(tgrid)) {
    if (tgrid_.size() < 2) throw ValidationError("sn operator needs >= 2 grid nodes");
    for (std::size_t i = 1; i < tgrid_.size(); ++i)
        if (!(tgrid_[i] > tgrid_[i - 1]))
            throw ValidationError("sn operator grid must be strictly increasing");
    if (tgrid_.front() < 0.0 || tgrid_.back() > 1.0 + 1e-14)
        throw ValidationError("sn operator grid must lie in [0,1]");

    const double eps = geom.epsilon();
    beta_ = std::sqrt(1.0 - eps * eps);

    // regular composite rule: one panel per density cell plus the tail up to t = 1
    std::vector<std::pair<double, double>> panels;
    for (std::size_t i = 0; i + 1 < tgrid_.size(); ++i) {
        panels.emplace_back(tgrid_[i], tgrid_[i + 1]);
        max_cell_ = std::max(max_cell_, tgrid_[i + 1] - tgrid_[i]);
    }
    if (tgrid_.back() < 1.0 - 1e-14) panels.emplace_back(tgrid_.back(), 1.0);

    const GaussRule& g = gauss_rule(ctx_.order_regular);
    nodes_.reserve(panels.size() * g.x.size());
    for (const auto& [a, b] : panels) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            RegularNode n;
            n.t = mid + half * g.x[q];
            n.w = half * g.w[q];
            n.p = geom.centerline().point(beta_ * n.t);
            density_stencil(n.t, n.cell, n.lambda);
            nodes_.push_back(n);
        }
    }
}

void SnOperator::density_stencil(double t, int& cell, double& lambda) const {
    if (t >= tgrid_.back()) {  // constant extrapolation past the last node
        cell = static_cast<int>(tgrid_.size()) - 2;
        lambda = 1.0;
        return;
    }
    if (t <= tgrid_.front()) {
        cell = 0;
        lambda = 0.0;
        return;
    }
    const auto it = std::upper_bound(tgrid_.begin(), tgrid_.end(), t);
    cell = static_cast<int>(std::distance(tgrid_.begin(), it)) - 1;
    lambda = (t - tgrid_[static_cast<std::size_t>(cell)]) /
             (tgrid_[static_cast<std::size_t>(cell) + 1] - tgrid_[static_cast<std::size_t>(cell)]);
}

Vec3 SnOperator::curve_point(double t, bool image) const {
    const Vec3 p = geom_->centerline().point(beta_ * t);
    return image ? reflect_z(p) : p;
}

Vec3 SnOperator::curve_tangent(double t, bool image) const {
    const Vec3 d = beta_ * geom_->centerline().tangent(beta_ * t);
    return image ? reflect_z(d) : d;
}

Vec3 SnOperator::curve_curv(double t, bool image) const {
    const Vec3 d = (beta_ * beta_) * geom_->centerline().curvature(beta_ * t);
    return image ? reflect_z(d) : d;
}

void SnOperator::accumulate_part(const Vec3& x, bool image,
                                 const std::function<void(int, double)>& sink) const {
    // closest approach of the (possibly reflected) pulled-back centerline
    double t_best = 0.0;
    double d2_best = std::numeric_limits<double>::max();
    for (const RegularNode& n : nodes_) {
        const Vec3 p = image ? reflect_z(n.p) : n.p;
        const double d2 = norm2(x - p);
        if (d2 < d2_best) {
            d2_best = d2;
            t_best = n.t;
        }
    }
    double ts = t_best;
    for (int iter = 0; iter < 30; ++iter) {
        const Vec3 d = x - curve_point(ts, image);
        const Vec3 dp = curve_tangent(ts, image);
        const double g1 = -2.0 * dot(d, dp);
        const double g2 = 2.0 * norm2(dp) - 2.0 * dot(d, curve_curv(ts, image));
        if (g2 <= 0.0) break;
        const double step = std::clamp(-g1 / g2, -0.1, 0.1);
        const double tn = std::clamp(ts + step, 0.0, 1.0);
        if (std::abs(tn - ts) < 1e-14) {
            ts = tn;
            break;
        }
        ts = tn;
    }
    const Vec3 anchor = curve_point(ts, image);
    const double d_min = dist(x, anchor);
    const double s_proj = std::clamp(beta_ * ts, 0.0, 1.0);
    const double a_proj = geom_->radius().value(s_proj);

    if (!image) {
        // domain guard: strictly interior targets are outside S_N's domain
        const double tube = geom_->epsilon() * a_proj;
        if (ts > 0.0 && ts < 1.0 && d_min < tube * (1.0 - 1e-8) - 1e-13)
            throw DomainError("sn_apply: target lies strictly inside the vessel");
    }

    const double near_dist =
        std::max(ctx_.proximity_factor * geom_->epsilon() * a_proj, 2.0 * max_cell_);
    const bool near = ctx_.enable_subtraction && d_min < near_dist;

    if (!near) {
        for (const RegularNode& n : nodes_) {
            const Vec3 p = image ? reflect_z(n.p) : n.p;
            const double c = n.w * point_kernel(dist(x, p));
            sink(n.cell, (1.0 - n.lambda) * c);
            sink(n.cell + 1, n.lambda * c);
        }
        return;
    }

    // --- singularity subtraction against the straight chord at the projection ---
    // f is replaced near t* by its linear part f0 + f1 (t - t*); the chord
    // integrals of both moments have closed forms, and the remainder is smooth
    // enough for graded Gauss panels.
    int cell_s = 0;
    double lam_s = 0.0;
    density_stencil(ts, cell_s, lam_s);
    const double cell_w =
        tgrid_[static_cast<std::size_t>(cell_s) + 1] - tgrid_[static_cast<std::size_t>(cell_s)];
    const bool in_tail = ts >= tgrid_.back();

    auto sink_f0 = [&](double c) {
        sink(cell_s, (1.0 - lam_s) * c);
        sink(cell_s + 1, lam_s * c);
    };
    auto sink_f1 = [&](double c) {
        if (in_tail) return;  // constant extrapolation: no slope
        sink(cell_s, -c / cell_w);
        sink(cell_s + 1, c / cell_w);
    };

    const Vec3 u = curve_tangent(ts, image);  // chord direction, |u| = beta
    const Vec3 w = x - anchor;
    const double aa = norm2(u);
    const double bb = dot(w, u);
    const double cc = norm2(w);
    const double tau0 = bb / aa;
    const double d2 = std::max(cc - bb * bb / aa, 0.0);
    const double sa = std::sqrt(aa);
    const double tau_lo = -ts, tau_hi = 1.0 - ts;
    if (d2 < 1e-28 && tau0 > tau_lo && tau0 < tau_hi)
        throw SingularityError("sn_apply: target lies on the centerline");

    auto chord_q = [&](double tau) { return std::max(aa * tau * tau - 2.0 * bb * tau + cc, 0.0); };
    auto I0 = [&](double tau) {
        if (d2 > 1e-28) return std::asinh((tau - tau0) * sa / std::sqrt(d2)) / sa;
        const double r = tau - tau0;
        return (r > 0.0 ? 1.0 : -1.0) * std::log(std::abs(r) * sa) / sa;
    };
    const double i0 = I0(tau_hi) - I0(tau_lo);
    const double m0 = i0 / kFourPi;
    const double m1 =
        ((std::sqrt(chord_q(tau_hi)) - std::sqrt(chord_q(tau_lo))) / aa + tau0 * i0) / kFourPi;

    // graded panels toward t* for the subtracted remainder
    const double delta = std::max(d_min / beta_, 1e-8);
    std::vector<std::pair<double, double>> panels;
    auto grade = [&panels, delta](double from, double to) {
        // from -> to moving away from the projection point
        const double dir = to > from ? 1.0 : -1.0;
        double a = from, width = delta;
        while (dir * (to - a) > 1e-15) {
            double b = a + dir * width;
            if (dir * (to - b) <= 0.0) b = to;
            panels.emplace_back(std::min(a, b), std::max(a, b));
            a = b;
            width *= 2.0;
        }
    };
    grade(ts, tau_hi + ts);  // up to t = 1
    grade(ts, 0.0);

    const GaussRule& g = gauss_rule(ctx_.order_singular);
    auto chord_point = [&](double t) { return anchor + (t - ts) * u; };
    for (const auto& [a, b] : panels) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double t = mid + half * g.x[q];
            const double wq = half * g.w[q];
            const double kf = point_kernel(dist(x, curve_point(t, image)));
            int cell = 0;
            double lam = 0.0;
            density_stencil(t, cell, lam);
            sink(cell, (1.0 - lam) * wq * kf);
            sink(cell + 1, lam * wq * kf);
            const double kc = point_kernel(dist(x, chord_point(t)));
            sink_f0(-wq * kc);
            sink_f1(-wq * kc * (t - ts));
        }
    }
    sink_f0(m0);
    sink_f1(m1);
}

void SnOperator::accumulate(const Vec3& x, const std::function<void(int, double)>& sink) const {
    if (x.z < -1e-12) throw DomainError("sn_apply: target below the tissue boundary");
    accumulate_part(x, false, sink);
    if (ctx_.variant == KernelVariant::HalfSpaceNeumann) accumulate_part(x, true, sink);
}

double SnOperator::apply(std::span<const double> f, const Vec3& x) const {
    if (f.size() != tgrid_.size()) throw ValidationError("sn apply: density size mismatch");
    double sum = 0.0;
    accumulate(x, [&](int j, double c) { sum += c * f[static_cast<std::size_t>(j)]; });
    return sum;
}

void SnOperator::weights(const Vec3& x, std::span<double> w) const {
    if (w.size() != tgrid_.size()) throw ValidationError("sn weights: span size mismatch");
    std::fill(w.begin(), w.end(), 0.0);
    accumulate(x, [&](int j, double c) { w[static_cast<std::size_t>(j)] += c; });
}

double SnOperator::surface_average(std::span<const double> f, double s) const {
    if (s < 0.0 || s >= 1.0) throw DomainError("sn_surface_average: s must lie in [0,1)");
    const double dtheta = 2.0 * M_PI / ctx_.n_theta;
    double sum = 0.0;
    for (int l = 0; l < ctx_.n_theta; ++l)
        sum += apply(f, geom_->surface_point(s, l * dtheta));
    return sum * dtheta;
}

void SnOperator::surface_average_weights(double s, std::span<double> w) const {
    if (s < 0.0 || s >= 1.0) throw DomainError("sn_surface_average: s must lie in [0,1)");
    if (w.size() != tgrid_.size()) throw ValidationError("sn weights: span size mismatch");
    std::fill(w.begin(), w.end(), 0.0);
    const double dtheta = 2.0 * M_PI / ctx_.n_theta;
    for (int l = 0; l < ctx_.n_theta; ++l) {
        const Vec3 x = geom_->surface_point(s, l * dtheta);
        accumulate(x, [&](int j, double c) { w[static_cast<std::size_t>(j)] += dtheta * c; });
    }
}

double sn_apply(const KernelContext& ctx, const VesselGeometry& geom, const LineDensity& f,
                const Vec3& x) {
    SnOperator op(ctx, geom, f.t);
    return op.apply(f.f, x);
}

double sn_surface_average(const KernelContext& ctx, const VesselGeometry& geom,
                          const LineDensity& f, double s) {
    SnOperator op(ctx, geom, f.t);
    return op.surface_average(f.f, s);
}

} // namespace perfusion
