#include "sew/flux.hpp"

#include "sew/calculus.hpp"
#include "sew/contour.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sew {

namespace {

Point fold(const Domain& d, Point v) {
    if (!d.periodic()) return v;
    v.x -= d.lx() * std::round(v.x / d.lx());
    v.y -= d.ly() * std::round(v.y / d.ly());
    return v;
}

double dist(const Domain& d, Point a, Point b) { return norm(fold(d, b - a)); }

bool in_region(const std::function<bool(Point)>& region, Point p) { return !region || region(p); }

LevelComponent finish_component(LevelComponent c, const Domain& d) {
    if (c.values.empty()) return c;
    const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
    c.spread = *hi - *lo;
    double sum = 0.0;
    for (double v : c.values) sum += v;
    c.mean = sum / static_cast<double>(c.values.size());
    Point acc{};
    for (const Point& p : c.points) acc = acc + fold(d, p - c.points.front());
    c.centroid = d.wrap(c.points.front() + (1.0 / static_cast<double>(c.points.size())) * acc);
    return c;
}

std::vector<Point> thin(const std::vector<Point>& p, std::size_t cap) {
    if (p.size() <= cap) return p;
    std::vector<Point> out;
    const double step = static_cast<double>(p.size()) / static_cast<double>(cap);
    for (std::size_t k = 0; k < cap; ++k) out.push_back(p[static_cast<std::size_t>(k * step)]);
    return out;
}

}  // namespace

Range field_range(const ScalarField& psi, int resolution, const std::function<bool(Point)>& region,
                  const std::vector<double>& critical_values) {
    const GridSpec spec = grid_for(psi.domain(), resolution, resolution);
    std::vector<double> v(spec.size());
    std::vector<std::uint8_t> m(spec.size());
    kernels::sample_values(psi, spec, v, m);
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            if (!m[k] || !in_region(region, spec.node(i, j))) continue;
            r.a = std::min(r.a, v[k]);
            r.b = std::max(r.b, v[k]);
        }
    if (!(r.a <= r.b)) throw FluxError("field_range: no nodes in the region");
    // Extrema between nodes: accept critical values a little outside the sampled range.
    const double slack = 0.05 * std::max(r.b - r.a, 1e-12);
    for (double c : critical_values) {
        if (c < r.a && c > r.a - slack) r.a = c;
        if (c > r.b && c < r.b + slack) r.b = c;
    }
    return r;
}

std::vector<double> chebyshev_levels(Range range, int count) {
    std::vector<double> s;
    for (int k = 0; k < count; ++k)
        s.push_back(range.a + range.width() * 0.5 * (1.0 - std::cos(std::numbers::pi * (k + 0.5) / count)));
    return s;
}

PairCollection collect_pairs(FieldPtr psi, const std::vector<double>& levels, const PairOptions& opts) {
    PairCollection out;
    out.range = opts.range ? *opts.range : field_range(*psi, opts.resolution, opts.region, opts.critical_values);
    const FieldPtr comp = opts.companion ? opts.companion : FieldPtr(laplacian(psi));
    const Domain& dom = psi->domain();
    const GridPtr g = sample_grid(*psi, opts.resolution, opts.resolution);
    const GridSpec& spec = g->spec();
    const double h = std::max(spec.dx, spec.dy);
    const double gap = opts.critical_gap * out.range.width();
    const double edge = 1e-12 * std::max(1.0, out.range.width());

    std::vector<double> use;
    for (double s : levels) {
        if (s < out.range.a - edge || s > out.range.b + edge)
            throw FluxError("collect_pairs: level " + std::to_string(s) + " outside the range");
        bool near = false;
        for (double c : opts.critical_values) near = near || std::abs(s - c) < gap;
        if (near)
            out.skipped.push_back(s);
        else
            use.push_back(s);
    }

    std::vector<LevelSetSample> res(use.size());
    std::vector<std::uint8_t> failed(use.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t li = 0; li < use.size(); ++li) {
        const double s = use[li];
        std::vector<Contour> cs;
        std::vector<std::vector<std::uint8_t>> ok;
        try {
            cs = marching_squares(spec, g->values(), g->mask(), s);
            refine_contours(*psi, s, cs, 2.0 * h, &ok);
        } catch (const std::exception&) {
            failed[li] = 1;
            continue;
        }
        LevelSetSample smp;
        smp.level = s;
        int id = 0;
        for (std::size_t ci = 0; ci < cs.size(); ++ci) {
            LevelComponent c;
            c.closed = cs[ci].closed;
            std::vector<int> labels;
            for (std::size_t pi = 0; pi < cs[ci].points.size(); ++pi) {
                const Point p = dom.wrap(cs[ci].points[pi]);
                if (!ok[ci][pi] || !dom.contains(p) || !in_region(opts.region, p)) continue;
                const double v = comp->value(p);
                if (!std::isfinite(v)) continue;
                c.points.push_back(p);
                c.values.push_back(v);
                if (opts.branch_label) labels.push_back(opts.branch_label(p));
            }
            if (c.values.size() < 3) continue;
            if (!labels.empty()) {
                std::sort(labels.begin(), labels.end());
                c.label = labels[labels.size() / 2];
            }
            c.id = id++;
            smp.components.push_back(finish_component(std::move(c), dom));
        }
        if (smp.components.empty()) failed[li] = 1;
        res[li] = std::move(smp);
    }
    for (std::size_t li = 0; li < use.size(); ++li) {
        if (failed[li])
            out.skipped.push_back(use[li]);
        else
            out.samples.push_back(std::move(res[li]));
    }
    std::sort(out.skipped.begin(), out.skipped.end());
    return out;
}

PairCollection collect_pairs(FieldPtr psi, int count, const PairOptions& opts) {
    PairOptions o = opts;
    if (!o.range) o.range = field_range(*psi, o.resolution, o.region, o.critical_values);
    return collect_pairs(std::move(psi), chebyshev_levels(*o.range, count), o);
}

std::vector<LevelSetSample> probe_pairs(const ScalarField& psi, const ScalarField& companion, Range range,
                                        bool at_b, const std::vector<ProbeRay>& rays, double window, int count) {
    const Domain& dom = psi.domain();
    std::vector<LevelSetSample> out;
    for (int j = 0; j < count; ++j) {
        const double u = window * range.width() * std::ldexp(1.0, -j);
        const double s = at_b ? range.b - u : range.a + u;
        LevelSetSample smp;
        smp.level = s;
        smp.probe = true;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            const ProbeRay& ray = rays[r];
            const Point d = (1.0 / norm(ray.direction)) * ray.direction;
            auto at = [&](double t) { return ray.origin + t * d; };
            auto phi = [&](double t) { return psi.value(at(t)) - s; };
            const int steps = 512;
            const double s0 = phi(0.0);
            double lo = 0.0, hi = -1.0;
            for (int k = 1; k <= steps; ++k) {
                const double t = ray.length * k / steps;
                if (!dom.contains(at(t))) break;
                const double v = phi(t);
                if (v == 0.0 || (v > 0.0) != (s0 > 0.0)) {
                    hi = t;
                    break;
                }
                lo = t;
            }
            if (hi < 0.0) continue;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double v = phi(mid);
                if (v == 0.0) {
                    lo = hi = mid;
                    break;
                }
                ((v > 0.0) == (s0 > 0.0) ? lo : hi) = mid;
            }
            const Point p = dom.wrap(at(0.5 * (lo + hi)));
            LevelComponent c;
            c.id = static_cast<int>(smp.components.size());
            c.label = ray.label;
            c.points = {p};
            c.values = {companion.value(p)};
            smp.components.push_back(finish_component(std::move(c), dom));
        }
        if (!smp.components.empty()) out.push_back(std::move(smp));
    }
    return out;
}

double hausdorff(const std::vector<Point>& p, const std::vector<Point>& q, const Domain& domain) {
    if (p.empty() || q.empty()) return std::numeric_limits<double>::infinity();
    const auto a = thin(p, 256), b = thin(q, 256);
    auto directed = [&](const std::vector<Point>& x, const std::vector<Point>& y) {
        double worst = 0.0;
        for (const Point& u : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& v : y) best = std::min(best, dist(domain, u, v));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<int> match_components(const LevelSetSample& coarse, const LevelSetSample& fine, const Domain& domain) {
    std::vector<int> m;
    for (const auto& f : fine.components) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < coarse.components.size(); ++k) {
            const double d = hausdorff(coarse.components[k].points, f.points, domain);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(k);
            }
        }
        m.push_back(best);
    }
    return m;
}

FluxFunction::FluxFunction(Range range, std::vector<std::pair<double, double>> knots) : range_(range) {
    std::sort(knots.begin(), knots.end());
    const double merge = 1e-14 * std::max(1.0, range.width());
    for (std::size_t k = 0; k < knots.size();) {
        std::size_t e = k;
        double sum = 0.0;
        while (e < knots.size() && knots[e].first - knots[k].first <= merge) sum += knots[e++].second;
        knots_.push_back({knots[k].first, sum / static_cast<double>(e - k)});
        k = e;
    }
    for (const auto& kn : knots_) t_.push_back(t_of(kn.first));
    // Interpolate the deviation from the least-squares line; linear profiles
    // are then reproduced exactly.
    if (knots_.size() >= 2) {
        double ms = 0, mf = 0;
        for (const auto& [x, f] : knots_) {
            ms += x;
            mf += f;
        }
        ms /= static_cast<double>(knots_.size());
        mf /= static_cast<double>(knots_.size());
        double sxy = 0, sxx = 0;
        for (const auto& [x, f] : knots_) {
            sxy += (x - ms) * (f - mf);
            sxx += (x - ms) * (x - ms);
        }
        slope_ = sxx > 0.0 ? sxy / sxx : 0.0;
        offset_ = mf - slope_ * ms;
    }
    for (const auto& [x, f] : knots_) dev_.push_back(f - offset_ - slope_ * x);
}

double FluxFunction::t_of(double s) const {
    const double x = std::clamp(1.0 - 2.0 * (s - range_.a) / range_.width(), -1.0, 1.0);
    return std::acos(x) / std::numbers::pi;
}

double FluxFunction::operator()(double s) const {
    if (knots_.empty()) throw FluxError("empty flux function");
    const std::size_t n = knots_.size();
    if (n == 1) return knots_[0].second;
    const double trend = offset_ + slope_ * s;
    const double t = t_of(s);
    const std::size_t hi = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
    const std::size_t w = std::min<std::size_t>(4, n);
    std::size_t start = hi >= 2 ? hi - 2 : 0;
    start = std::min(start, n - w);
    double sum = 0.0;
    for (std::size_t i = start; i < start + w; ++i) {
        double l = 1.0;
        for (std::size_t k = start; k < start + w; ++k)
            if (k != i) l *= (t - t_[k]) / (t_[i] - t_[k]);
        sum += l * dev_[i];
    }
    return trend + sum;
}

std::string to_string(FluxVerdict v) {
    return v == FluxVerdict::SingleValued ? "single-valued" : "branch-discrepancy";
}

std::string to_string(Endpoint e) { return e == Endpoint::A ? "a" : "b"; }

double branch_tolerance(double steady_residual) { return std::max(10.0 * steady_residual, 1e-8); }

FluxRelation extract_flux(const PairCollection& pairs, double tol_branch) {
    FluxRelation fr;
    fr.range = pairs.range;
    fr.tol_branch = tol_branch;
    fr.skipped = pairs.skipped;
    for (const auto& s : pairs.samples)
        if (!s.probe && !s.components.empty()) ++fr.contour_levels;
    if (fr.contour_levels == 0) throw FluxError("extract_flux: all levels skipped");
    if (fr.contour_levels < 16)
        throw FluxError("extract_flux: too few levels (" + std::to_string(fr.contour_levels) + " < 16)");

    std::vector<std::pair<double, double>> knots;
    std::map<int, std::vector<std::pair<double, double>>> by_label;
    std::map<int, bool> label_ok;
    bool single = true;
    for (const auto& smp : pairs.samples) {
        if (smp.components.empty()) continue;
        BranchRow row;
        row.level = smp.level;
        row.probe = smp.probe;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        std::size_t n = 0;
        for (const auto& c : smp.components)
            for (double v : c.values) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
                ++n;
            }
        row.spread = hi - lo;
        single = single && row.spread <= tol_branch;
        fr.max_spread = std::max(fr.max_spread, row.spread);

        std::vector<const LevelComponent*> order;
        for (const auto& c : smp.components) order.push_back(&c);
        std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->mean < y->mean; });
        for (std::size_t k = 0; k < order.size();) {
            std::size_t e = k;
            BranchEntry be;
            double acc = 0.0;
            while (e < order.size() && order[e]->mean - order[k]->mean <= tol_branch) {
                be.components.push_back(order[e]->id);
                be.labels.push_back(order[e]->label);
                acc += order[e]->mean;
                ++e;
            }
            be.value = acc / static_cast<double>(e - k);
            row.branches.push_back(std::move(be));
            k = e;
        }
        knots.push_back({smp.level, sum / static_cast<double>(n)});

        std::map<int, std::vector<double>> lv;
        for (const auto& c : smp.components) lv[c.label].insert(lv[c.label].end(), c.values.begin(), c.values.end());
        for (const auto& [label, vals] : lv) {
            const auto [a, b] = std::minmax_element(vals.begin(), vals.end());
            double m = 0.0;
            for (double v : vals) m += v;
            by_label[label].push_back({smp.level, m / static_cast<double>(vals.size())});
            if (!label_ok.count(label)) label_ok[label] = true;
            label_ok[label] = label_ok[label] && (*b - *a) <= tol_branch;
        }
        fr.table.push_back(std::move(row));
    }
    fr.verdict = single ? FluxVerdict::SingleValued : FluxVerdict::BranchDiscrepancy;
    fr.mean_profile = FluxFunction(fr.range, knots);
    if (single) fr.F = fr.mean_profile;
    if (by_label.size() > 1)
        for (auto& [label, kn] : by_label)
            if (label_ok[label]) fr.branches.emplace(label, FluxFunction(fr.range, std::move(kn)));
    for (const auto& smp : pairs.samples)
        for (const auto& c : smp.components)
            for (double v : c.values)
                fr.sup_deviation = std::max(fr.sup_deviation, std::abs(v - fr.mean_profile(smp.level)));
    return fr;
}

double PuiseuxSeries::coefficient(int k) const {
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (indices[i] == k) return coefficients[i];
    return 0.0;
}

namespace {

struct LatticeFit {
    std::vector<int> indices;
    std::vector<double> coeffs;
    double residual = std::numeric_limits<double>::infinity();
};

LatticeFit fit_lattice(const std::vector<double>& u, const std::vector<double>& F, int k0, int first, int terms,
                       double scale) {
    LatticeFit lf;
    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    Eigen::MatrixXd A(n, terms);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = F[static_cast<std::size_t>(i)];
        for (int k = 0; k < terms; ++k)
            A(i, k) = std::pow(u[static_cast<std::size_t>(i)], static_cast<double>(first + k) / k0);
    }
    Eigen::VectorXd cs = A.colwise().norm().transpose();
    for (int k = 0; k < terms; ++k)
        if (cs(k) > 0.0) A.col(k) /= cs(k);
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd r = A * x - y;
    for (int k = 0; k < terms; ++k) {
        lf.indices.push_back(first + k);
        lf.coeffs.push_back(cs(k) > 0.0 ? x(k) / cs(k) : 0.0);
    }
    lf.residual = std::sqrt(r.squaredNorm() / static_cast<double>(n)) / scale;
    return lf;
}

/// Leading exponents of r(u) by repeated log-log regression on the smallest u.
std::vector<double> peel_exponents(const std::vector<double>& u, std::vector<double> r, double noise, int terms) {
    std::vector<double> ex;
    for (int t = 0; t < terms; ++t) {
        std::vector<std::size_t> idx(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return u[a] < u[b]; });
        std::vector<std::size_t> use;
        for (std::size_t i : idx)
            if (std::abs(r[i]) > 1e3 * noise && use.size() < 5) use.push_back(i);
        if (use.size() < 3) break;
        double mx = 0, my = 0;
        for (std::size_t i : use) {
            mx += std::log(u[i]);
            my += std::log(std::abs(r[i]));
        }
        mx /= static_cast<double>(use.size());
        my /= static_cast<double>(use.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i : use) {
            sxy += (std::log(u[i]) - mx) * (std::log(std::abs(r[i])) - my);
            sxx += (std::log(u[i]) - mx) * (std::log(u[i]) - mx);
        }
        const double e = sxy / sxx;
        if (!std::isfinite(e)) break;
        ex.push_back(e);
        // Coefficient by least squares on all samples with the exponent fixed.
        double num = 0, den = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double b = std::pow(u[i], e);
            num += b * r[i];
            den += b * b;
        }
        const double c = num / den;
        for (std::size_t i = 0; i < u.size(); ++i) r[i] -= c * std::pow(u[i], e);
    }
    return ex;
}

}  // namespace

PuiseuxSeries fit_puiseux(const FluxFunction& F, Endpoint endpoint, const PuiseuxOptions& opts) {
    PuiseuxSeries ps;
    ps.endpoint = endpoint;
    const Range R = F.range();
    ps.e = endpoint == Endpoint::B ? R.b : R.a;
    std::vector<double> u, v;
    const double w = opts.window * R.width() * (1.0 + 1e-9);
    for (const auto& [s, f] : F.knots()) {
        const double d = endpoint == Endpoint::B ? R.b - s : s - R.a;
        if (d > 0.0 && d <= w) {
            u.push_back(d);
            v.push_back(f);
        }
    }
    ps.samples = u.size();
    if (u.size() < 12)
        throw FluxError("fit_puiseux: " + std::to_string(u.size()) + " samples in the endpoint window (need 12)");
    double scale = 0.0;
    for (double f : v) scale = std::max(scale, std::abs(f));
    if (scale == 0.0) scale = 1.0;
    const int n = static_cast<int>(u.size());

    LatticeFit best;
    if (endpoint == Endpoint::B) {
        std::vector<LatticeFit> fits;
        for (int k0 = 1; k0 <= opts.k0_max; ++k0)
            fits.push_back(fit_lattice(u, v, k0, k0 - 1, std::min({4 * k0 + 1, 12, n - 2}), scale));
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& f : fits) mn = std::min(mn, f.residual);
        for (int k0 = 1; k0 <= opts.k0_max; ++k0)
            if (fits[static_cast<std::size_t>(k0 - 1)].residual <= std::max(2.0 * mn, 1e-12)) {
                best = fits[static_cast<std::size_t>(k0 - 1)];
                ps.k0 = k0;
                break;
            }
    } else {
        ps.k0 = 2;
        best = fit_lattice(u, v, 2, 0, std::min(9, n - 2), scale);
    }
    ps.indices = best.indices;
    ps.coefficients = best.coeffs;
    ps.residual = best.residual;
    ps.detected = ps.residual <= opts.tol_fit;
    if (!ps.detected) ps.note = "no Puiseux structure detected at this resolution";

    const double zero = opts.zero_tol * scale;
    if (endpoint == Endpoint::B) {
        ps.leading_sign = ps.coefficient(ps.k0 - 1) < 0.0;
        ps.analytic = ps.k0 == 1;
    } else {
        for (std::size_t i = 0; i < ps.indices.size(); ++i)
            if (ps.indices[i] % 2 == 1 && std::abs(ps.coefficients[i]) > zero) {
                ps.first_odd_index = ps.indices[i];
                break;
            }
        ps.leading_sign = ps.first_odd_index >= 0;
        ps.analytic = ps.first_odd_index < 0;
    }

    const double Fe = ps.coefficient(0);
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] - Fe;
    ps.exponents = peel_exponents(u, r, std::max(10.0 * ps.residual, 1e-12) * scale, 4);
    if (!ps.exponents.empty()) {
        ps.leading_exponent = ps.exponents.front();
    } else {
        for (std::size_t i = 0; i < ps.indices.size(); ++i)
            if (ps.indices[i] > 0 && std::abs(ps.coefficients[i]) > zero) {
                ps.leading_exponent = static_cast<double>(ps.indices[i]) / ps.k0;
                break;
            }
    }
    ps.holder_exponent = ps.leading_exponent > 0.0 ? std::min(1.0, ps.leading_exponent) : 1.0;
    return ps;
}

PuiseuxSeries fit_puiseux(const FluxRelation& flux, Endpoint endpoint, const PuiseuxOptions& opts,
                          std::optional<int> branch) {
    if (branch) {
        auto it = flux.branches.find(*branch);
        if (it == flux.branches.end()) throw FluxError("fit_puiseux: no single-valued branch " + std::to_string(*branch));
        PuiseuxSeries ps = fit_puiseux(it->second, endpoint, opts);
        ps.branch = branch;
        return ps;
    }
    if (!flux.F) throw FluxError("fit_puiseux: flux relation is not single-valued");
    return fit_puiseux(*flux.F, endpoint, opts);
}

double verify_flux_residual(FieldPtr psi, const FluxFunction& F, const VerifyOptions& opts) {
    const FieldPtr comp = opts.companion ? opts.companion : FieldPtr(laplacian(psi));
    const GridPtr g = sample_grid(*psi, opts.resolution, opts.resolution);
    const GridSpec& spec = g->spec();
    std::vector<std::uint8_t> include = fd::interior_mask(*g, opts.margin);
    const Range R = F.range();
    const double edge = 1e-12 * std::max(1.0, R.width());
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            if (!include[k]) continue;
            const double s = g->values()[k];
            if (s < R.a - edge || s > R.b + edge || !in_region(opts.region, spec.node(i, j))) include[k] = 0;
        }
    std::vector<double> res(spec.size());
    kernels::evaluate(
        spec, include, [&](Point p) { return comp->value(p) - F(psi->value(p)); }, res);
    return kernels::norms(spec, res, include).sup;
}

double verify_flux_residual(FieldPtr psi, const FluxRelation& flux, const VerifyOptions& opts) {
    if (!flux.F) throw FluxError("verify_flux_residual: flux relation is not single-valued");
    return verify_flux_residual(std::move(psi), *flux.F, opts);
}

namespace {

std::vector<ProbeRay> rays_from(Point o, const Domain& d, int count) {
    const Box b = d.bounding_box();
    const double L = d.periodic() ? 0.5 * std::min(b.width(), b.height()) : std::hypot(b.width(), b.height());
    std::vector<ProbeRay> rays;
    for (int k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * (k + 0.25) / count;
        rays.push_back({o, {std::cos(a), std::sin(a)}, L, 0});
    }
    return rays;
}

}  // namespace

FluxAnalysis analyze_flux(FieldPtr psi, const FluxAnalysisOptions& opts) {
    FluxAnalysis out;
    const Domain& dom = psi->domain();
    ResidualOptions ro;
    ro.resolution = opts.resolution;
    ro.region = opts.region;
    if (opts.companion && psi->source() != FieldSource::Grid && opts.companion->source() != FieldSource::Grid) {
        // Pair residual {psi, g} with exact jets.
        const OperatorPtr br = poisson_bracket(psi, opts.companion);
        const GridSpec spec = grid_for(dom, opts.resolution, opts.resolution);
        std::vector<std::uint8_t> include(spec.size(), 0);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                const Point p = spec.node(i, j);
                include[spec.index(i, j)] = dom.contains(p) && in_region(opts.region, p);
            }
        std::vector<double> v(spec.size());
        kernels::evaluate(spec, include, [&](Point p) { return br->value(p); }, v);
        out.steady_residual = kernels::norms(spec, v, include).sup;
    } else {
        out.steady_residual = steady_residual(psi, ro).sup;
    }
    const double tol = opts.tol_branch >= 0.0 ? opts.tol_branch : branch_tolerance(out.steady_residual);

    std::vector<double> crit;
    std::vector<std::pair<Point, double>> extrema;
    if (opts.critical_values) {
        crit = *opts.critical_values;
    } else {
        CriticalSetOptions co;
        co.resolution = std::min(opts.resolution, 128);
        const CriticalSetReport rep = find_critical_set(*psi, co);
        for (const auto& c : rep.components)
            for (std::size_t k = 0; k < c.points.size(); k += std::max<std::size_t>(1, c.points.size() / 8)) {
                const Point p = c.points[k];
                if (!dom.contains(p) || !in_region(opts.region, p)) continue;
                crit.push_back(psi->value(p));
                if (c.kind == ComponentKind::IsolatedPoint) extrema.push_back({p, crit.back()});
            }
        for (const auto& b : rep.branch_points)
            if (dom.contains(b.point)) crit.push_back(psi->value(b.point));
    }

    PairOptions po;
    po.resolution = opts.resolution;
    po.companion = opts.companion;
    po.region = opts.region;
    po.branch_label = opts.branch_label;
    po.critical_values = crit;
    po.range = opts.range ? *opts.range : field_range(*psi, opts.resolution, opts.region, crit);
    out.pairs = collect_pairs(psi, opts.levels, po);
    const Range R = out.pairs.range;
    const FieldPtr comp = opts.companion ? opts.companion : FieldPtr(laplacian(psi));

    const double hit = 1e-6 * std::max(1.0, R.width());
    auto auto_rays = [&](bool at_b) {
        std::vector<ProbeRay> rays;
        for (const auto& [p, v] : extrema)
            if (std::abs(v - (at_b ? R.b : R.a)) <= hit) {
                auto r = rays_from(p, dom, 8);
                rays.insert(rays.end(), r.begin(), r.end());
            }
        if (rays.empty() && !dom.periodic())
            // Endpoint attained on the boundary: rays from the opposite extremum.
            for (const auto& [p, v] : extrema)
                if (std::abs(v - (at_b ? R.a : R.b)) <= hit) {
                    auto r = rays_from(p, dom, 8);
                    rays.insert(rays.end(), r.begin(), r.end());
                }
        if (opts.branch_label)
            for (auto& r : rays) r.label = opts.branch_label(r.origin + (0.5 * r.length) * r.direction);
        return rays;
    };
    const auto rays_b = opts.rays_b.empty() ? auto_rays(true) : opts.rays_b;
    const auto rays_a = opts.rays_a.empty() ? auto_rays(false) : opts.rays_a;
    for (bool at_b : {false, true}) {
        const auto& rays = at_b ? rays_b : rays_a;
        if (rays.empty()) {
            out.warnings.push_back("no probe rays toward endpoint " + std::string(at_b ? "b" : "a"));
            continue;
        }
        auto extra = probe_pairs(*psi, *comp, R, at_b, rays, opts.window, opts.probe_count);
        out.pairs.samples.insert(out.pairs.samples.end(), extra.begin(), extra.end());
    }
    std::stable_sort(out.pairs.samples.begin(), out.pairs.samples.end(),
                     [](const auto& x, const auto& y) { return x.level < y.level; });
    out.relation = extract_flux(out.pairs, tol);

    PuiseuxOptions pu;
    pu.k0_max = opts.k0_max;
    pu.window = opts.window;
    auto attempt = [&](auto&& fn) {
        try {
            fn();
        } catch (const FluxError& e) {
            out.warnings.push_back(e.what());
        }
    };
    if (out.relation.F) {
        attempt([&] { out.puiseux_a = fit_puiseux(out.relation, Endpoint::A, pu); });
        attempt([&] { out.puiseux_b = fit_puiseux(out.relation, Endpoint::B, pu); });
        VerifyOptions vo;
        vo.resolution = opts.resolution;
        vo.region = opts.region;
        vo.companion = opts.companion;
        out.verify_residual = verify_flux_residual(psi, out.relation, vo);
    }
    for (const auto& [label, fn] : out.relation.branches)
        attempt([&, label = label] { out.branch_a.emplace(label, fit_puiseux(out.relation, Endpoint::A, pu, label)); });
    return out;
}

}  // namespace sew
