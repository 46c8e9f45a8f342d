#include "sew/critical_set.hpp"

#include "sew/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace sew {

namespace {

double jet_scale(const Jet& j, int K) {
    double s = 0.0;
    for (int k = 0; k <= K; ++k) s = std::max(s, j.max_coefficient(k));
    return s;
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

}  // namespace

std::string to_string(ComponentKind k) {
    switch (k) {
        case ComponentKind::IsolatedPoint: return "isolated-point";
        case ComponentKind::Arc: return "arc";
        case ComponentKind::Loop: return "loop";
        case ComponentKind::FlatRegion: return "flat-region";
    }
    return "unknown";
}

double default_degree_tolerance(const ScalarField& f) { return f.source() == FieldSource::Grid ? 1e-4 : 1e-7; }

DegreeResult vanishing_degree(const ScalarField& f, Point p, int max_order, double tol) {
    const int K = max_order < 0 ? f.max_order() : std::min(max_order, f.max_order());
    if (tol < 0.0) tol = default_degree_tolerance(f);
    const Box b = f.domain().bounding_box();
    const double margin = 1e-9 * std::max({1.0, b.width(), b.height()});
    if (!f.domain().contains(f.domain().wrap(p), margin)) throw FieldError("vanishing_degree: point outside domain");
    const Jet j = f.jet(p, K);
    const double threshold = tol * jet_scale(j, K);
    DegreeResult r;
    r.point = p;
    double lower = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double m = j.max_coefficient(k);
        if (m > threshold && m > 0.0) {
            r.degree = k;
            r.leading_norm = m;
            r.confidence = m / std::max(lower, threshold > 0.0 ? threshold : std::numeric_limits<double>::min());
            return r;
        }
        lower = std::max(lower, m);
    }
    r.degree = K + 1;
    r.exceeds = true;
    return r;
}

Point polish_critical_point(const ScalarField& f, Point p, int degree, double max_shift) {
    if (degree < 2) return p;
    const int d = std::min(degree, f.max_order());
    const Point start = p;
    auto residual = [&](const Jet& j, std::vector<double>& r, std::vector<Point>* grad) {
        r.clear();
        if (grad) grad->clear();
        for (int k = 1; k < d; ++k)
            for (int b = 0; b <= k; ++b) {
                const int a = k - b;
                r.push_back(j(a, b));
                if (grad) grad->push_back({(a + 1) * j(a + 1, b), (b + 1) * j(a, b + 1)});
            }
    };
    auto sumsq = [](const std::vector<double>& r) {
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    };
    std::vector<double> r, rt;
    std::vector<Point> J;
    Jet j = f.jet(p, d);
    residual(j, r, &J);
    double cost = sumsq(r);
    const double scale = std::max(jet_scale(j, d), 1e-300);
    double mu = 1e-10;
    for (int it = 0; it < 200 && cost > 0.0; ++it) {
        double a = 0, bb = 0, c = 0, gx = 0, gy = 0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            a += J[k].x * J[k].x;
            bb += J[k].x * J[k].y;
            c += J[k].y * J[k].y;
            gx += J[k].x * r[k];
            gy += J[k].y * r[k];
        }
        const double tr = a + c;
        if (!(tr > 0.0)) break;
        bool accepted = false;
        for (int tries = 0; tries < 12 && !accepted; ++tries) {
            const double am = a + mu * tr, cm = c + mu * tr;
            const double det = am * cm - bb * bb;
            if (!(det > 0.0)) {
                mu *= 10;
                continue;
            }
            const Point step{-(cm * gx - bb * gy) / det, -(am * gy - bb * gx) / det};
            const Point q = p + step;
            if (norm(q - start) > max_shift) {
                mu *= 10;
                continue;
            }
            const Jet jq = f.jet(q, d);
            residual(jq, rt, nullptr);
            const double ct = sumsq(rt);
            if (ct < cost) {
                const double moved = norm(step);
                p = q;
                j = jq;
                residual(j, r, &J);
                cost = ct;
                mu = std::max(mu * 0.1, 1e-14);
                accepted = true;
                if (moved <= 1e-16 * (1.0 + norm(p))) return p;
            } else {
                mu *= 10;
            }
        }
        if (!accepted) break;
        if (std::sqrt(cost) <= 1e-17 * scale) break;
    }
    return p;
}

Point CriticalSetReport::delta(Point a, Point b) const {
    Point d = b - a;
    if (grid.periodic) {
        const double lx = grid.nx * grid.dx, ly = grid.ny * grid.dy;
        d.x -= lx * std::round(d.x / lx);
        d.y -= ly * std::round(d.y / ly);
    }
    return d;
}

bool CriticalSetReport::has_curves() const {
    return std::any_of(components.begin(), components.end(), [](const CriticalComponent& c) {
        return c.is_curve() || c.kind == ComponentKind::FlatRegion;
    });
}

std::vector<double> CriticalSetReport::critical_values(const ScalarField& f) const {
    std::vector<double> v;
    for (const auto& c : components)
        for (std::size_t k = 0; k < c.points.size(); k += std::max<std::size_t>(1, c.points.size() / 4))
            v.push_back(f.value(c.points[k]));
    for (const auto& b : branch_points) v.push_back(f.value(b.point));
    std::sort(v.begin(), v.end());
    return v;
}

namespace {

struct Refined {
    std::size_t node = 0;
    Point point;
    int degree = 0;
    bool ok = false;
    double hessian = 0.0;
};

/// Greedy nearest-neighbour ordering of points along a curve.
std::vector<std::size_t> chain_order(const std::vector<Point>& pts, const CriticalSetReport& rep, double reach) {
    const std::size_t n = pts.size();
    if (n == 0) return {};
    auto dist = [&](std::size_t a, std::size_t b) { return norm(rep.delta(pts[a], pts[b])); };
    auto farthest = [&](std::size_t from) {
        std::size_t best = from;
        double bd = -1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (dist(from, k) > bd) {
                bd = dist(from, k);
                best = k;
            }
        return best;
    };
    const std::size_t start = farthest(farthest(0));
    std::vector<char> used(n, 0);
    std::vector<std::size_t> order{start};
    used[start] = 1;
    for (;;) {
        const std::size_t cur = order.back();
        std::size_t best = n;
        double bd = reach;
        for (std::size_t k = 0; k < n; ++k)
            if (!used[k] && dist(cur, k) < bd) {
                bd = dist(cur, k);
                best = k;
            }
        if (best == n) break;
        used[best] = 1;
        order.push_back(best);
    }
    return order;
}

std::vector<Point> dedupe(const std::vector<Point>& pts, const CriticalSetReport& rep, double spacing,
                          std::vector<std::size_t>* kept = nullptr) {
    std::vector<Point> out;
    if (kept) kept->clear();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        bool close = false;
        for (const Point& q : out)
            if (norm(rep.delta(q, pts[k])) < spacing) {
                close = true;
                break;
            }
        if (!close) {
            out.push_back(pts[k]);
            if (kept) kept->push_back(k);
        }
    }
    return out;
}

double max_turning(const std::vector<Point>& pts, bool closed, const CriticalSetReport& rep) {
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;
    double worst = 0.0;
    const std::size_t last = closed ? n : n - 2;
    for (std::size_t k = 0; k < last; ++k) {
        const Point a = rep.delta(pts[k], pts[(k + 1) % n]);
        const Point b = rep.delta(pts[(k + 1) % n], pts[(k + 2) % n]);
        worst = std::max(worst, std::abs(std::atan2(cross(a, b), dot(a, b))));
    }
    return worst;
}

}  // namespace

CriticalSetReport find_critical_set(const ScalarField& f, const CriticalSetOptions& opts) {
    CriticalSetReport rep;
    const Domain& dom = f.domain();
    const GridSpec spec = grid_for(dom, opts.resolution, opts.resolution);
    rep.grid = spec;
    rep.tol_degree = opts.tol_degree < 0.0 ? default_degree_tolerance(f) : opts.tol_degree;
    const double h = std::max(spec.dx, spec.dy);
    const bool closed_form = f.source() != FieldSource::Grid;
    const int K = f.max_order();
    const std::size_t N = spec.size();
    rep.candidate.assign(N, 0);
    rep.active.assign(N, 0);
    std::vector<double> hess(N, 0.0);

    // Closed forms can be probed slightly outside the domain so that critical
    // curves lying on the boundary are still found.
    auto probe_ok = [&](Point p) { return closed_form ? dom.contains(p, 2.0 * h) : dom.contains(p); };
    kernels::for_each_node(spec, [&](int i, int j) {
        const std::size_t k = spec.index(i, j);
        const Point p = spec.node(i, j);
        rep.active[k] = dom.contains(p) ? 1 : 0;
        if (!probe_ok(p)) return;
        if (!closed_form && !rep.active[k]) return;
        Jet jt;
        try {
            jt = f.jet(p, 2);
        } catch (const FieldError&) {
            return;
        }
        const double g = std::hypot(jt(1, 0), jt(0, 1));
        const double H = std::sqrt(4 * jt(2, 0) * jt(2, 0) + 2 * jt(1, 1) * jt(1, 1) + 4 * jt(0, 2) * jt(0, 2));
        hess[k] = H;
        if (g <= h * H) rep.candidate[k] = 1;
    });

    std::vector<std::size_t> cand;
    for (std::size_t k = 0; k < N; ++k)
        if (rep.candidate[k]) cand.push_back(k);

    const double closure_margin = 1e-9 * std::max(1.0, h * spec.nx);
    std::vector<Refined> refined(cand.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cand.size()); ++c) {
        Refined& r = refined[static_cast<std::size_t>(c)];
        r.node = cand[static_cast<std::size_t>(c)];
        r.hessian = hess[r.node];
        const Point p0 = spec.node(static_cast<int>(r.node % spec.nx), static_cast<int>(r.node / spec.nx));
        try {
            Point p = polish_critical_point(f, p0, 2, 2.0 * h);
            int d = 1;
            for (int round = 0; round < 4; ++round) {
                if (!dom.contains(dom.wrap(p), closure_margin)) break;
                const DegreeResult dr = vanishing_degree(f, p, K, rep.tol_degree * 1e3);
                if (dr.exceeds || dr.degree <= d) {
                    d = dr.exceeds ? K + 1 : std::max(d, dr.degree);
                    break;
                }
                d = dr.degree;
                p = polish_critical_point(f, p, d, 2.0 * h);
            }
            if (!dom.contains(dom.wrap(p), closure_margin)) continue;
            p = dom.wrap(p);
            const DegreeResult fin = vanishing_degree(f, p, K, rep.tol_degree);
            if (fin.degree < 2) continue;
            r.point = p;
            r.degree = fin.degree;
            r.ok = true;
        } catch (const FieldError&) {
        }
    }

    // 8-connected clusters of candidate nodes.
    std::vector<int> cluster(N, -1);
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t seed : cand) {
        if (cluster[seed] >= 0) continue;
        const int id = static_cast<int>(clusters.size());
        clusters.emplace_back();
        std::deque<std::size_t> q{seed};
        cluster[seed] = id;
        while (!q.empty()) {
            const std::size_t k = q.front();
            q.pop_front();
            clusters.back().push_back(k);
            const int i = static_cast<int>(k % spec.nx), j = static_cast<int>(k / spec.nx);
            for (int b = -1; b <= 1; ++b)
                for (int a = -1; a <= 1; ++a) {
                    int ii = i + a, jj = j + b;
                    if (spec.periodic) {
                        ii = wrap_index(ii, spec.nx);
                        jj = wrap_index(jj, spec.ny);
                    } else if (ii < 0 || jj < 0 || ii >= spec.nx || jj >= spec.ny) {
                        continue;
                    }
                    const std::size_t kk = spec.index(ii, jj);
                    if (rep.candidate[kk] && cluster[kk] < 0) {
                        cluster[kk] = id;
                        q.push_back(kk);
                    }
                }
        }
    }
    std::map<std::size_t, std::size_t> refined_of;
    for (std::size_t c = 0; c < refined.size(); ++c) refined_of[refined[c].node] = c;

    for (const auto& nodes : clusters) {
        std::vector<const Refined*> good;
        for (std::size_t k : nodes) {
            const Refined& r = refined[refined_of[k]];
            if (r.ok) good.push_back(&r);
        }
        if (good.empty()) continue;
        const std::size_t flat = static_cast<std::size_t>(
            std::count_if(good.begin(), good.end(), [&](const Refined* r) { return r->degree > K; }));
        if (2 * flat >= good.size() && good.size() > 16) {
            CriticalComponent c;
            c.kind = ComponentKind::FlatRegion;
            c.anomalous = true;
            c.nodes = nodes;
            for (const Refined* r : good) {
                c.points.push_back(r->point);
                c.degrees.push_back(r->degree);
            }
            c.constant_degree = std::all_of(c.degrees.begin(), c.degrees.end(), [&](int d) { return d == c.degrees[0]; });
            c.modal_degree = K + 1;
            rep.components.push_back(std::move(c));
            continue;
        }

        std::vector<Point> pts;
        std::vector<int> degs;
        for (const Refined* r : good) {
            pts.push_back(r->point);
            degs.push_back(r->degree);
        }
        double spread = 0.0;
        for (const Point& p : pts) spread = std::max(spread, norm(rep.delta(pts[0], p)));
        if (spread <= 2.0 * h) {
            // Isolated point: keep the highest-degree representative.
            std::size_t best = 0;
            for (std::size_t k = 1; k < pts.size(); ++k)
                if (degs[k] > degs[best]) best = k;
            CriticalComponent c;
            c.kind = ComponentKind::IsolatedPoint;
            c.points = {pts[best]};
            c.degrees = {degs[best]};
            c.modal_degree = degs[best];
            c.nodes = nodes;
            rep.components.push_back(std::move(c));
            continue;
        }

        // Curve cluster: modal degree, then branch points of higher degree.
        std::map<int, int> count;
        for (int d : degs) ++count[d];
        int mode = degs[0];
        for (const auto& [d, n] : count)
            if (n > count[mode]) mode = d;
        std::vector<double> hs;
        for (const Refined* r : good) hs.push_back(r->hessian);
        const double hmed = median(hs);
        std::vector<BranchPoint> branches;
        for (const Refined* r : good) {
            if (r->hessian > 0.25 * hmed) continue;
            const Point p0 = spec.node(static_cast<int>(r->node % spec.nx), static_cast<int>(r->node / spec.nx));
            Point p = polish_critical_point(f, p0, mode + 1, 4.0 * h);
            if (!dom.contains(dom.wrap(p), closure_margin)) continue;
            p = dom.wrap(p);
            const DegreeResult dr = vanishing_degree(f, p, K, rep.tol_degree);
            if (dr.degree <= mode) continue;
            bool dup = false;
            for (const auto& b : branches) dup = dup || norm(rep.delta(b.point, p)) < h;
            for (const auto& b : rep.branch_points) dup = dup || norm(rep.delta(b.point, p)) < h;
            if (!dup) branches.push_back({p, dr.degree});
        }
        for (const Refined* r : good)
            if (r->degree > mode) {
                bool dup = false;
                for (const auto& b : branches) dup = dup || norm(rep.delta(b.point, r->point)) < h;
                for (const auto& b : rep.branch_points) dup = dup || norm(rep.delta(b.point, r->point)) < h;
                if (!dup) branches.push_back({r->point, r->degree});
            }

        // Curve points away from branch points, split into pieces by proximity.
        std::vector<Point> cp;
        std::vector<int> cd;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            bool near_branch = false;
            for (const auto& b : branches) near_branch = near_branch || norm(rep.delta(b.point, pts[k])) < 2.5 * h;
            if (near_branch || degs[k] > mode) continue;
            cp.push_back(pts[k]);
            cd.push_back(degs[k]);
        }
        std::vector<std::size_t> kept;
        std::vector<Point> dp = dedupe(cp, rep, 0.5 * h, &kept);
        std::vector<int> ddeg;
        for (std::size_t k : kept) ddeg.push_back(cd[k]);
        std::vector<int> piece(dp.size(), -1);
        int pieces = 0;
        for (std::size_t s = 0; s < dp.size(); ++s) {
            if (piece[s] >= 0) continue;
            std::deque<std::size_t> q{s};
            piece[s] = pieces;
            while (!q.empty()) {
                const std::size_t a = q.front();
                q.pop_front();
                for (std::size_t b = 0; b < dp.size(); ++b)
                    if (piece[b] < 0 && norm(rep.delta(dp[a], dp[b])) < 2.0 * h) {
                        piece[b] = pieces;
                        q.push_back(b);
                    }
            }
            ++pieces;
        }
        for (int pc = 0; pc < pieces; ++pc) {
            std::vector<Point> pp;
            std::vector<int> pd;
            for (std::size_t k = 0; k < dp.size(); ++k)
                if (piece[k] == pc) {
                    pp.push_back(dp[k]);
                    pd.push_back(ddeg[k]);
                }
            if (pp.size() < 3) continue;
            const auto order = chain_order(pp, rep, 3.0 * h);
            CriticalComponent c;
            for (std::size_t k : order) {
                c.points.push_back(pp[k]);
                c.degrees.push_back(pd[k]);
            }
            const bool closes = c.points.size() > 6 && norm(rep.delta(c.points.back(), c.points.front())) < 3.0 * h;
            bool touches_branch = false;
            for (const auto& b : branches) {
                const bool at_front = norm(rep.delta(b.point, c.points.front())) < 3.5 * h;
                const bool at_back = norm(rep.delta(b.point, c.points.back())) < 3.5 * h;
                if (at_front && !at_back) {
                    c.points.insert(c.points.begin(), b.point);
                    c.degrees.insert(c.degrees.begin(), b.degree);
                    touches_branch = true;
                } else if (at_back && !at_front) {
                    c.points.push_back(b.point);
                    c.degrees.push_back(b.degree);
                    touches_branch = true;
                }
            }
            c.kind = closes && !touches_branch ? ComponentKind::Loop : ComponentKind::Arc;
            // Branch endpoints carry their own (higher) degree; constancy is judged on interior points.
            const std::size_t lo = touches_branch ? 1 : 0;
            const std::size_t hi = c.points.size() - (touches_branch ? 1 : 0);
            c.constant_degree = true;
            for (std::size_t k = lo; k < hi; ++k) {
                const bool is_branch = std::any_of(branches.begin(), branches.end(), [&](const BranchPoint& b) {
                    return norm(rep.delta(b.point, c.points[k])) == 0.0;
                });
                if (!is_branch && c.degrees[k] != mode) c.constant_degree = false;
            }
            c.anomalous = !c.constant_degree;
            c.max_turning = max_turning(c.points, c.kind == ComponentKind::Loop, rep);
            c.nodes = nodes;
            c.modal_degree = mode;
            rep.components.push_back(std::move(c));
        }
        for (auto& b : branches) rep.branch_points.push_back(b);
    }

    // Resolution check: distinct components that come within two cells.
    for (std::size_t a = 0; a < rep.components.size(); ++a)
        for (std::size_t b = a + 1; b < rep.components.size(); ++b) {
            const auto& A = rep.components[a];
            const auto& B = rep.components[b];
            if (A.kind == ComponentKind::FlatRegion || B.kind == ComponentKind::FlatRegion) continue;
            if (A.nodes == B.nodes) continue;  // pieces of one branched cluster
            double dmin = std::numeric_limits<double>::infinity();
            for (const Point& p : A.points)
                for (const Point& q : B.points) dmin = std::min(dmin, norm(rep.delta(p, q)));
            if (dmin < 2.0 * h)
                rep.warnings.push_back("resolution insufficient: components " + std::to_string(a) + " and " +
                                       std::to_string(b) + " are within 2 cells");
        }
    return rep;
}

int RegionDecomposition::cell_at(Point p) const {
    int i = static_cast<int>(std::lround((p.x - grid.x0) / grid.dx));
    int j = static_cast<int>(std::lround((p.y - grid.y0) / grid.dy));
    if (grid.periodic) {
        i = wrap_index(i, grid.nx);
        j = wrap_index(j, grid.ny);
    }
    if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return -1;
    return label[grid.index(i, j)];
}

RegionDecomposition innermost_loop(const CriticalSetReport& report, const Domain& domain) {
    RegionDecomposition dec;
    const GridSpec& s = report.grid;
    dec.grid = s;
    const std::size_t N = s.size();
    const double h = std::max(s.dx, s.dy);
    std::vector<std::uint8_t> wall(N, 0);
    auto mark_disk = [&](Point c, double radius) {
        const int ci = static_cast<int>(std::lround((c.x - s.x0) / s.dx));
        const int cj = static_cast<int>(std::lround((c.y - s.y0) / s.dy));
        const int w = static_cast<int>(std::ceil(radius / std::min(s.dx, s.dy))) + 1;
        for (int b = -w; b <= w; ++b)
            for (int a = -w; a <= w; ++a) {
                int i = ci + a, j = cj + b;
                if (s.periodic) {
                    i = wrap_index(i, s.nx);
                    j = wrap_index(j, s.ny);
                } else if (i < 0 || j < 0 || i >= s.nx || j >= s.ny) {
                    continue;
                }
                if (norm(report.delta(c, s.node(i, j))) <= radius) wall[s.index(i, j)] = 1;
            }
    };
    bool any_wall = false;
    for (const auto& c : report.components) {
        if (c.kind == ComponentKind::IsolatedPoint) continue;
        any_wall = true;
        for (std::size_t k : c.nodes) wall[k] = 1;
        if (!c.is_curve()) continue;
        const std::size_t n = c.points.size();
        const std::size_t segs = c.kind == ComponentKind::Loop ? n : n - 1;
        for (std::size_t k = 0; k < segs; ++k) {
            const Point a = c.points[k];
            const Point d = report.delta(a, c.points[(k + 1) % n]);
            const int steps = std::max(1, static_cast<int>(std::ceil(norm(d) / (0.5 * h))));
            for (int t = 0; t <= steps; ++t) mark_disk(a + (static_cast<double>(t) / steps) * d, 1.5 * h);
        }
    }
    for (const auto& b : report.branch_points) mark_disk(b.point, 1.5 * h);

    dec.label.assign(N, -1);
    struct Off {
        int wx = 0, wy = 0;
    };
    std::vector<Off> off(N);
    for (std::size_t seed = 0; seed < N; ++seed) {
        if (!report.active[seed] || wall[seed] || dec.label[seed] >= 0) continue;
        RegionCell cell;
        cell.id = static_cast<int>(dec.cells.size());
        cell.sample = s.node(static_cast<int>(seed % s.nx), static_cast<int>(seed / s.nx));
        bool wraps = false;
        std::deque<std::size_t> q{seed};
        dec.label[seed] = cell.id;
        off[seed] = {};
        while (!q.empty()) {
            const std::size_t k = q.front();
            q.pop_front();
            ++cell.nodes;
            const int i = static_cast<int>(k % s.nx), j = static_cast<int>(k / s.nx);
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int m = 0; m < 4; ++m) {
                int ii = i + di[m], jj = j + dj[m];
                Off o = off[k];
                if (s.periodic) {
                    if (ii < 0) { ii += s.nx; --o.wx; }
                    if (ii >= s.nx) { ii -= s.nx; ++o.wx; }
                    if (jj < 0) { jj += s.ny; --o.wy; }
                    if (jj >= s.ny) { jj -= s.ny; ++o.wy; }
                } else if (ii < 0 || jj < 0 || ii >= s.nx || jj >= s.ny) {
                    continue;
                }
                const std::size_t kk = s.index(ii, jj);
                if (!report.active[kk] || wall[kk]) continue;
                if (dec.label[kk] == cell.id) {
                    if (off[kk].wx != o.wx || off[kk].wy != o.wy) wraps = true;
                    continue;
                }
                dec.label[kk] = cell.id;
                off[kk] = o;
                q.push_back(kk);
            }
        }
        cell.area = static_cast<double>(cell.nodes) * s.dx * s.dy;
        // Holes: the complement must be 8-connected (through the outside on
        // non-periodic grids).
        std::vector<char> seen(N, 0);
        std::deque<std::size_t> cq;
        std::size_t complement = 0, reached = 0;
        for (std::size_t k = 0; k < N; ++k)
            if (dec.label[k] != cell.id) ++complement;
        if (s.periodic) {
            for (std::size_t k = 0; k < N; ++k)
                if (dec.label[k] != cell.id) {
                    cq.push_back(k);
                    seen[k] = 1;
                    break;
                }
        } else {
            for (int i = 0; i < s.nx; ++i)
                for (int j : {0, s.ny - 1}) {
                    const std::size_t k = s.index(i, j);
                    if (dec.label[k] != cell.id && !seen[k]) { seen[k] = 1; cq.push_back(k); }
                }
            for (int j = 0; j < s.ny; ++j)
                for (int i : {0, s.nx - 1}) {
                    const std::size_t k = s.index(i, j);
                    if (dec.label[k] != cell.id && !seen[k]) { seen[k] = 1; cq.push_back(k); }
                }
        }
        while (!cq.empty()) {
            const std::size_t k = cq.front();
            cq.pop_front();
            ++reached;
            const int i = static_cast<int>(k % s.nx), j = static_cast<int>(k / s.nx);
            for (int b = -1; b <= 1; ++b)
                for (int a = -1; a <= 1; ++a) {
                    int ii = i + a, jj = j + b;
                    if (s.periodic) {
                        ii = wrap_index(ii, s.nx);
                        jj = wrap_index(jj, s.ny);
                    } else if (ii < 0 || jj < 0 || ii >= s.nx || jj >= s.ny) {
                        continue;
                    }
                    const std::size_t kk = s.index(ii, jj);
                    if (seen[kk] || dec.label[kk] == cell.id) continue;
                    seen[kk] = 1;
                    cq.push_back(kk);
                }
        }
        cell.simply_connected = !wraps && reached == complement;
        dec.cells.push_back(std::move(cell));
    }

    for (std::size_t ci = 0; ci < report.components.size(); ++ci) {
        const auto& c = report.components[ci];
        if (c.kind == ComponentKind::IsolatedPoint) {
            const int id = dec.cell_at(c.points.front());
            if (id >= 0) dec.cells[static_cast<std::size_t>(id)].critical_points.push_back(c.points.front());
        }
    }

    std::set<std::pair<int, int>> adj;
    for (std::size_t k = 0; k < N; ++k) {
        if (!wall[k] || !report.active[k]) continue;
        std::set<int> near;
        const int i = static_cast<int>(k % s.nx), j = static_cast<int>(k / s.nx);
        for (int b = -3; b <= 3; ++b)
            for (int a = -3; a <= 3; ++a) {
                int ii = i + a, jj = j + b;
                if (s.periodic) {
                    ii = wrap_index(ii, s.nx);
                    jj = wrap_index(jj, s.ny);
                } else if (ii < 0 || jj < 0 || ii >= s.nx || jj >= s.ny) {
                    continue;
                }
                const int l = dec.label[s.index(ii, jj)];
                if (l >= 0 && dec.cells[static_cast<std::size_t>(l)].nodes >= 16) near.insert(l);
            }
        for (int a : near)
            for (int b : near)
                if (a < b) adj.insert({a, b});
    }
    dec.adjacency.assign(adj.begin(), adj.end());

    if (!any_wall) {
        dec.no_critical_curves = true;
        if (dec.cells.size() != 1) dec.warnings.push_back("no critical curves but the domain raster splits");
        return dec;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cell : dec.cells)
        if (cell.simply_connected && cell.nodes >= 16 && cell.area < best) {
            best = cell.area;
            dec.innermost = cell.id;
        }
    if (!dec.innermost) dec.warnings.push_back("no simply connected cell bounded by critical curves");

    for (std::size_t ci = 0; ci < report.components.size(); ++ci) {
        const auto& c = report.components[ci];
        if (c.kind != ComponentKind::Loop) continue;
        // The enclosed cell is the simply connected neighbour whose samples sit inside the loop polygon.
        const BoundaryCurve poly = BoundaryCurve::from_polyline(c.points);
        for (const auto& cell : dec.cells)
            if (cell.simply_connected && cell.nodes >= 16 && poly.encloses(cell.sample)) {
                dec.loop_cells.push_back({static_cast<int>(ci), cell.id});
                break;
            }
    }
    (void)domain;
    return dec;
}

DegreeRelationReport degree_relation_check(FieldPtr psi, const CriticalComponent& component, std::size_t samples) {
    if (!component.is_curve()) throw std::invalid_argument("degree_relation_check needs a critical curve");
    if (!component.constant_degree) throw std::invalid_argument("degree_relation_check needs constant degree");
    const int d = component.degree();
    DegreeRelationReport rep;
    rep.curve_degree = d;
    rep.mode = d >= 3 ? "d-2" : "laplacian-nonzero";
    const auto lap = laplacian(psi);
    const std::size_t n = component.points.size();
    const std::size_t m = std::min(samples, n);
    rep.pass = m > 0;
    for (std::size_t s = 0; s < m; ++s) {
        const std::size_t k = (s * n) / m;
        if (component.degrees[k] != d) continue;
        DegreeRelationSample smp;
        smp.point = polish_critical_point(*psi, component.points[k], d, 1e-3);
        const Jet lj = lap->jet(smp.point, 0);
        smp.laplacian = lj.value();
        const DegreeResult dr = vanishing_degree(*lap, smp.point);
        smp.degree_laplacian = dr.degree;
        if (d >= 3) {
            smp.pass = dr.degree == d - 2 && std::abs(smp.laplacian) <= 1e-7 * std::max(1.0, dr.leading_norm);
        } else {
            const Jet pj = psi->jet(smp.point, 2);
            smp.pass = std::abs(smp.laplacian) > 1e-7 * jet_scale(pj, 2);
        }
        rep.pass = rep.pass && smp.pass;
        rep.samples.push_back(smp);
    }
    return rep;
}

std::vector<RadialityVerdict> detect_local_radiality(const ScalarField& psi, const RegionDecomposition& dec,
                                                     double rel_tol) {
    const GridSpec& s = dec.grid;
    const double h = std::max(s.dx, s.dy);
    constexpr int kCircles = 10, kAngles = 32;
    std::vector<RadialityVerdict> out;
    auto label_at = [&](Point p) { return dec.cell_at(p); };
    for (const auto& cell : dec.cells) {
        RadialityVerdict v;
        v.cell = cell.id;
        if (cell.nodes < 16) {
            v.note = "cell too small";
            out.push_back(v);
            continue;
        }
        double vmax = -std::numeric_limits<double>::infinity(), vmin = std::numeric_limits<double>::infinity();
        Point pmax, pmin;
        double mean = 0.0;
        std::vector<std::size_t> nodes;
        for (std::size_t k = 0; k < s.size(); ++k)
            if (dec.label[k] == cell.id) nodes.push_back(k);
        for (std::size_t k : nodes) {
            const Point p = s.node(static_cast<int>(k % s.nx), static_cast<int>(k / s.nx));
            const double val = psi.value(p);
            mean += val;
            if (val > vmax) { vmax = val; pmax = p; }
            if (val < vmin) { vmin = val; pmin = p; }
        }
        mean /= static_cast<double>(nodes.size());
        Point c = (vmax - mean) >= (mean - vmin) ? pmax : pmin;
        if (!cell.critical_points.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& q : cell.critical_points)
                if (norm(q - c) < best) {
                    best = norm(q - c);
                    c = q;
                }
        }
        // Inscribed radius about c within the cell raster.
        auto inscribed = [&](Point center) {
            double r = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (dec.label[k] == cell.id) continue;
                const Point p = s.node(static_cast<int>(k % s.nx), static_cast<int>(k / s.nx));
                Point d = p - center;
                if (s.periodic) {
                    const double lx = s.nx * s.dx, ly = s.ny * s.dy;
                    d.x -= lx * std::round(d.x / lx);
                    d.y -= ly * std::round(d.y / ly);
                }
                r = std::min(r, norm(d));
            }
            const Box bb = psi.domain().bounding_box();
            return std::min(r, 0.5 * std::min(bb.width(), bb.height())) - h;
        };
        const double R = inscribed(c);
        if (!(R > 8 * h)) {
            v.note = "cell too thin to test";
            v.center = c;
            out.push_back(v);
            continue;
        }
        double radii[kCircles];
        for (int k = 0; k < kCircles; ++k) radii[k] = R * (k + 1) / (kCircles + 1);
        auto circle_usable = [&](Point center, double r) {
            for (int m = 0; m < kAngles; ++m) {
                const double a = 2 * std::numbers::pi * m / kAngles;
                if (label_at(center + r * Point{std::cos(a), std::sin(a)}) != cell.id) return false;
            }
            return true;
        };
        // Gauss-Newton on the center: residuals psi(c + r e) - circle mean.
        for (int it = 0; it < 30; ++it) {
            double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
            for (double r : radii) {
                double vals[kAngles];
                Point grads[kAngles];
                double mv = 0;
                Point mg{};
                for (int m = 0; m < kAngles; ++m) {
                    const double a = 2 * std::numbers::pi * m / kAngles;
                    const Jet j = psi.jet(c + r * Point{std::cos(a), std::sin(a)}, 1);
                    vals[m] = j.value();
                    grads[m] = {j(1, 0), j(0, 1)};
                    mv += vals[m] / kAngles;
                    mg = mg + (1.0 / kAngles) * grads[m];
                }
                for (int m = 0; m < kAngles; ++m) {
                    const double res = vals[m] - mv;
                    const Point g = grads[m] - mg;
                    a11 += g.x * g.x;
                    a12 += g.x * g.y;
                    a22 += g.y * g.y;
                    b1 += g.x * res;
                    b2 += g.y * res;
                }
            }
            const double tr = a11 + a22;
            if (!(tr > 0.0)) break;
            const double mu = 1e-12 * tr;
            const double det = (a11 + mu) * (a22 + mu) - a12 * a12;
            Point step{-((a22 + mu) * b1 - a12 * b2) / det, -((a11 + mu) * b2 - a12 * b1) / det};
            const double len = norm(step);
            if (len > 0.25 * R) step = (0.25 * R / len) * step;
            c = c + step;
            if (len < 1e-15 * (1.0 + norm(c))) break;
        }
        v.center = c;
        v.tolerance = rel_tol * std::max(vmax - vmin, std::max(std::abs(vmax), std::abs(vmin)));
        for (double r : radii) {
            if (!circle_usable(c, r)) continue;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int m = 0; m < kAngles; ++m) {
                const double a = 2 * std::numbers::pi * m / kAngles;
                const double val = psi.value(c + r * Point{std::cos(a), std::sin(a)});
                lo = std::min(lo, val);
                hi = std::max(hi, val);
            }
            v.spread = std::max(v.spread, hi - lo);
            ++v.circles;
        }
        if (v.circles < 8) {
            v.note = "fewer than 8 usable circles";
            out.push_back(v);
            continue;
        }
        v.tested = true;
        v.radial = v.spread <= v.tolerance;
        out.push_back(v);
    }
    return out;
}

}  // namespace sew
