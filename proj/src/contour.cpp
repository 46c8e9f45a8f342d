#include "sew/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace sew {

namespace {

struct Segment {
    std::int64_t a, b;  // edge keys
};

}  // namespace

std::vector<Contour> marching_squares(const GridSpec& spec, std::span<const double> values,
                                      std::span<const std::uint8_t> mask, double level) {
    const int nx = spec.nx, ny = spec.ny;
    const int cx = spec.periodic ? nx : nx - 1;
    const int cy = spec.periodic ? ny : ny - 1;
    auto wi = [&](int i) { return spec.periodic ? i % nx : i; };
    auto wj = [&](int j) { return spec.periodic ? j % ny : j; };
    auto val = [&](int i, int j) { return values[spec.index(wi(i), wj(j))] - level; };
    auto on = [&](int i, int j) { return mask[spec.index(wi(i), wj(j))] != 0; };
    // Edge keys: horizontal edge from node (i,j) is 2k, vertical edge is 2k+1.
    auto hkey = [&](int i, int j) { return 2 * static_cast<std::int64_t>(spec.index(wi(i), wj(j))); };
    auto vkey = [&](int i, int j) { return 2 * static_cast<std::int64_t>(spec.index(wi(i), wj(j))) + 1; };

    std::unordered_map<std::int64_t, Point> vertex;
    auto crossing = [&](std::int64_t key, int i, int j, int di, int dj) {
        if (vertex.count(key)) return;
        const double f0 = val(i, j), f1 = val(i + di, j + dj);
        const double t = f0 == f1 ? 0.5 : f0 / (f0 - f1);
        vertex[key] = {spec.x0 + (i + t * di) * spec.dx, spec.y0 + (j + t * dj) * spec.dy};
    };

    std::vector<Segment> segs;
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            if (!on(i, j) || !on(i + 1, j) || !on(i, j + 1) || !on(i + 1, j + 1)) continue;
            const double v00 = val(i, j), v10 = val(i + 1, j), v11 = val(i + 1, j + 1), v01 = val(i, j + 1);
            const int code = (v00 > 0) | ((v10 > 0) << 1) | ((v11 > 0) << 2) | ((v01 > 0) << 3);
            if (code == 0 || code == 15) continue;
            // Edges: 0 bottom, 1 right, 2 top, 3 left.
            const std::array<std::int64_t, 4> key{hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)};
            auto touch = [&](int e) {
                switch (e) {
                    case 0: crossing(key[0], i, j, 1, 0); break;
                    case 1: crossing(key[1], i + 1, j, 0, 1); break;
                    case 2: crossing(key[2], i, j + 1, 1, 0); break;
                    case 3: crossing(key[3], i, j, 0, 1); break;
                }
            };
            auto add = [&](int e0, int e1) {
                touch(e0);
                touch(e1);
                segs.push_back({key[static_cast<std::size_t>(e0)], key[static_cast<std::size_t>(e1)]});
            };
            const bool center_pos = (v00 + v10 + v11 + v01) > 0;
            switch (code) {
                case 1: case 14: add(3, 0); break;
                case 2: case 13: add(0, 1); break;
                case 3: case 12: add(3, 1); break;
                case 4: case 11: add(1, 2); break;
                case 6: case 9: add(0, 2); break;
                case 7: case 8: add(3, 2); break;
                case 5:
                    if (center_pos) { add(3, 2); add(0, 1); } else { add(3, 0); add(1, 2); }
                    break;
                case 10:
                    if (center_pos) { add(3, 0); add(1, 2); } else { add(3, 2); add(0, 1); }
                    break;
            }
        }

    std::unordered_map<std::int64_t, std::vector<std::size_t>> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        at[segs[s].a].push_back(s);
        at[segs[s].b].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    auto other = [&](std::size_t s, std::int64_t k) { return segs[s].a == k ? segs[s].b : segs[s].a; };
    auto next_unused = [&](std::int64_t k) -> std::ptrdiff_t {
        for (std::size_t s : at[k])
            if (!used[s]) return static_cast<std::ptrdiff_t>(s);
        return -1;
    };

    std::vector<Contour> out;
    auto trace = [&](std::size_t s0, std::int64_t start) {
        std::vector<std::int64_t> keys{start};
        std::int64_t k = start;
        std::ptrdiff_t s = static_cast<std::ptrdiff_t>(s0);
        while (s >= 0) {
            used[static_cast<std::size_t>(s)] = 1;
            k = other(static_cast<std::size_t>(s), k);
            keys.push_back(k);
            s = next_unused(k);
        }
        Contour c;
        c.closed = keys.size() > 2 && keys.front() == keys.back();
        if (c.closed) keys.pop_back();
        for (auto key : keys) c.points.push_back(vertex[key]);
        out.push_back(std::move(c));
    };
    // Open chains first, starting at their free ends, then the loops.
    for (std::size_t s = 0; s < segs.size(); ++s) {
        if (used[s]) continue;
        for (std::int64_t end : {segs[s].a, segs[s].b})
            if (at[end].size() == 1 && !used[s]) trace(s, end);
    }
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) trace(s, segs[s].a);
    if (spec.periodic) {
        const double lx = spec.nx * spec.dx, ly = spec.ny * spec.dy;
        for (auto& c : out)
            for (auto& p : c.points) {
                p.x = spec.x0 + std::fmod(std::fmod(p.x - spec.x0, lx) + lx, lx);
                p.y = spec.y0 + std::fmod(std::fmod(p.y - spec.y0, ly) + ly, ly);
            }
    }
    return out;
}

void refine_contours(const ScalarField& f, double level, std::vector<Contour>& contours, double max_shift,
                     std::vector<std::vector<std::uint8_t>>* converged) {
    const double tol = 1e-13 * std::max(1.0, std::abs(level));
    if (converged) converged->assign(contours.size(), {});
    for (std::size_t ci = 0; ci < contours.size(); ++ci) {
        auto& c = contours[ci];
        if (converged) (*converged)[ci].assign(c.points.size(), 0);
        for (std::size_t pi = 0; pi < c.points.size(); ++pi) {
            Point& p = c.points[pi];
            Point q = p;
            for (int it = 0; it < 8; ++it) {
                if (!f.domain().contains(q) || norm(q - p) > max_shift) break;
                const Jet j = f.jet(q, 1);
                const double r = j.value() - level;
                if (std::abs(r) <= tol) {
                    p = q;
                    if (converged) (*converged)[ci][pi] = 1;
                    break;
                }
                const Point g{j(1, 0), j(0, 1)};
                const double g2 = dot(g, g);
                if (!(g2 > 0.0)) break;
                q = q - (r / g2) * g;
            }
        }
    }
}

double polyline_length(const std::vector<Point>& pts, bool closed) {
    double L = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) L += norm(pts[k] - pts[k - 1]);
    if (closed && pts.size() > 1) L += norm(pts.front() - pts.back());
    return L;
}

}  // namespace sew
