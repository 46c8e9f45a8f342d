#include "sew/grid.hpp"

#include "sew/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace sew {

GridSpec grid_for(const Domain& domain, int nx, int ny) {
    if (nx < 16 || ny < 16) throw std::invalid_argument("grid resolution must be at least 16 x 16");
    const Box b = domain.bounding_box();
    GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.x0 = b.x0;
    g.y0 = b.y0;
    g.periodic = domain.periodic();
    if (g.periodic) {
        g.dx = b.width() / nx;
        g.dy = b.height() / ny;
    } else {
        g.dx = b.width() / (nx - 1);
        g.dy = b.height() / (ny - 1);
    }
    return g;
}

void lagrange_taylor(int width, double xi, int order, std::vector<std::array<double, kGridOrder + 1>>& out) {
    out.assign(static_cast<std::size_t>(width), {});
    for (int m = 0; m < width; ++m) {
        // Product over k != m of (xi - k + tau) / (m - k), as a polynomial in tau.
        std::array<double, kGridOrder + 1> poly{};
        poly[0] = 1.0;
        for (int k = 0; k < width; ++k) {
            if (k == m) continue;
            const double inv = 1.0 / static_cast<double>(m - k);
            const double c0 = (xi - k) * inv;
            for (int a = order; a >= 0; --a) poly[a] = poly[a] * c0 + (a > 0 ? poly[a - 1] * inv : 0.0);
        }
        out[static_cast<std::size_t>(m)] = poly;
    }
}

GridField::GridField(std::string name, Domain domain, GridSpec spec, std::vector<double> values,
                     std::vector<std::uint8_t> mask)
    : name_(std::move(name)), domain_(std::move(domain)), spec_(spec), values_(std::move(values)),
      mask_(std::move(mask)) {
    if (values_.size() != spec_.size() || mask_.size() != spec_.size())
        throw std::invalid_argument("grid field storage does not match grid spec");
}

std::size_t GridField::masked_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{0}));
}

namespace {

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

double snap(double u) {
    const double r = std::round(u);
    return std::abs(u - r) < 1e-10 ? r : u;
}

}  // namespace

Jet GridField::jet(Point p, int order) const {
    if (order > kGridOrder) throw FieldError("grid fields provide derivatives up to order 4");
    if (spec_.periodic) p = domain_.wrap(p);
    const double u = snap((p.x - spec_.x0) / spec_.dx);
    const double v = snap((p.y - spec_.y0) / spec_.dy);
    const int iu = static_cast<int>(std::floor(u)), iv = static_cast<int>(std::floor(v));

    if (u == iu && v == iv && order == 0) {
        const int i = spec_.periodic ? wrap_index(iu, spec_.nx) : iu;
        const int j = spec_.periodic ? wrap_index(iv, spec_.ny) : iv;
        if (i >= 0 && i < spec_.nx && j >= 0 && j < spec_.ny && active(i, j)) return Jet(0, at(i, j));
    }

    auto stencil_ok = [&](int sx, int sy, int w) {
        for (int b = 0; b < w; ++b)
            for (int a = 0; a < w; ++a) {
                int i = sx + a, j = sy + b;
                if (spec_.periodic) {
                    i = wrap_index(i, spec_.nx);
                    j = wrap_index(j, spec_.ny);
                } else if (i < 0 || j < 0 || i >= spec_.nx || j >= spec_.ny) {
                    return false;
                }
                if (!active(i, j)) return false;
            }
        return true;
    };

    for (int w : {7, 5}) {
        const int half = w / 2;
        int best_sx = 0, best_sy = 0, best_cost = std::numeric_limits<int>::max();
        for (int oy = -half; oy <= half; ++oy)
            for (int ox = -half; ox <= half; ++ox) {
                const int cost = std::abs(ox) + std::abs(oy);
                if (cost >= best_cost) continue;
                const int sx = iu - half + ox, sy = iv - half + oy;
                // Keep the evaluation point inside the stencil hull.
                if (u < sx || u > sx + w - 1 || v < sy || v > sy + w - 1) continue;
                if (!stencil_ok(sx, sy, w)) continue;
                best_cost = cost;
                best_sx = sx;
                best_sy = sy;
            }
        if (best_cost == std::numeric_limits<int>::max()) continue;

        std::vector<std::array<double, kGridOrder + 1>> tx, ty;
        lagrange_taylor(w, u - best_sx, order, tx);
        lagrange_taylor(w, v - best_sy, order, ty);
        Jet r(order, 0.0);
        for (int b = 0; b < w; ++b)
            for (int a = 0; a < w; ++a) {
                int i = best_sx + a, j = best_sy + b;
                if (spec_.periodic) {
                    i = wrap_index(i, spec_.nx);
                    j = wrap_index(j, spec_.ny);
                }
                const double val = at(i, j);
                for (int k = 0; k <= order; ++k)
                    for (int jy = 0; jy <= k; ++jy) {
                        const int ix = k - jy;
                        r.coef(ix, jy) += tx[static_cast<std::size_t>(a)][static_cast<std::size_t>(ix)] *
                                          ty[static_cast<std::size_t>(b)][static_cast<std::size_t>(jy)] * val;
                    }
            }
        for (int k = 0; k <= order; ++k)
            for (int jy = 0; jy <= k; ++jy) {
                const int ix = k - jy;
                r.coef(ix, jy) /= std::pow(spec_.dx, ix) * std::pow(spec_.dy, jy);
            }
        return r;
    }
    throw FieldError("no unmasked interpolation stencil around point");
}

void GridField::write_csv(std::ostream& os) const {
    os << std::setprecision(17);
    os << "# " << spec_.nx << ' ' << spec_.ny << ' ' << spec_.x0 << ' ' << spec_.y0 << ' ' << spec_.dx << ' '
       << spec_.dy << '\n';
    for (int j = 0; j < spec_.ny; ++j) {
        for (int i = 0; i < spec_.nx; ++i) {
            if (i) os << ',';
            if (active(i, j))
                os << at(i, j);
            else
                os << "nan";
        }
        os << '\n';
    }
}

GridPtr sample_grid(const ScalarField& field, int nx, int ny) {
    const GridSpec spec = grid_for(field.domain(), nx, ny);
    std::vector<double> values(spec.size());
    std::vector<std::uint8_t> mask(spec.size());
    kernels::sample_values(field, spec, values, mask);
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }))
        throw FieldError("grid does not intersect the domain");
    return std::make_shared<GridField>(field.name() + "-grid", field.domain(), spec, std::move(values),
                                       std::move(mask));
}

}  // namespace sew
