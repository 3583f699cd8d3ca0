#include "invt/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace invt {

NelderMeadResult nelder_mead_2d(const std::function<double(const std::array<double, 2>&)>& f,
                                std::array<double, 2> start, std::array<double, 2> step, double xtol,
                                int max_iter) {
    using P = std::array<double, 2>;
    std::array<P, 3> x{start, P{start[0] + step[0], start[1]}, P{start[0], start[1] + step[1]}};
    std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
    const auto lerp = [](const P& a, const P& b, double t) {
        return P{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        x = {x[order[0]], x[order[1]], x[order[2]]};
        fx = {fx[order[0]], fx[order[1]], fx[order[2]]};

        double size = 0.0;
        for (int i = 1; i < 3; ++i)
            size = std::max({size, std::abs(x[i][0] - x[0][0]) / (1.0 + std::abs(x[0][0])),
                             std::abs(x[i][1] - x[0][1]) / (1.0 + std::abs(x[0][1]))});
        if (size < xtol) break;

        const P centroid{(x[0][0] + x[1][0]) / 2.0, (x[0][1] + x[1][1]) / 2.0};
        const P reflected = lerp(centroid, x[2], -1.0);
        const double fr = f(reflected);
        if (fr < fx[0]) {
            const P expanded = lerp(centroid, x[2], -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                x[2] = expanded;
                fx[2] = fe;
            } else {
                x[2] = reflected;
                fx[2] = fr;
            }
        } else if (fr < fx[1]) {
            x[2] = reflected;
            fx[2] = fr;
        } else {
            const bool outside = fr < fx[2];
            const P contracted = outside ? lerp(centroid, reflected, 0.5) : lerp(centroid, x[2], 0.5);
            const double fc = f(contracted);
            if (fc < (outside ? fr : fx[2])) {
                x[2] = contracted;
                fx[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    x[i] = lerp(x[0], x[i], 0.5);
                    fx[i] = f(x[i]);
                }
            }
        }
    }
    const auto best = std::min_element(fx.begin(), fx.end()) - fx.begin();
    return {x[static_cast<std::size_t>(best)], fx[static_cast<std::size_t>(best)], iter};
}

}  // namespace invt
