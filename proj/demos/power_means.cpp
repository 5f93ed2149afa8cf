// Geometric median and p-power means of a Gaussian mixture from a sublinear
// number of uniform samples.
#include <cstdio>

#include "lpcoreset/lpcoreset.hpp"

int main() {
    using namespace lpcoreset;
    PowerMeansInstance inst{gaussian_mixture(100000, 20, 3, 5.0, 1.0, 1), 1.0};
    for (double p : {1.0, 1.5, 3.0}) {
        inst.p = p;
        const PowerMeansResult r = solve_power_means(inst, 0.1, 0.1, 5);
        const Vector exact = sampled_center_solve(inst.points.values(), p);
        const double ratio = power_mean_cost(inst, r.center) / power_mean_cost(inst, exact);
        std::printf("p=%.1f  rows read=%zu of %zu  cost ratio=%.5f\n", p, r.samples_used, inst.points.rows(), ratio);
    }
}
