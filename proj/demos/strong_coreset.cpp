// Samples a strong coreset for a heavy-tailed regression instance and checks
// it on the structured probe set.
#include <cstdio>

#include "lpcoreset/lpcoreset.hpp"

int main() {
    using namespace lpcoreset;
    SyntheticParams prm;
    prm.n = 2000;
    prm.d = 5;
    prm.responses = 20;
    prm.outlier_fraction = 0.01;
    prm.outlier_magnitude = 50.0;
    const HeavyTailInstance inst = heavy_tail_residual(prm, 7);

    for (double p : {1.0, 1.5, 3.0}) {
        StrongCoresetConfig cfg;
        cfg.p = p;
        const StrongCoreset sc = build_strong_coreset(inst.A, inst.B, cfg, 11);
        const CoresetReport rep = verify_strong(inst.A, inst.B, sc.S, p, cfg.eps, 200, 3);
        std::printf("p=%.1f  nnz=%zu of %zu  max_rel_error=%.4f  %s\n", p, sc.S.nnz(), inst.A.rows(),
                    rep.max_rel_error, rep.passed ? "ok" : "FAILED");
    }
}
