#pragma once

#include <vector>

namespace cellmorph {

struct GaloisReport {
    long long alpha_gamma_violations = 0;  // alpha(gamma(A)) not below A
    long long gamma_alpha_violations = 0;  // gamma(alpha(I)) not above I
    int tuple_count = 0;
    bool skipped = false;

    bool ok() const {
        return !skipped && alpha_gamma_violations == 0 && gamma_alpha_violations == 0;
    }
};

/// Exhaustive law checks (both adjunction inequalities) for the three
/// connections, over arrays of length n with values {0..v-1} and `scalars`
/// extra scalar slots. Domains stay within 64 tuple bits.
GaloisReport check_galois_cell1(int n, int v, int scalars);
GaloisReport check_galois_cell2_ordered(int n, int v, int scalars);
GaloisReport check_galois_cell2_unordered(int n, int v, int scalars);
GaloisReport check_galois_count(int n, int v, int scalars);

}  // namespace cellmorph
