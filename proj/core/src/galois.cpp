#include <cstdint>

#include "cellmorph/galois.hpp"

namespace cellmorph {

// Exhaustive Galois-law checks on tiny domains. Concrete states are arrays
// over indices {0..n-1} with values {0..v-1} plus an optional scalar; sets
// of abstract tuples are bitmasks.

namespace {

struct Space {
    int n, v, scalars;  // scalars in {0..v-1}
    std::vector<std::vector<int>> states;  // scalar prefix then n cells

    explicit Space(int n_, int v_, int scalars_) : n(n_), v(v_), scalars(scalars_) {
        std::vector<int> cur(static_cast<size_t>(scalars + n));
        build(cur, 0);
    }
    void build(std::vector<int>& cur, size_t i) {
        if (i == cur.size()) {
            states.push_back(cur);
            return;
        }
        for (int x = 0; x < v; ++x) {
            cur[i] = x;
            build(cur, i + 1);
        }
    }
};

}  // namespace

GaloisReport check_galois_cell1(int n, int v, int scalars) {
    Space sp(n, v, scalars);
    // tuple = (scalars.., k, a_k): id = ((scalar index) * n + k) * v + val
    int scalar_combos = 1;
    for (int i = 0; i < scalars; ++i) scalar_combos *= v;
    int tuples = scalar_combos * n * v;
    auto tuple_mask = [&](const std::vector<int>& s) {
        uint64_t m = 0;
        int sidx = 0;
        for (int i = 0; i < scalars; ++i) sidx = sidx * v + s[static_cast<size_t>(i)];
        for (int k = 0; k < n; ++k) {
            int id = (sidx * n + k) * v + s[static_cast<size_t>(scalars + k)];
            m |= uint64_t(1) << id;
        }
        return m;
    };
    GaloisReport rep;
    rep.tuple_count = tuples;
    if (tuples > 24) {
        rep.skipped = true;
        return rep;
    }
    std::vector<uint64_t> masks;
    for (const auto& s : sp.states) masks.push_back(tuple_mask(s));

    // gamma(A) = {s | mask(s) subset A};  alpha(I) = union of masks.
    uint64_t limit = uint64_t(1) << tuples;
    for (uint64_t A = 0; A < limit; ++A) {
        uint64_t alpha_gamma = 0;
        for (const auto& m : masks)
            if ((m & ~A) == 0) alpha_gamma |= m;
        if ((alpha_gamma & ~A) != 0) ++rep.alpha_gamma_violations;
    }
    // gamma(alpha(I)) >= I over all concrete subsets.
    size_t nstates = sp.states.size();
    if (nstates <= 20) {
        for (uint64_t I = 0; I < (uint64_t(1) << nstates); ++I) {
            uint64_t a = 0;
            for (size_t i = 0; i < nstates; ++i)
                if (I & (uint64_t(1) << i)) a |= masks[i];
            for (size_t i = 0; i < nstates; ++i) {
                bool in_I = I & (uint64_t(1) << i);
                bool in_gamma = (masks[i] & ~a) == 0;
                if (in_I && !in_gamma) ++rep.gamma_alpha_violations;
            }
        }
    }
    return rep;
}

GaloisReport check_galois_cell2_ordered(int n, int v, int scalars) {
    Space sp(n, v, scalars);
    int scalar_combos = 1;
    for (int i = 0; i < scalars; ++i) scalar_combos *= v;
    std::vector<std::pair<int, int>> pairs;
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = k1; k2 < n; ++k2) pairs.emplace_back(k1, k2);
    int tuples = scalar_combos * static_cast<int>(pairs.size()) * v * v;
    GaloisReport rep;
    rep.tuple_count = tuples;
    if (tuples > 30) {
        rep.skipped = true;
        return rep;
    }
    auto tuple_mask = [&](const std::vector<int>& s) {
        uint64_t m = 0;
        int sidx = 0;
        for (int i = 0; i < scalars; ++i) sidx = sidx * v + s[static_cast<size_t>(i)];
        for (size_t p = 0; p < pairs.size(); ++p) {
            int v1 = s[static_cast<size_t>(scalars + pairs[p].first)];
            int v2 = s[static_cast<size_t>(scalars + pairs[p].second)];
            int id = ((sidx * static_cast<int>(pairs.size()) + static_cast<int>(p)) * v + v1) * v +
                     v2;
            m |= uint64_t(1) << id;
        }
        return m;
    };
    std::vector<uint64_t> masks;
    for (const auto& s : sp.states) masks.push_back(tuple_mask(s));
    uint64_t limit = uint64_t(1) << tuples;
    for (uint64_t A = 0; A < limit; ++A) {
        uint64_t ag = 0;
        for (const auto& m : masks)
            if ((m & ~A) == 0) ag |= m;
        if ((ag & ~A) != 0) ++rep.alpha_gamma_violations;
    }
    size_t nstates = sp.states.size();
    if (nstates <= 20) {
        for (uint64_t I = 0; I < (uint64_t(1) << nstates); ++I) {
            uint64_t a = 0;
            for (size_t i = 0; i < nstates; ++i)
                if (I & (uint64_t(1) << i)) a |= masks[i];
            for (size_t i = 0; i < nstates; ++i) {
                bool in_I = I & (uint64_t(1) << i);
                bool in_gamma = (masks[i] & ~a) == 0;
                if (in_I && !in_gamma) ++rep.gamma_alpha_violations;
            }
        }
    }
    return rep;
}

GaloisReport check_galois_cell2_unordered(int n, int v, int scalars) {
    Space sp(n, v, scalars);
    int scalar_combos = 1;
    for (int i = 0; i < scalars; ++i) scalar_combos *= v;
    int tuples = scalar_combos * n * n * v * v;
    GaloisReport rep;
    rep.tuple_count = tuples;
    if (tuples > 30) {
        rep.skipped = true;
        return rep;
    }
    auto tuple_mask = [&](const std::vector<int>& s) {
        uint64_t m = 0;
        int sidx = 0;
        for (int i = 0; i < scalars; ++i) sidx = sidx * v + s[static_cast<size_t>(i)];
        for (int k1 = 0; k1 < n; ++k1) {
            for (int k2 = 0; k2 < n; ++k2) {
                int v1 = s[static_cast<size_t>(scalars + k1)];
                int v2 = s[static_cast<size_t>(scalars + k2)];
                int id = (((sidx * n + k1) * n + k2) * v + v1) * v + v2;
                m |= uint64_t(1) << id;
            }
        }
        return m;
    };
    std::vector<uint64_t> masks;
    for (const auto& s : sp.states) masks.push_back(tuple_mask(s));
    uint64_t limit = uint64_t(1) << tuples;
    for (uint64_t A = 0; A < limit; ++A) {
        uint64_t ag = 0;
        for (const auto& m : masks)
            if ((m & ~A) == 0) ag |= m;
        if ((ag & ~A) != 0) ++rep.alpha_gamma_violations;
    }
    size_t nstates = sp.states.size();
    if (nstates <= 20) {
        for (uint64_t I = 0; I < (uint64_t(1) << nstates); ++I) {
            uint64_t a = 0;
            for (size_t i = 0; i < nstates; ++i)
                if (I & (uint64_t(1) << i)) a |= masks[i];
            for (size_t i = 0; i < nstates; ++i) {
                bool in_I = I & (uint64_t(1) << i);
                bool in_gamma = (masks[i] & ~a) == 0;
                if (in_I && !in_gamma) ++rep.gamma_alpha_violations;
            }
        }
    }
    return rep;
}

GaloisReport check_galois_count(int n, int v, int scalars) {
    Space sp(n, v, scalars);
    int scalar_combos = 1;
    for (int i = 0; i < scalars; ++i) scalar_combos *= v;
    // tuple = (scalars.., i, a_i, z, cnt) with cnt in 0..n
    int tuples = scalar_combos * n * v * v * (n + 1);
    GaloisReport rep;
    rep.tuple_count = tuples;
    if (tuples > 30) {
        rep.skipped = true;
        return rep;
    }
    auto tuple_mask = [&](const std::vector<int>& s) {
        uint64_t m = 0;
        int sidx = 0;
        for (int i = 0; i < scalars; ++i) sidx = sidx * v + s[static_cast<size_t>(i)];
        for (int i = 0; i < n; ++i) {
            for (int z = 0; z < v; ++z) {
                int cnt = 0;
                for (int j = 0; j < n; ++j)
                    if (s[static_cast<size_t>(scalars + j)] == z) ++cnt;
                int id = (((sidx * n + i) * v + s[static_cast<size_t>(scalars + i)]) * v + z) *
                             (n + 1) +
                         cnt;
                m |= uint64_t(1) << id;
            }
        }
        return m;
    };
    std::vector<uint64_t> masks;
    for (const auto& s : sp.states) masks.push_back(tuple_mask(s));
    uint64_t limit = uint64_t(1) << tuples;
    for (uint64_t A = 0; A < limit; ++A) {
        uint64_t ag = 0;
        for (const auto& m : masks)
            if ((m & ~A) == 0) ag |= m;
        if ((ag & ~A) != 0) ++rep.alpha_gamma_violations;
    }
    size_t nstates = sp.states.size();
    if (nstates <= 20) {
        for (uint64_t I = 0; I < (uint64_t(1) << nstates); ++I) {
            uint64_t a = 0;
            for (size_t i = 0; i < nstates; ++i)
                if (I & (uint64_t(1) << i)) a |= masks[i];
            for (size_t i = 0; i < nstates; ++i) {
                bool in_I = I & (uint64_t(1) << i);
                bool in_gamma = (masks[i] & ~a) == 0;
                if (in_I && !in_gamma) ++rep.gamma_alpha_violations;
            }
        }
    }
    return rep;
}

}  // namespace cellmorph
