#include <sstream>

#include "cellmorph/horn.hpp"

namespace cellmorph {

std::vector<ScalarVar> PredicateSig::slots() const {
    std::vector<ScalarVar> out = scalars;
    if (extra) out.push_back(*extra);
    for (const auto& k : shared_index_names) out.push_back({k, shared_index_sort});
    for (const auto& b : blocks) {
        if (b.shared_value_only) {
            for (size_t c = 0; c < b.value_names.size(); ++c)
                out.push_back({b.value_names[c], b.value_sort});
        } else {
            for (int c = 0; c < b.cells; ++c) {
                for (int d = 0; d < b.dims; ++d)
                    out.push_back({b.index_names[static_cast<size_t>(c * b.dims + d)],
                                   b.index_sort});
                out.push_back({b.value_names[static_cast<size_t>(c)], b.value_sort});
            }
        }
        if (b.counts) {
            out.push_back({b.z_name, b.value_sort});
            out.push_back({b.cnt_name, Sort::Int});
            if (b.counts_orig) out.push_back({b.cnt0_name, Sort::Int});
        }
    }
    return out;
}

std::string atom_str(const HornSystem& s, const Atom& a) {
    std::ostringstream os;
    os << s.pred(a.pred).name << "(";
    for (size_t i = 0; i < a.args.size(); ++i) os << (i ? "," : "") << a.args[i].str();
    os << ")";
    return os.str();
}

std::string HornSystem::clause_str(size_t i) const {
    const HornClause& c = clauses.at(i);
    std::ostringstream os;
    bool first = true;
    for (const auto& b : c.body) {
        if (!first) os << " & ";
        os << atom_str(*this, b);
        first = false;
    }
    if (!c.constraint.is_true()) {
        if (!first) os << " & ";
        os << c.constraint.str();
        first = false;
    }
    if (first) os << "true";
    os << " => ";
    if (c.head) {
        os << atom_str(*this, *c.head);
    } else {
        os << c.goal->constraint.str();
    }
    return os.str();
}

}  // namespace cellmorph
