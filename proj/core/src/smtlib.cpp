#include <sstream>

#include "cellmorph/smtlib.hpp"

namespace cellmorph {

std::string emit_smtlib(const HornSystem& s, const Cfg* cfg) {
    std::ostringstream os;
    os << "(set-logic HORN)\n";
    for (const auto& p : s.preds) {
        os << "(declare-fun " << p.name << " (";
        auto slots = p.slots();
        for (size_t i = 0; i < slots.size(); ++i)
            os << (i ? " " : "") << sort_name(slots[i].sort);
        os << ") Bool)\n";
    }
    for (size_t i = 0; i < s.clauses.size(); ++i) {
        const HornClause& c = s.clauses[i];
        const Provenance& prov = i < s.provenance.size() ? s.provenance[i] : Provenance{};
        os << "; c" << i << " [" << (prov.rule.empty() ? "-" : prov.rule) << "]";
        if (!prov.edges.empty()) {
            os << " edges";
            for (int e : prov.edges) {
                os << " " << e;
                if (cfg) {
                    for (const auto& edge : cfg->edges)
                        if (edge.id == e) os << ":'" << transition_str(edge.transition) << "'";
                }
            }
        }
        os << "\n";

        auto atom_smt = [&](const Atom& a) {
            std::ostringstream ao;
            if (a.args.empty()) {
                ao << s.pred(a.pred).name;
                return ao.str();
            }
            ao << "(" << s.pred(a.pred).name;
            for (const auto& t : a.args) ao << " " << t.smt();
            ao << ")";
            return ao.str();
        };

        std::vector<std::string> antecedents;
        for (const auto& a : c.body) antecedents.push_back(atom_smt(a));
        for (const auto& t : c.constraint.conjuncts()) antecedents.push_back(t.smt());
        std::string head;
        if (c.head) {
            head = atom_smt(*c.head);
        } else {
            antecedents.push_back(Term::not_(c.goal->constraint).smt());
            head = "false";
        }

        std::string body;
        if (antecedents.empty()) {
            body = head;
        } else if (antecedents.size() == 1) {
            body = "(=> " + antecedents[0] + " " + head + ")";
        } else {
            std::string conj = "(and";
            for (const auto& a : antecedents) conj += " " + a;
            conj += ")";
            body = "(=> " + conj + " " + head + ")";
        }

        if (c.universals.empty()) {
            os << "(assert " << body << ")\n";
        } else {
            os << "(assert (forall (";
            for (size_t u = 0; u < c.universals.size(); ++u)
                os << (u ? " " : "") << "(" << c.universals[u].name << " "
                   << sort_name(c.universals[u].sort) << ")";
            os << ") " << body << "))\n";
        }
    }
    os << "(check-sat)\n";
    return os.str();
}

}  // namespace cellmorph
