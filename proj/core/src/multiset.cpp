#include "cellmorph/multiset.hpp"

namespace cellmorph {

namespace {

std::optional<size_t> slot_pos(const PredicateSig& sig, const std::string& name) {
    auto slots = sig.slots();
    for (size_t i = 0; i < slots.size(); ++i)
        if (slots[i].name == name) return i;
    return std::nullopt;
}

}  // namespace

std::vector<size_t> count_frame_violations(const HornSystem& s, const std::string& array) {
    std::vector<size_t> bad;
    for (size_t i = 0; i < s.clauses.size(); ++i) {
        const HornClause& c = s.clauses[i];
        if (!c.head || c.body.empty()) continue;
        const std::string& rule = s.provenance[i].rule;
        if (rule.rfind("count-decr", 0) == 0 || rule.rfind("count-incr", 0) == 0) continue;
        const PredicateSig& hsig = s.pred(c.head->pred);
        const PredicateSig& bsig = s.pred(c.body[0].pred);
        const ArrayBlock* hb = nullptr;
        const ArrayBlock* bb = nullptr;
        for (const auto& blk : hsig.blocks)
            if (blk.array == array && blk.counts) hb = &blk;
        for (const auto& blk : bsig.blocks)
            if (blk.array == array && blk.counts) bb = &blk;
        if (!hb || !bb) continue;
        for (const std::string* name : {&hb->z_name, &hb->cnt_name}) {
            auto hp = slot_pos(hsig, *name);
            auto bp = slot_pos(bsig, *name);
            if (!hp || !bp) continue;
            if (!(c.head->args[*hp] == c.body[0].args[*bp])) {
                bad.push_back(i);
                break;
            }
        }
    }
    return bad;
}

}  // namespace cellmorph
