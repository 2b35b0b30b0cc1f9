#include "support/oracle.hpp"

#include <stdexcept>
#include <vector>

namespace i2d::testing {

namespace {

using State = std::map<std::string, ItemSet>;

// Re-derived matching, on purpose not shared with the engine: the
// required classes must all be present, forbidden ones absent, and
// without a wildcard the class set must be exactly the required one.
bool oracleMatches(const ItemPattern& p, const ItemKey& key) {
    if (p.itemName && *p.itemName != key.name) return false;
    for (const auto& c : p.required)
        if (!key.classes.contains(c)) return false;
    for (const auto& c : p.forbidden)
        if (key.classes.contains(c)) return false;
    if (!p.open) {
        if (key.classes.size() != p.required.size()) return false;
        for (const auto& c : key.classes)
            if (!p.required.contains(c)) return false;
    }
    return true;
}

SymbolSet extraClasses(const ItemPattern& p, const ItemKey& key) {
    SymbolSet extras;
    for (const auto& c : key.classes)
        if (!p.required.contains(c)) extras.insert(c);
    return extras;
}

bool addItem(State& state, const std::string& entity, const ItemKey& key,
             double grade) {
    if (grade <= 0.0) return false;
    auto& items = state[entity];
    auto it = items.find(key);
    if (it == items.end()) {
        items.emplace(key, grade);
        return true;
    }
    if (grade > it->second) {
        it->second = grade;
        return true;
    }
    return false;
}

void walkLeaves(const Entity& e, SymbolSet inherited,
                std::vector<std::pair<const Entity*, SymbolSet>>& out) {
    inherited.unionWith(e.classes);
    if (!e.complex) {
        out.push_back({&e, inherited});
        return;
    }
    for (const auto& c : e.children) walkLeaves(c, inherited, out);
}

void walkMatching(const Entity& e, const std::string& cls,
                  std::vector<const Entity*>& out) {
    if (e.classes.contains(cls)) out.push_back(&e);
    for (const auto& c : e.children) walkMatching(c, cls, out);
}

/// One full pass over every binding of one rule at one entity.
bool applyRuleEverywhere(const Rule& rule, const std::string& entity,
                         State& state) {
    const ItemSet snapshot = state[entity];
    std::vector<std::vector<std::pair<ItemKey, double>>> perPremise;
    for (const auto& premise : rule.premises) {
        perPremise.emplace_back();
        for (const auto& [key, grade] : snapshot)
            if (grade > 0.0 && oracleMatches(premise, key))
                perPremise.back().push_back({key, grade});
        if (perPremise.back().empty()) return false;
    }
    bool changed = false;
    std::vector<std::size_t> pick(rule.premises.size(), 0);
    while (true) {
        double low = 1.0;
        std::map<std::string, std::string> names;
        std::map<std::string, SymbolSet> captures;
        for (std::size_t i = 0; i < pick.size(); ++i) {
            const auto& [key, grade] = perPremise[i][pick[i]];
            low = std::min(low, grade);
            const ItemPattern& premise = rule.premises[i];
            if (!premise.var.empty()) names[premise.var] = key.name;
            if (!premise.captureVar.empty())
                captures[premise.captureVar] = extraClasses(premise, key);
        }
        for (const auto& outcome : rule.outcomes) {
            ItemKey produced;
            produced.name = outcome.fromVar ? names.at(outcome.nameOrVar)
                                            : outcome.nameOrVar;
            for (const auto& term : outcome.classes) {
                if (term.isVar) {
                    auto it = captures.find(term.text);
                    if (it != captures.end())
                        produced.classes.unionWith(it->second);
                } else {
                    produced.classes.insert(term.text);
                }
            }
            changed |= addItem(state, entity, produced,
                               rule.probability * low);
        }
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < perPremise[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return changed;
}

} // namespace

State oracleFixpoint(const Diagram& diagram) {
    for (const auto& rule : diagram.rules)
        if (rule.rewriteArrow)
            throw std::logic_error("oracle inputs must not use rewrite arrows");

    std::vector<std::pair<const Entity*, SymbolSet>> leaves;
    for (const auto& e : diagram.entities) walkLeaves(e, {}, leaves);

    State state;
    for (const auto& [leaf, classes] : leaves) {
        state[leaf->name]; // entity exists even with no items
        for (const auto& item : leaf->items)
            addItem(state, leaf->name, item.key(), item.grade);
    }
    for (const auto& er : diagram.entityRules) {
        if (er.product != EntityRule::Product::Item) continue;
        std::vector<const Entity*> hosts;
        for (const auto& e : diagram.entities)
            walkMatching(e, er.entityClass, hosts);
        for (const Entity* host : hosts)
            for (const Entity* leaf : leafEntities(*host))
                addItem(state, leaf->name, er.item.key(),
                        er.probability * er.item.grade);
    }

    const auto flows = diagram.simpleFlows();
    bool changed = true;
    std::size_t guard = 0;
    while (changed) {
        if (++guard > 200000)
            throw std::logic_error("oracle did not stabilize");
        changed = false;
        for (const Flow* flow : flows) {
            const ItemSet origin = state[flow->origin];
            for (const auto& entry : flow->items) {
                if (entry.wildcard) {
                    for (const auto& [key, grade] : origin)
                        changed |= addItem(state, flow->target, key,
                                           std::min(grade, entry.grade));
                    continue;
                }
                auto it = origin.find(entry.key());
                if (it == origin.end() || it->second <= 0.0) continue;
                changed |= addItem(state, flow->target, entry.key(),
                                   std::min(it->second, entry.grade));
            }
        }
        for (std::size_t r = 0; r < diagram.rules.size(); ++r) {
            const Rule& rule = diagram.rules[r];
            for (const auto& [leaf, classes] : leaves) {
                if (!rule.scope.empty() && !rule.scope.intersects(classes))
                    continue;
                changed |= applyRuleEverywhere(rule, leaf->name, state);
            }
        }
    }
    return state;
}

} // namespace i2d::testing
