#include "i2d/norms.hpp"

#include <algorithm>
#include <set>

namespace i2d {

namespace {

std::string itemKeyText(const ItemKey& key) {
    std::string out = key.name;
    std::string classes;
    for (const auto& c : key.classes) {
        if (!classes.empty()) classes += "+";
        classes += c;
    }
    if (!classes.empty()) out += ":" + classes;
    return out;
}

std::string patternSummary(const ItemPattern& pattern) {
    if (pattern.itemName) {
        ItemKey key{*pattern.itemName, pattern.required};
        std::string out = itemKeyText(key);
        if (pattern.open) out += pattern.required.empty() ? ":*" : "+*";
        return out;
    }
    std::string atoms;
    for (const auto& c : pattern.required) {
        if (!atoms.empty()) atoms += ", ";
        atoms += c + "(" + pattern.var + ")";
    }
    for (const auto& c : pattern.forbidden) {
        if (!atoms.empty()) atoms += ", ";
        atoms += "!" + c + "(" + pattern.var + ")";
    }
    if (atoms.empty()) atoms = "*(" + pattern.var + ")";
    return atoms;
}

/// Target groups: "in" obliges every group; a group is served when at
/// least one of its leaves holds the item.
struct TargetGroup {
    std::string name;
    std::vector<const Entity*> leaves;
};

std::vector<const Entity*> collectCarriers(const std::vector<Entity>& entities,
                                           const std::string& entityClass) {
    std::vector<const Entity*> out;
    struct Walker {
        const std::string& cls;
        std::vector<const Entity*>& out;
        void walk(const Entity& e) {
            if (e.classes.contains(cls)) out.push_back(&e);
            for (const auto& c : e.children) walk(c);
        }
    } walker{entityClass, out};
    for (const auto& e : entities) walker.walk(e);
    return out;
}

std::vector<TargetGroup> targetGroups(const Requirement& requirement,
                                      const Diagram& diagram) {
    std::vector<TargetGroup> groups;
    switch (requirement.targetKind) {
    case Requirement::TargetKind::Entity: {
        const Entity* entity = diagram.findEntity(requirement.target);
        if (!entity)
            throw ModelError("requirement target '" + requirement.target +
                             "' does not resolve");
        groups.push_back({entity->name, leafEntities(*entity)});
        break;
    }
    case Requirement::TargetKind::EntityClass: {
        for (const Entity* carrier :
             collectCarriers(diagram.entities, requirement.target))
            groups.push_back({carrier->name, leafEntities(*carrier)});
        break;
    }
    case Requirement::TargetKind::Wildcard: {
        std::set<std::string> excluded;
        for (const auto& name : requirement.exceptions) {
            const Entity* entity = diagram.findEntity(name);
            if (!entity)
                throw ModelError("requirement exception '" + name +
                                 "' does not resolve");
            for (const Entity* leaf : leafEntities(*entity))
                excluded.insert(leaf->name);
        }
        for (const Entity* leaf : diagram.leaves())
            if (!excluded.count(leaf->name))
                groups.push_back({leaf->name, {leaf}});
        break;
    }
    }
    return groups;
}

} // namespace

std::vector<const Entity*> resolveTarget(const Requirement& requirement,
                                         const Diagram& diagram) {
    std::vector<const Entity*> out;
    std::set<std::string> seen;
    for (const auto& group : targetGroups(requirement, diagram))
        for (const Entity* leaf : group.leaves)
            if (seen.insert(leaf->name).second) out.push_back(leaf);
    std::sort(out.begin(), out.end(),
              [](const Entity* a, const Entity* b) { return a->name < b->name; });
    return out;
}

std::vector<Verdict> check(const EvaluationState& state,
                           const Diagram& diagram, double threshold) {
    std::vector<Verdict> verdicts;
    for (std::size_t i = 0; i < diagram.requirements.size(); ++i) {
        const Requirement& req = diagram.requirements[i];
        Verdict verdict;
        verdict.requirementIndex = i;
        verdict.threshold = threshold;
        const auto groups = targetGroups(req, diagram);
        if (req.membership) {
            // Every pattern must be held by every target group, each
            // group being served by at least one of its leaves.
            for (const auto& group : groups) {
                for (const auto& pattern : req.items) {
                    bool held = false;
                    for (const Entity* leaf : group.leaves) {
                        for (const auto& [key, grade] :
                             state.itemsAt(leaf->name)) {
                            if (grade > threshold && pattern.matches(key)) {
                                held = true;
                                break;
                            }
                        }
                        if (held) break;
                    }
                    if (!held) {
                        Witness witness;
                        witness.entity = group.name;
                        witness.itemText = patternSummary(pattern);
                        witness.present = false;
                        verdict.witnesses.push_back(std::move(witness));
                    }
                }
            }
        } else {
            // Forbidden at every leaf of every group; each matching
            // (leaf, item) pair is an independent witness.
            std::set<std::pair<std::string, ItemKey>> reported;
            for (const auto& group : groups) {
                for (const Entity* leaf : group.leaves) {
                    for (const auto& [key, grade] : state.itemsAt(leaf->name)) {
                        if (grade <= threshold) continue;
                        bool matched = false;
                        for (const auto& pattern : req.items)
                            if (pattern.matches(key)) {
                                matched = true;
                                break;
                            }
                        if (!matched) continue;
                        if (!reported.insert({leaf->name, key}).second)
                            continue;
                        Witness witness;
                        witness.entity = leaf->name;
                        witness.item = key;
                        witness.itemText = itemKeyText(key);
                        witness.grade = grade;
                        witness.present = true;
                        verdict.witnesses.push_back(std::move(witness));
                    }
                }
            }
        }
        verdict.satisfied = verdict.witnesses.empty();
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

std::string describeRequirement(const Requirement& requirement) {
    std::string out = "require ";
    bool first = true;
    for (const auto& pattern : requirement.items) {
        if (!first) out += ", ";
        first = false;
        out += patternSummary(pattern);
    }
    out += requirement.membership ? " in " : " not-in ";
    if (requirement.targetKind == Requirement::TargetKind::Wildcard)
        out += "*";
    else
        out += requirement.target;
    if (!requirement.exceptions.empty()) {
        out += " \\ ";
        for (std::size_t i = 0; i < requirement.exceptions.size(); ++i) {
            if (i) out += ", ";
            out += requirement.exceptions[i];
        }
    }
    return out;
}

} // namespace i2d
