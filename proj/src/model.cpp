#include "i2d/model.hpp"

namespace i2d {

ItemSet mergeItem(ItemSet items, const Item& item) {
    mergeInto(items, item.key(), item.grade);
    return items;
}

bool mergeInto(ItemSet& items, const ItemKey& key, double grade) {
    auto [it, inserted] = items.emplace(key, grade);
    if (inserted) return true;
    if (grade > it->second) {
        it->second = grade;
        return true;
    }
    return false;
}

std::vector<const Entity*> leafEntities(const Entity& entity) {
    std::vector<const Entity*> out;
    if (!entity.complex) {
        out.push_back(&entity);
        return out;
    }
    for (const auto& child : entity.children) {
        auto sub = leafEntities(child);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

bool ItemPattern::matchesClasses(const SymbolSet& classes) const {
    if (!required.subsetOf(classes)) return false;
    if (forbidden.intersects(classes)) return false;
    if (!open && !(classes == required)) return false;
    return true;
}

bool ItemPattern::matches(const ItemKey& key) const {
    if (itemName && *itemName != key.name) return false;
    return matchesClasses(key.classes);
}

bool Rule::usesVariables() const {
    for (const auto& p : premises)
        if (!p.itemName) return true;
    return false;
}

RuleKind Rule::kind() const {
    if (rewriteArrow) return RuleKind::RewriteArrow;
    if (!usesVariables()) return RuleKind::Inference;
    for (const auto& o : outcomes)
        if (o.fromVar) return RuleKind::ClassRewrite;
    return RuleKind::ClassBased;
}

namespace {

const Entity* findEntityIn(const Entity& entity, const std::string& name) {
    if (entity.name == name) return &entity;
    for (const auto& child : entity.children)
        if (const Entity* found = findEntityIn(child, name)) return found;
    return nullptr;
}

const Flow* findFlowIn(const Flow& flow, const std::string& name) {
    if (flow.name == name) return &flow;
    for (const auto& sub : flow.subflows)
        if (const Flow* found = findFlowIn(sub, name)) return found;
    return nullptr;
}

void collectSimpleFlows(const Flow& flow, std::vector<const Flow*>& out) {
    if (!flow.complex) {
        out.push_back(&flow);
        return;
    }
    for (const auto& sub : flow.subflows) collectSimpleFlows(sub, out);
}

bool inheritedClassesIn(const Entity& entity, const std::string& name,
                        SymbolSet inherited, SymbolSet& out) {
    inherited.unionWith(entity.classes);
    if (entity.name == name) {
        out = inherited;
        return true;
    }
    for (const auto& child : entity.children)
        if (inheritedClassesIn(child, name, inherited, out)) return true;
    return false;
}

void registerEntity(const Entity& entity, SymbolSet& entityClasses,
                    SymbolSet& itemClasses) {
    entityClasses.unionWith(entity.classes);
    for (const auto& item : entity.items) itemClasses.unionWith(item.classes);
    for (const auto& child : entity.children)
        registerEntity(child, entityClasses, itemClasses);
}

void registerFlow(const Flow& flow, SymbolSet& flowClasses,
                  SymbolSet& itemClasses) {
    flowClasses.unionWith(flow.classes);
    for (const auto& fi : flow.items) itemClasses.unionWith(fi.classes);
    for (const auto& sub : flow.subflows)
        registerFlow(sub, flowClasses, itemClasses);
}

void registerPattern(const ItemPattern& p, SymbolSet& itemClasses) {
    itemClasses.unionWith(p.required);
    itemClasses.unionWith(p.forbidden);
}

Entity canonicalEntity(const Entity& entity) {
    Entity out = entity;
    std::sort(out.items.begin(), out.items.end());
    std::vector<Entity> children;
    children.reserve(out.children.size());
    for (const auto& c : out.children) children.push_back(canonicalEntity(c));
    std::sort(children.begin(), children.end(),
              [](const Entity& a, const Entity& b) { return a.name < b.name; });
    out.children = std::move(children);
    return out;
}

Flow canonicalFlow(const Flow& flow) {
    Flow out = flow;
    std::sort(out.items.begin(), out.items.end(),
              [](const FlowItem& a, const FlowItem& b) {
                  return std::tie(a.wildcard, a.name, a.classes, a.grade) <
                         std::tie(b.wildcard, b.name, b.classes, b.grade);
              });
    std::vector<Flow> subs;
    subs.reserve(out.subflows.size());
    for (const auto& s : out.subflows) subs.push_back(canonicalFlow(s));
    std::sort(subs.begin(), subs.end(),
              [](const Flow& a, const Flow& b) { return a.name < b.name; });
    out.subflows = std::move(subs);
    return out;
}

} // namespace

const Entity* Diagram::findEntity(const std::string& name) const {
    for (const auto& e : entities)
        if (const Entity* found = findEntityIn(e, name)) return found;
    return nullptr;
}

const Flow* Diagram::findFlow(const std::string& name) const {
    for (const auto& f : flows)
        if (const Flow* found = findFlowIn(f, name)) return found;
    return nullptr;
}

std::vector<const Entity*> Diagram::leaves() const {
    std::vector<const Entity*> out;
    for (const auto& e : entities) {
        auto sub = leafEntities(e);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::vector<const Flow*> Diagram::simpleFlows() const {
    std::vector<const Flow*> out;
    for (const auto& f : flows) collectSimpleFlows(f, out);
    return out;
}

SymbolSet Diagram::inheritedClasses(const std::string& name) const {
    SymbolSet out;
    for (const auto& e : entities)
        if (inheritedClassesIn(e, name, {}, out)) return out;
    return out;
}

void Diagram::refreshRegistries() {
    for (const auto& e : entities) registerEntity(e, entityClasses, itemClasses);
    for (const auto& f : flows) registerFlow(f, flowClasses, itemClasses);
    for (const auto& r : rules) {
        entityClasses.unionWith(r.scope);
        for (const auto& p : r.premises) registerPattern(p, itemClasses);
        for (const auto& o : r.outcomes)
            for (const auto& c : o.classes)
                if (!c.isVar) itemClasses.insert(c.text);
    }
    for (const auto& er : entityRules) {
        entityClasses.insert(er.entityClass);
        switch (er.product) {
        case EntityRule::Product::Item:
            itemClasses.unionWith(er.item.classes);
            break;
        case EntityRule::Product::Entity:
            registerEntity(er.entity, entityClasses, itemClasses);
            break;
        case EntityRule::Product::Flow:
            registerFlow(er.flow, flowClasses, itemClasses);
            break;
        }
    }
}

Diagram Diagram::canonical() const {
    Diagram out = *this;
    std::sort(out.imports.begin(), out.imports.end());
    out.imports.erase(std::unique(out.imports.begin(), out.imports.end()),
                      out.imports.end());
    std::vector<Entity> ents;
    ents.reserve(out.entities.size());
    for (const auto& e : out.entities) ents.push_back(canonicalEntity(e));
    std::sort(ents.begin(), ents.end(),
              [](const Entity& a, const Entity& b) { return a.name < b.name; });
    out.entities = std::move(ents);
    std::vector<Flow> fls;
    fls.reserve(out.flows.size());
    for (const auto& f : out.flows) fls.push_back(canonicalFlow(f));
    std::sort(fls.begin(), fls.end(),
              [](const Flow& a, const Flow& b) { return a.name < b.name; });
    out.flows = std::move(fls);
    return out;
}

bool structurallyEqual(const Diagram& a, const Diagram& b) {
    return a.canonical() == b.canonical();
}

} // namespace i2d
