#include "i2d/transforms.hpp"

#include <algorithm>
#include <set>

#include "i2d/engine.hpp"
#include "i2d/validate.hpp"

namespace i2d {

namespace {

Entity* findEntityMutable(std::vector<Entity>& entities,
                          const std::string& name) {
    for (auto& e : entities) {
        if (e.name == name) return &e;
        if (Entity* found = findEntityMutable(e.children, name)) return found;
    }
    return nullptr;
}

Flow* findFlowMutable(std::vector<Flow>& flows, const std::string& name) {
    for (auto& f : flows) {
        if (f.name == name) return &f;
        if (Flow* found = findFlowMutable(f.subflows, name)) return found;
    }
    return nullptr;
}

void collectEntityNames(const Entity& e, std::set<std::string>& names) {
    names.insert(e.name);
    for (const auto& c : e.children) collectEntityNames(c, names);
}

std::set<std::string> allEntityNames(const Diagram& d) {
    std::set<std::string> names;
    for (const auto& e : d.entities) collectEntityNames(e, names);
    return names;
}

void collectFlowNames(const Flow& f, std::set<std::string>& names) {
    names.insert(f.name);
    for (const auto& s : f.subflows) collectFlowNames(s, names);
}

std::set<std::string> allFlowNames(const Diagram& d) {
    std::set<std::string> names;
    for (const auto& f : d.flows) collectFlowNames(f, names);
    return names;
}

void addDeclaredItem(std::vector<Item>& items, const Item& item) {
    for (auto& existing : items) {
        if (existing.name == item.name && existing.classes == item.classes) {
            existing.grade = std::max(existing.grade, item.grade);
            return;
        }
    }
    items.push_back(item);
}

// --- simple additions -------------------------------------------------------

Diagram addItem(Diagram d, const AddItem& t) {
    Entity* entity = findEntityMutable(d.entities, t.entity);
    if (!entity)
        throw TransformError("entity '" + t.entity + "' does not resolve");
    if (entity->complex)
        throw TransformError("entity '" + t.entity +
                             "' is complex; add the item to one of its leaves");
    if (t.item.grade < 0.0 || t.item.grade > 1.0)
        throw TransformError("grade must lie in [0,1]");
    addDeclaredItem(entity->items, t.item);
    return d;
}

Diagram addEntity(Diagram d, const AddEntity& t) {
    if (t.entity.complex)
        throw TransformError("only simple entities can be added directly; "
                             "use refine for structure");
    if (allEntityNames(d).count(t.entity.name))
        throw TransformError("entity name '" + t.entity.name +
                             "' already exists");
    if (t.parent.empty()) {
        d.entities.push_back(t.entity);
        return d;
    }
    Entity* parent = findEntityMutable(d.entities, t.parent);
    if (!parent)
        throw TransformError("parent entity '" + t.parent +
                             "' does not resolve");
    if (!parent->complex)
        throw TransformError("parent entity '" + t.parent +
                             "' is simple; refine it instead");
    parent->children.push_back(t.entity);
    return d;
}

Diagram addFlow(Diagram d, const AddFlow& t) {
    if (t.flow.complex)
        throw TransformError("only simple flows can be added directly; "
                             "use bisect for structure");
    if (allFlowNames(d).count(t.flow.name))
        throw TransformError("flow name '" + t.flow.name + "' already exists");
    d.flows.push_back(t.flow);
    return d;
}

Diagram classifyEntity(Diagram d, const ClassifyEntity& t) {
    Entity* entity = findEntityMutable(d.entities, t.entity);
    if (!entity)
        throw TransformError("entity '" + t.entity + "' does not resolve");
    entity->classes.unionWith(t.classes);
    return d;
}

void classifyItemsIn(Entity& entity, const ItemKey& selector,
                     const SymbolSet& classes, std::size_t& hits) {
    std::vector<Item> rewritten;
    for (auto& item : entity.items) {
        if (item.name == selector.name && item.classes == selector.classes) {
            Item updated = item;
            updated.classes.unionWith(classes);
            ++hits;
            addDeclaredItem(rewritten, updated);
        } else {
            addDeclaredItem(rewritten, item);
        }
    }
    entity.items = std::move(rewritten);
    for (auto& child : entity.children)
        classifyItemsIn(child, selector, classes, hits);
}

void classifyItemsIn(Flow& flow, const ItemKey& selector,
                     const SymbolSet& classes, std::size_t& hits) {
    for (auto& fi : flow.items) {
        if (fi.wildcard) continue;
        if (fi.name == selector.name && fi.classes == selector.classes) {
            fi.classes.unionWith(classes);
            ++hits;
        }
    }
    for (auto& sub : flow.subflows)
        classifyItemsIn(sub, selector, classes, hits);
}

Diagram classifyItem(Diagram d, const ClassifyItem& t) {
    std::size_t hits = 0;
    for (auto& e : d.entities) classifyItemsIn(e, t.selector, t.classes, hits);
    for (auto& f : d.flows) classifyItemsIn(f, t.selector, t.classes, hits);
    if (hits == 0)
        throw TransformError("no declared occurrence of item '" +
                             t.selector.name + "' matches the selector");
    return d;
}

Diagram classifyFlow(Diagram d, const ClassifyFlow& t) {
    Flow* flow = findFlowMutable(d.flows, t.flow);
    if (!flow) throw TransformError("flow '" + t.flow + "' does not resolve");
    flow->classes.unionWith(t.classes);
    return d;
}

// --- refinement -------------------------------------------------------------

/// Scripted requirements name their target before a diagram is known;
/// settle entity-versus-class against the actual names.
Diagram addRequirement(Diagram d, const AddRequirement& t) {
    Requirement req = t.requirement;
    if (req.targetKind != Requirement::TargetKind::Wildcard) {
        const bool isEntity = d.findEntity(req.target) != nullptr;
        const bool isClass = d.entityClasses.contains(req.target);
        if (isEntity && isClass)
            throw TransformError("requirement target '" + req.target +
                                 "' is both an entity and an entity class");
        if (!isEntity && !isClass)
            throw TransformError("unknown requirement target '" + req.target +
                                 "'");
        req.targetKind = isEntity ? Requirement::TargetKind::Entity
                                  : Requirement::TargetKind::EntityClass;
    }
    d.requirements.push_back(std::move(req));
    return d;
}

void collectTouchingFlows(const Flow& f, const std::string& entity,
                          std::vector<std::string>& out) {
    if (!f.complex && (f.origin == entity || f.target == entity))
        out.push_back(f.name);
    for (const auto& sub : f.subflows) collectTouchingFlows(sub, entity, out);
}

void retargetFlow(Flow& f, const std::string& name, const std::string& from,
                  const std::string& to) {
    if (f.name == name && !f.complex) {
        if (f.origin == from) f.origin = to;
        if (f.target == from) f.target = to;
    }
    for (auto& sub : f.subflows) retargetFlow(sub, name, from, to);
}

Diagram refineEntityImpl(Diagram d, const RefineEntity& spec,
                         std::vector<std::string>& notes) {
    Entity* entity = findEntityMutable(d.entities, spec.entity);
    if (!entity)
        throw TransformError("entity '" + spec.entity + "' does not resolve");
    if (entity->complex)
        throw TransformError("entity '" + spec.entity + "' is already complex");
    if (spec.children.empty())
        throw TransformError("refinement needs at least one child");

    auto names = allEntityNames(d);
    std::set<std::string> childNames;
    for (const auto& child : spec.children) {
        std::set<std::string> incoming;
        collectEntityNames(child, incoming);
        for (const auto& n : incoming) {
            if (names.count(n))
                throw TransformError("child name '" + n + "' already exists");
            if (!childNames.insert(n).second)
                throw TransformError("child name '" + n + "' repeats");
        }
    }

    auto childLeaf = [&](const std::string& name) -> const Entity* {
        for (const auto& child : spec.children)
            if (child.name == name)
                return child.complex ? nullptr : &child;
        return nullptr;
    };

    // The parent's items are reassigned to exactly one designated child.
    if (!entity->items.empty()) {
        if (spec.itemsTo.empty())
            throw TransformError("entity '" + spec.entity +
                                 "' holds items; designate a child with "
                                 "'items to'");
        if (!childLeaf(spec.itemsTo))
            throw TransformError("items target '" + spec.itemsTo +
                                 "' is not a simple child of the refinement");
    }

    std::vector<std::string> touching;
    for (const auto& f : d.flows)
        collectTouchingFlows(f, spec.entity, touching);
    for (const auto& flowName : touching) {
        auto it = spec.retarget.find(flowName);
        if (it == spec.retarget.end())
            throw TransformError("flow '" + flowName +
                                 "' touches the refined entity but has no "
                                 "retarget entry");
        if (!childLeaf(it->second))
            throw TransformError("retarget of flow '" + flowName +
                                 "' names '" + it->second +
                                 "', which is not a simple child");
    }
    for (const auto& [flowName, child] : spec.retarget)
        if (std::find(touching.begin(), touching.end(), flowName) ==
            touching.end())
            notes.push_back("retarget entry for flow '" + flowName +
                            "' was not needed");

    std::vector<Item> moved = std::move(entity->items);
    entity->items.clear();
    entity->complex = true;
    entity->children = spec.children;
    if (!moved.empty()) {
        Entity* target = findEntityMutable(entity->children, spec.itemsTo);
        for (const auto& item : moved) addDeclaredItem(target->items, item);
    }
    for (const auto& flowName : touching) {
        const std::string& child = spec.retarget.at(flowName);
        for (auto& f : d.flows) retargetFlow(f, flowName, spec.entity, child);
    }
    return d;
}

// --- bisection ---------------------------------------------------------------

Diagram bisectImpl(Diagram d, const std::string& flowName,
                   const std::string& mediatorName,
                   std::vector<std::string>& notes) {
    Flow* flow = findFlowMutable(d.flows, flowName);
    if (!flow)
        throw TransformError("flow '" + flowName + "' does not resolve");
    if (flow->complex)
        throw TransformError("flow '" + flowName +
                             "' is already complex; bisect one of its "
                             "sub-flows");
    if (mediatorName == flow->origin || mediatorName == flow->target)
        throw TransformError("mediator must differ from the flow endpoints");

    Entity* mediator = findEntityMutable(d.entities, mediatorName);
    if (mediator && mediator->complex)
        throw TransformError("mediator '" + mediatorName +
                             "' is a complex entity");
    if (!mediator) {
        Entity created;
        created.name = mediatorName;
        d.entities.push_back(std::move(created));
        mediator = &d.entities.back();
        flow = findFlowMutable(d.flows, flowName); // re-resolve, paranoia
    }

    // The mediator learns what it can actually relay: the flow's items
    // held by the origin (a wildcard shares the whole declared set).
    const Entity* origin = d.findEntity(flow->origin);
    for (const auto& entry : flow->items) {
        if (entry.wildcard) {
            for (const auto& item : origin->items) {
                Item learned = item;
                learned.grade = std::min(item.grade, entry.grade);
                if (std::any_of(mediator->items.begin(), mediator->items.end(),
                                [&](const Item& m) {
                                    return m.key() == learned.key();
                                }))
                    notes.push_back("mediator '" + mediatorName +
                                    "' already held " + item.name +
                                    "; grades merged by maximum");
                addDeclaredItem(mediator->items, learned);
            }
            continue;
        }
        for (const auto& item : origin->items) {
            if (item.key() != entry.key()) continue;
            Item learned = item;
            learned.grade = std::min(item.grade, entry.grade);
            if (std::any_of(mediator->items.begin(), mediator->items.end(),
                            [&](const Item& m) {
                                return m.key() == learned.key();
                            }))
                notes.push_back("mediator '" + mediatorName +
                                "' already held " + item.name +
                                "; grades merged by maximum");
            addDeclaredItem(mediator->items, learned);
        }
    }

    const auto flowNames = allFlowNames(d);
    const std::string firstName = flowName + "_1";
    const std::string secondName = flowName + "_2";
    if (flowNames.count(firstName) || flowNames.count(secondName))
        throw TransformError("bisection sub-flow names for '" + flowName +
                             "' collide with existing flows");

    Flow first;
    first.name = firstName;
    first.origin = flow->origin;
    first.target = mediatorName;
    first.items = flow->items;
    Flow second;
    second.name = secondName;
    second.origin = mediatorName;
    second.target = flow->target;
    second.items = flow->items;

    flow->complex = true;
    flow->items.clear();
    flow->subflows.push_back(std::move(first));
    flow->subflows.push_back(std::move(second));
    return d;
}

// --- views --------------------------------------------------------------------

struct FoldContext {
    std::map<std::string, std::string> redirect; // removed leaf -> fold
    std::vector<std::string>* notes;
};

void collectFoldClasses(const Entity& e, SymbolSet& classes) {
    classes.unionWith(e.classes);
    for (const auto& c : e.children) collectFoldClasses(c, classes);
}

/// Collapses `e` into a simple entity aggregating its leaves.
Entity collapse(const Entity& e, FoldContext& ctx) {
    if (!e.complex) return e;
    Entity folded;
    folded.name = e.name;
    collectFoldClasses(e, folded.classes);
    ItemSet merged;
    for (const Entity* leaf : leafEntities(e)) {
        ctx.redirect[leaf->name] = e.name;
        for (const auto& item : leaf->items)
            mergeInto(merged, item.key(), item.grade);
    }
    for (const auto& [key, grade] : merged)
        folded.items.push_back({key.name, key.classes, grade});
    return folded;
}

Entity foldAt(const Entity& e, std::size_t depth, FoldContext& ctx) {
    if (!e.complex) return e;
    if (depth == 0) return collapse(e, ctx);
    Entity out = e;
    out.children.clear();
    for (const auto& child : e.children)
        out.children.push_back(foldAt(child, depth - 1, ctx));
    return out;
}

/// Applies the redirection map to all flows, dropping flows that fall
/// inside one fold and merging redirected duplicates.
std::vector<Flow> redirectFlows(const std::vector<Flow>& flows,
                                FoldContext& ctx) {
    std::vector<Flow> out;
    for (const auto& f : flows) {
        Flow copy = f;
        bool redirected = false;
        if (auto it = ctx.redirect.find(copy.origin);
            it != ctx.redirect.end()) {
            copy.origin = it->second;
            redirected = true;
        }
        if (auto it = ctx.redirect.find(copy.target);
            it != ctx.redirect.end()) {
            copy.target = it->second;
            redirected = true;
        }
        if (copy.complex) {
            copy.subflows = redirectFlows(f.subflows, ctx);
            if (copy.subflows.empty()) {
                ctx.notes->push_back("flow '" + copy.name +
                                     "' dropped: all sub-flows fold away");
                continue;
            }
            out.push_back(std::move(copy));
            continue;
        }
        if (copy.origin == copy.target) {
            ctx.notes->push_back("flow '" + copy.name +
                                 "' dropped: both endpoints inside the fold");
            continue;
        }
        if (redirected) {
            // Merge with an earlier flow sharing the endpoints.
            bool mergedAway = false;
            for (auto& existing : out) {
                if (existing.complex || existing.origin != copy.origin ||
                    existing.target != copy.target)
                    continue;
                for (const auto& entry : copy.items) {
                    if (std::find(existing.items.begin(), existing.items.end(),
                                  entry) == existing.items.end())
                        existing.items.push_back(entry);
                }
                ctx.notes->push_back("flow '" + copy.name + "' merged into '" +
                                     existing.name + "'");
                mergedAway = true;
                break;
            }
            if (mergedAway) continue;
        }
        out.push_back(std::move(copy));
    }
    return out;
}

Diagram foldViewImpl(Diagram d, const std::string& entityName,
                     std::size_t depth, std::vector<std::string>& notes) {
    Entity* entity = findEntityMutable(d.entities, entityName);
    if (!entity)
        throw TransformError("entity '" + entityName + "' does not resolve");
    if (!entity->complex) return d; // folding a leaf is the identity
    FoldContext ctx{{}, &notes};
    *entity = foldAt(*entity, depth, ctx);
    if (ctx.redirect.empty()) return d; // depth beyond the tree height
    d.flows = redirectFlows(d.flows, ctx);
    return d;
}

} // namespace

TransformResult refineEntity(const Diagram& diagram, const RefineEntity& spec) {
    return applyTransform(diagram, spec);
}

TransformResult bisect(const Diagram& diagram, const std::string& flow,
                       const std::string& mediator) {
    return applyTransform(diagram, Bisect{flow, mediator});
}

TransformResult foldView(const Diagram& diagram, const std::string& entity,
                         std::size_t depth) {
    return applyTransform(diagram, FoldView{entity, depth});
}

TransformResult applyTransform(const Diagram& diagram,
                               const Transformation& t) {
    TransformResult result;
    std::vector<std::string>& notes = result.notes;
    Diagram next = std::visit(
        [&](const auto& spec) -> Diagram {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, AddItem>)
                return addItem(diagram, spec);
            else if constexpr (std::is_same_v<T, AddEntity>)
                return addEntity(diagram, spec);
            else if constexpr (std::is_same_v<T, AddFlow>)
                return addFlow(diagram, spec);
            else if constexpr (std::is_same_v<T, ClassifyEntity>)
                return classifyEntity(diagram, spec);
            else if constexpr (std::is_same_v<T, ClassifyItem>)
                return classifyItem(diagram, spec);
            else if constexpr (std::is_same_v<T, ClassifyFlow>)
                return classifyFlow(diagram, spec);
            else if constexpr (std::is_same_v<T, AddRule>)
                return [&] {
                    Diagram d = diagram;
                    d.rules.push_back(spec.rule);
                    return d;
                }();
            else if constexpr (std::is_same_v<T, AddEntityRule>)
                return [&] {
                    Diagram d = diagram;
                    d.entityRules.push_back(spec.rule);
                    return d;
                }();
            else if constexpr (std::is_same_v<T, AddRequirement>)
                return addRequirement(diagram, spec);
            else if constexpr (std::is_same_v<T, RefineEntity>)
                return refineEntityImpl(diagram, spec, notes);
            else if constexpr (std::is_same_v<T, Bisect>)
                return bisectImpl(diagram, spec.flow, spec.mediator, notes);
            else
                return foldViewImpl(diagram, spec.entity, spec.depth, notes);
        },
        t);
    next.refreshRegistries();
    // Classification rules cascade after every change; a view stays as
    // cut, otherwise re-expansion would undo the abstraction.
    if (!std::holds_alternative<FoldView>(t)) {
        try {
            next = expandStructuralRules(next);
        } catch (const ExpansionError& e) {
            throw TransformError(e.what());
        }
    }
    ValidationReport report = validate(next);
    if (!report.ok()) {
        std::string message = "transformation produces an invalid diagram:";
        for (const auto& issue : report.issues)
            message += "\n  " + issue.where + ": " + issue.message;
        throw TransformError(message);
    }
    result.diagram = std::move(next);
    return result;
}

} // namespace i2d
