#include "i2d/validate.hpp"

#include <map>
#include <set>

namespace i2d {

namespace {

class Validator {
public:
    explicit Validator(const Diagram& diagram) : diagram_(diagram) {}

    ValidationReport run() {
        for (const auto& e : diagram_.entities) collectEntity(e, "");
        for (const auto& f : diagram_.flows) collectFlow(f);
        for (const auto& e : diagram_.entities) checkEntity(e);
        for (const auto& f : diagram_.flows) checkFlow(f, true);
        for (std::size_t i = 0; i < diagram_.rules.size(); ++i)
            checkRule(diagram_.rules[i], i);
        for (std::size_t i = 0; i < diagram_.entityRules.size(); ++i)
            checkEntityRule(diagram_.entityRules[i], i);
        for (std::size_t i = 0; i < diagram_.requirements.size(); ++i)
            checkRequirement(diagram_.requirements[i], i);
        return std::move(report_);
    }

private:
    void issue(const std::string& where, const std::string& message) {
        report_.issues.push_back({where, message});
    }

    void collectEntity(const Entity& e, const std::string& parent) {
        if (e.name.empty()) issue("entity", "entity name must be non-empty");
        auto [it, fresh] = entityParent_.emplace(e.name, parent);
        if (!fresh)
            issue("entity " + e.name, "entity name is not unique");
        simple_[e.name] = !e.complex;
        for (const auto& child : e.children) collectEntity(child, e.name);
    }

    void collectFlow(const Flow& f) {
        if (f.name.empty()) issue("flow", "flow name must be non-empty");
        if (!flowNames_.insert(f.name).second)
            issue("flow " + f.name, "flow name is not unique");
        for (const auto& sub : f.subflows) collectFlow(sub);
    }

    void checkItem(const std::string& where, const Item& item) {
        if (item.name.empty()) issue(where, "item name must be non-empty");
        if (item.grade < 0.0 || item.grade > 1.0)
            issue(where, "grade must lie in [0,1]");
        checkItemClasses(where, item.classes);
    }

    void checkItemClasses(const std::string& where, const SymbolSet& classes) {
        for (const auto& c : classes)
            if (!diagram_.itemClasses.contains(c))
                issue(where, "item class '" + c + "' is not declared");
    }

    void checkEntityClasses(const std::string& where, const SymbolSet& classes) {
        for (const auto& c : classes)
            if (!diagram_.entityClasses.contains(c))
                issue(where, "entity class '" + c + "' is not declared");
    }

    void checkEntity(const Entity& e) {
        const std::string where = "entity " + e.name;
        checkEntityClasses(where, e.classes);
        if (e.complex) {
            if (e.children.empty())
                issue(where, "complex entity must have at least one child");
            if (!e.items.empty())
                issue(where, "complex entity must not hold items");
            for (const auto& child : e.children) checkEntity(child);
        } else {
            if (!e.children.empty())
                issue(where, "simple entity must not have children");
            for (const auto& item : e.items)
                checkItem(where + "/item " + item.name, item);
        }
    }

    void checkEndpoint(const std::string& where, const std::string& name) {
        auto it = simple_.find(name);
        if (it == simple_.end())
            issue(where, "flow endpoint '" + name + "' does not resolve");
        else if (!it->second)
            issue(where, "flow endpoints must be simple");
    }

    void checkFlow(const Flow& f, bool top) {
        const std::string where = "flow " + f.name;
        if (f.origin == f.target) issue(where, "flow endpoints must differ");
        // Complex parents summarize their sub-flows; only the parents of
        // simple flows need simple endpoints.
        if (!f.complex) {
            checkEndpoint(where, f.origin);
            checkEndpoint(where, f.target);
        } else {
            if (top) {
                if (!simple_.count(f.origin))
                    issue(where, "flow endpoint '" + f.origin + "' does not resolve");
                if (!simple_.count(f.target))
                    issue(where, "flow endpoint '" + f.target + "' does not resolve");
            }
            if (f.subflows.empty())
                issue(where, "complex flow must have at least one sub-flow");
            if (!f.items.empty())
                issue(where, "complex flow must not carry items directly");
        }
        for (const auto& c : f.classes)
            if (!diagram_.flowClasses.contains(c))
                issue(where, "flow class '" + c + "' is not declared");
        for (const auto& fi : f.items) {
            if (fi.wildcard) continue;
            if (fi.name.empty()) issue(where, "flow item name must be non-empty");
            if (fi.grade < 0.0 || fi.grade > 1.0)
                issue(where, "grade must lie in [0,1]");
            checkItemClasses(where, fi.classes);
        }
        for (const auto& sub : f.subflows) checkFlow(sub, false);
    }

    void checkPattern(const std::string& where, const ItemPattern& p,
                      std::set<std::string>& vars,
                      std::set<std::string>& classVars) {
        if (!p.itemName && p.var.empty())
            issue(where, "premise must name an item or bind a variable");
        if (!p.captureVar.empty()) classVars.insert(p.captureVar);
        if (!p.var.empty()) vars.insert(p.var);
        checkItemClasses(where, p.required);
        checkItemClasses(where, p.forbidden);
    }

    void checkRule(const Rule& r, std::size_t index) {
        const std::string where = "rule #" + std::to_string(index + 1);
        checkEntityClasses(where, r.scope);
        if (r.probability < 0.0 || r.probability > 1.0)
            issue(where, "probability must lie in [0,1]");
        if (r.premises.empty()) issue(where, "rule must have a premise");
        if (r.outcomes.empty()) issue(where, "rule must have an outcome");
        std::set<std::string> vars;
        std::set<std::string> classVars;
        for (const auto& p : r.premises) checkPattern(where, p, vars, classVars);
        for (const auto& o : r.outcomes) {
            if (o.fromVar && !vars.count(o.nameOrVar))
                issue(where, "outcome variable '" + o.nameOrVar +
                                 "' is not bound by a premise");
            for (const auto& c : o.classes) {
                if (c.isVar) {
                    if (!classVars.count(c.text))
                        issue(where, "class variable '" + c.text +
                                         "' is not bound by a premise");
                } else if (!diagram_.itemClasses.contains(c.text)) {
                    issue(where, "item class '" + c.text + "' is not declared");
                }
            }
        }
        if (r.rewriteArrow) {
            if (r.premises.size() != 1)
                issue(where, "rewrite arrow must have exactly one premise");
            if (r.outcomes.size() != 1 || r.outcomes[0].fromVar)
                issue(where, "rewrite arrow must have one concrete outcome");
            for (const auto& o : r.outcomes)
                for (const auto& c : o.classes)
                    if (c.isVar)
                        issue(where, "rewrite arrow outcome must be concrete");
        }
        // Variables must stay disjoint from item names, otherwise the
        // outcome notation becomes ambiguous.
        for (const auto& v : vars)
            if (declaredItemNames().count(v))
                issue(where, "variable '" + v + "' collides with an item name");
    }

    void checkEntityRule(const EntityRule& er, std::size_t index) {
        const std::string where = "erule #" + std::to_string(index + 1);
        if (!diagram_.entityClasses.contains(er.entityClass))
            issue(where, "entity class '" + er.entityClass + "' is not declared");
        if (er.probability < 0.0 || er.probability > 1.0)
            issue(where, "probability must lie in [0,1]");
        switch (er.product) {
        case EntityRule::Product::Item:
            checkItem(where, er.item);
            break;
        case EntityRule::Product::Entity:
            if (er.entity.name.empty())
                issue(where, "child entity needs a name");
            break;
        case EntityRule::Product::Flow: {
            const std::string& other =
                er.selfIsOrigin ? er.flow.target : er.flow.origin;
            if (other.empty() || other == "self")
                issue(where, "flow counterpart must be a concrete entity");
            break;
        }
        }
    }

    void checkRequirement(const Requirement& req, std::size_t index) {
        const std::string where = "requirement #" + std::to_string(index + 1);
        if (req.items.empty()) issue(where, "requirement lists no items");
        std::set<std::string> vars;
        std::set<std::string> classVars;
        for (const auto& p : req.items) checkPattern(where, p, vars, classVars);
        if (!req.exceptions.empty() &&
            req.targetKind != Requirement::TargetKind::Wildcard)
            issue(where, "exceptions are only permitted with the wildcard target");
        switch (req.targetKind) {
        case Requirement::TargetKind::Entity:
            if (!simple_.count(req.target))
                issue(where, "target entity '" + req.target + "' does not resolve");
            break;
        case Requirement::TargetKind::EntityClass:
            if (!diagram_.entityClasses.contains(req.target))
                issue(where, "target class '" + req.target + "' is not declared");
            break;
        case Requirement::TargetKind::Wildcard:
            break;
        }
        for (const auto& ex : req.exceptions)
            if (!simple_.count(ex))
                issue(where, "exception entity '" + ex + "' does not resolve");
    }

    const std::set<std::string>& declaredItemNames() {
        if (!itemNames_.empty() || itemNamesBuilt_) return itemNames_;
        itemNamesBuilt_ = true;
        for (const Entity* leaf : diagram_.leaves())
            for (const auto& item : leaf->items) itemNames_.insert(item.name);
        for (const Flow* f : diagram_.simpleFlows())
            for (const auto& fi : f->items)
                if (!fi.wildcard) itemNames_.insert(fi.name);
        return itemNames_;
    }

    const Diagram& diagram_;
    ValidationReport report_;
    std::map<std::string, std::string> entityParent_;
    std::map<std::string, bool> simple_;
    std::set<std::string> flowNames_;
    std::set<std::string> itemNames_;
    bool itemNamesBuilt_ = false;
};

} // namespace

ValidationReport validate(const Diagram& diagram) {
    return Validator(diagram).run();
}

} // namespace i2d
