// Core data model for information inference diagrams: items, entities,
// flows, rules, requirements, and the diagram container. All types are
// plain values; transformations build new diagrams instead of mutating.
#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2d {

/// A sorted, duplicate-free set of class symbols.
class SymbolSet {
public:
    SymbolSet() = default;
    SymbolSet(std::initializer_list<std::string> symbols) {
        for (const auto& s : symbols) insert(s);
    }

    bool insert(const std::string& symbol) {
        auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
        if (it != symbols_.end() && *it == symbol) return false;
        symbols_.insert(it, symbol);
        return true;
    }

    bool contains(const std::string& symbol) const {
        return std::binary_search(symbols_.begin(), symbols_.end(), symbol);
    }

    bool subsetOf(const SymbolSet& other) const {
        return std::includes(other.symbols_.begin(), other.symbols_.end(),
                             symbols_.begin(), symbols_.end());
    }

    bool intersects(const SymbolSet& other) const {
        for (const auto& s : symbols_)
            if (other.contains(s)) return true;
        return false;
    }

    void unionWith(const SymbolSet& other) {
        for (const auto& s : other.symbols_) insert(s);
    }

    /// Elements of this set that are not in `other`.
    SymbolSet difference(const SymbolSet& other) const {
        SymbolSet out;
        for (const auto& s : symbols_)
            if (!other.contains(s)) out.insert(s);
        return out;
    }

    bool empty() const { return symbols_.empty(); }
    std::size_t size() const { return symbols_.size(); }
    auto begin() const { return symbols_.begin(); }
    auto end() const { return symbols_.end(); }
    const std::vector<std::string>& values() const { return symbols_; }

    auto operator<=>(const SymbolSet&) const = default;

private:
    std::vector<std::string> symbols_;
};

/// Identity of an information item: name plus class set. The membership
/// grade is an attribute, never part of the identity.
struct ItemKey {
    std::string name;
    SymbolSet classes;

    auto operator<=>(const ItemKey&) const = default;
};

/// An information item: a named fact with a fuzzy membership grade.
struct Item {
    std::string name;
    SymbolSet classes;
    double grade = 1.0;

    ItemKey key() const { return {name, classes}; }
    auto operator<=>(const Item&) const = default;
};

/// Grade-merged item set; the map key carries the identity.
using ItemSet = std::map<ItemKey, double>;

/// Inserts `item` into `items`, merging grades by maximum when the
/// identity is already present.
ItemSet mergeItem(ItemSet items, const Item& item);

/// In-place variant; returns true when the set or a grade changed.
bool mergeInto(ItemSet& items, const ItemKey& key, double grade);

/// An entity: either simple (a leaf holding items) or complex (holding
/// child entities). Entity names are unique across the whole diagram.
struct Entity {
    std::string name;
    SymbolSet classes;
    bool complex = false;
    std::vector<Item> items;      // simple entities only
    std::vector<Entity> children; // complex entities only

    bool operator==(const Entity&) const = default;
};

/// Collects the simple descendants of `entity` in depth-first order; a
/// simple entity yields itself.
std::vector<const Entity*> leafEntities(const Entity& entity);

/// One entry of a flow's item set: a concrete item reference or the
/// wildcard that shares everything the origin holds.
struct FlowItem {
    bool wildcard = false;
    std::string name;   // empty for the wildcard
    SymbolSet classes;
    double grade = 1.0; // cap applied during propagation

    ItemKey key() const { return {name, classes}; }
    bool operator==(const FlowItem&) const = default;
};

/// A directed sharing relation between two simple entities. Complex
/// flows nest sub-flows and describe protocol-like structure; only the
/// simple flows at the leaves propagate information.
struct Flow {
    std::string name;
    std::string origin;
    std::string target;
    SymbolSet classes;
    bool complex = false;
    std::vector<FlowItem> items; // simple flows only
    std::vector<Flow> subflows;  // complex flows only

    bool operator==(const Flow&) const = default;
};

/// A premise of a rule, normalized into a single pattern per subject.
/// The subject is either a concrete item name or a variable; class
/// constraints are collected from all atoms naming the same subject.
struct ItemPattern {
    std::optional<std::string> itemName; // set for concrete references
    std::string var;                     // set for variable subjects
    SymbolSet required;                  // classes that must be present
    SymbolSet forbidden;                 // negated classes
    bool open = false;                   // wildcard: extra classes allowed
    std::string captureVar;              // class variable for the extras

    /// True when `classes` satisfies this pattern's class constraints.
    bool matchesClasses(const SymbolSet& classes) const;
    /// True when the pattern accepts the item identity `key`.
    bool matches(const ItemKey& key) const;

    bool operator==(const ItemPattern&) const = default;
};

/// One element of an outcome's class list: a literal class symbol or a
/// spliced class variable.
struct ClassTerm {
    bool isVar = false;
    std::string text;

    bool operator==(const ClassTerm&) const = default;
};

/// An item produced by a rule: a literal name or a variable rewrite
/// that reuses the matched item's name with a new class set.
struct ItemOutcome {
    bool fromVar = false;
    std::string nameOrVar;
    std::vector<ClassTerm> classes;

    bool operator==(const ItemOutcome&) const = default;
};

enum class RuleKind { Inference, ClassBased, ClassRewrite, RewriteArrow };

/// An inference rule: premises entail outcomes with a probability, or a
/// rewrite arrow that substitutes items on outgoing flows.
struct Rule {
    SymbolSet scope;       // entity classes; empty applies everywhere
    double probability = 1.0;
    bool rewriteArrow = false;
    std::vector<ItemPattern> premises;
    std::vector<ItemOutcome> outcomes;

    RuleKind kind() const;
    bool usesVariables() const;

    bool operator==(const Rule&) const = default;
};

/// Structural rule triggered by an entity class: grants an item to all
/// leaves of matching entities, attaches a child entity, or attaches a
/// flow with the matching entity at one end.
struct EntityRule {
    enum class Product { Item, Entity, Flow };

    std::string entityClass;
    double probability = 1.0;
    Product product = Product::Item;
    Item item;            // Product::Item
    Entity entity;        // Product::Entity
    Flow flow;            // Product::Flow; `self` marks the matched end
    bool selfIsOrigin = true;

    bool operator==(const EntityRule&) const = default;
};

/// A normative declaration: listed items shall (or shall not) be
/// available at the target.
struct Requirement {
    enum class TargetKind { Entity, EntityClass, Wildcard };

    std::vector<ItemPattern> items;
    bool membership = true; // true: "in", false: "not-in"
    TargetKind targetKind = TargetKind::Entity;
    std::string target;                  // unused for Wildcard
    std::vector<std::string> exceptions; // Wildcard only

    bool operator==(const Requirement&) const = default;
};

/// The diagram: an entity forest plus flows, rules, requirements, and
/// the frozen class registries.
struct Diagram {
    std::vector<std::string> imports;
    SymbolSet itemClasses;
    SymbolSet entityClasses;
    SymbolSet flowClasses;
    std::vector<Entity> entities;
    std::vector<Flow> flows;
    std::vector<Rule> rules;
    std::vector<EntityRule> entityRules;
    std::vector<Requirement> requirements;

    const Entity* findEntity(const std::string& name) const;
    const Flow* findFlow(const std::string& name) const;
    /// All simple entities of the forest in depth-first order.
    std::vector<const Entity*> leaves() const;
    /// All simple flows, including those nested in complex flows.
    std::vector<const Flow*> simpleFlows() const;
    /// Entity classes of `name` together with all its ancestors'.
    SymbolSet inheritedClasses(const std::string& name) const;

    /// Re-derives the implicit class registries from every use site.
    /// Registries only grow; explicit declarations are preserved.
    void refreshRegistries();

    /// Sorted copy: entities, flows, and item sets in canonical order.
    /// Rule and requirement order is preserved (it is meaningful).
    Diagram canonical() const;

    bool operator==(const Diagram&) const = default;
};

/// Order-insensitive comparison for sets (entities, flows, items);
/// order-sensitive for rules and requirements.
bool structurallyEqual(const Diagram& a, const Diagram& b);

/// Base class for hard failures; validation and parse problems are
/// reported as values instead.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace i2d
