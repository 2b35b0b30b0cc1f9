#include "i2d/engine.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace i2d {

namespace {

constexpr std::size_t kBoundCap = 1'000'000'000;
constexpr std::size_t kExpansionCap = 10'000;

const ItemSet kEmptySet{};

} // namespace

const ItemSet& EvaluationState::itemsAt(const std::string& entity) const {
    auto it = entityItems.find(entity);
    return it == entityItems.end() ? kEmptySet : it->second;
}

bool EvaluationState::holds(const std::string& entity,
                            const ItemKey& item) const {
    const ItemSet& items = itemsAt(entity);
    auto it = items.find(item);
    return it != items.end() && it->second > 0.0;
}

double EvaluationState::gradeAt(const std::string& entity,
                                const ItemKey& item) const {
    const ItemSet& items = itemsAt(entity);
    auto it = items.find(item);
    return it == items.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Structural expansion
// ---------------------------------------------------------------------------

namespace {

Entity* findEntityMutable(std::vector<Entity>& entities,
                          const std::string& name) {
    for (auto& e : entities) {
        if (e.name == name) return &e;
        if (Entity* found = findEntityMutable(e.children, name)) return found;
    }
    return nullptr;
}

void collectNames(const Entity& e, std::set<std::string>& names) {
    names.insert(e.name);
    for (const auto& c : e.children) collectNames(c, names);
}

void retargetFlows(std::vector<Flow>& flows, const std::string& from,
                   const std::string& to) {
    for (auto& f : flows) {
        if (!f.complex) {
            if (f.origin == from) f.origin = to;
            if (f.target == from) f.target = to;
        }
        retargetFlows(f.subflows, from, to);
    }
}

bool flowTouches(const Flow& f, const std::string& name) {
    if (!f.complex && (f.origin == name || f.target == name)) return true;
    for (const auto& sub : f.subflows)
        if (flowTouches(sub, name)) return true;
    return false;
}

/// Entities whose own class set contains `entityClass`.
std::vector<std::string> matchingEntities(const std::vector<Entity>& entities,
                                          const std::string& entityClass) {
    std::vector<std::string> out;
    struct Walker {
        const std::string& cls;
        std::vector<std::string>& out;
        void walk(const Entity& e) {
            if (e.classes.contains(cls)) out.push_back(e.name);
            for (const auto& c : e.children) walk(c);
        }
    } walker{entityClass, out};
    for (const auto& e : entities) walker.walk(e);
    return out;
}

class Expander {
public:
    explicit Expander(Diagram diagram) : diagram_(std::move(diagram)) {}

    Diagram run() {
        for (std::size_t round = 0;; ++round) {
            if (round > kExpansionCap)
                throw ExpansionError(
                    "structural rules do not stabilize (cyclic additions?)");
            bool changed = false;
            for (std::size_t i = 0; i < diagram_.entityRules.size(); ++i) {
                const EntityRule er = diagram_.entityRules[i];
                switch (er.product) {
                case EntityRule::Product::Item:
                    break; // applied as seeds during evaluation
                case EntityRule::Product::Entity:
                    changed |= applyEntityRule(er);
                    break;
                case EntityRule::Product::Flow:
                    changed |= applyFlowRule(er, i);
                    break;
                }
            }
            if (!changed) break;
        }
        diagram_.refreshRegistries();
        return std::move(diagram_);
    }

private:
    bool applyEntityRule(const EntityRule& er) {
        bool changed = false;
        for (const auto& name : matchingEntities(diagram_.entities,
                                                 er.entityClass)) {
            Entity* host = findEntityMutable(diagram_.entities, name);
            if (!host) continue;
            bool present = false;
            for (const auto& child : host->children)
                if (child.name == er.entity.name) present = true;
            if (present) continue;
            std::set<std::string> names;
            for (const auto& e : diagram_.entities) collectNames(e, names);
            std::set<std::string> incoming;
            collectNames(er.entity, incoming);
            for (const auto& n : incoming)
                if (names.count(n))
                    throw ExpansionError("classification rule for class '" +
                                         er.entityClass +
                                         "' collides with existing entity '" +
                                         n + "'");
            if (!host->complex) convertToComplex(*host, names);
            host->children.push_back(er.entity);
            host = nullptr; // conversion may reallocate on next lookup
            changed = true;
        }
        return changed;
    }

    /// A simple host gains children: its declared items and attached
    /// flows move to a dedicated "<name>_core" leaf so nothing is lost.
    void convertToComplex(Entity& host, const std::set<std::string>& names) {
        bool touched = false;
        for (const auto& f : diagram_.flows)
            if (flowTouches(f, host.name)) touched = true;
        host.complex = true;
        if (host.items.empty() && !touched) return;
        const std::string coreName = host.name + "_core";
        if (names.count(coreName))
            throw ExpansionError("cannot split entity '" + host.name +
                                 "': name '" + coreName + "' already exists");
        Entity core;
        core.name = coreName;
        core.items = std::move(host.items);
        host.items.clear();
        host.children.push_back(std::move(core));
        retargetFlows(diagram_.flows, host.name, coreName);
    }

    bool applyFlowRule(const EntityRule& er, std::size_t ruleIndex) {
        // Copy the leaf names up front: attaching flows may create the
        // counterpart entity and reallocate the forest.
        std::vector<std::string> leafNames;
        for (const auto& name : matchingEntities(diagram_.entities,
                                                 er.entityClass)) {
            const Entity* host = diagram_.findEntity(name);
            if (!host) continue;
            for (const Entity* leaf : leafEntities(*host))
                leafNames.push_back(leaf->name);
        }
        bool changed = false;
        for (const auto& leafName : leafNames)
            changed |= attachFlow(er, ruleIndex, leafName);
        return changed;
    }

    bool attachFlow(const EntityRule& er, std::size_t ruleIndex,
                    const std::string& leafName) {
        const std::string base =
            er.flow.name.empty()
                ? "f_" + er.entityClass + std::to_string(ruleIndex + 1)
                : er.flow.name;
        const std::string flowName = base + "_" + leafName;
        if (diagram_.findFlow(flowName)) return false;
        const std::string other =
            er.selfIsOrigin ? er.flow.target : er.flow.origin;
        if (other == leafName)
            throw ExpansionError("classification rule for class '" +
                                 er.entityClass +
                                 "' would create a self-flow at '" + leafName +
                                 "'");
        const Entity* counterpart = diagram_.findEntity(other);
        if (counterpart && counterpart->complex)
            throw ExpansionError("flow counterpart '" + other +
                                 "' is a complex entity");
        if (!counterpart) {
            Entity created;
            created.name = other;
            diagram_.entities.push_back(std::move(created));
        }
        Flow flow = er.flow;
        flow.name = flowName;
        flow.origin = er.selfIsOrigin ? leafName : other;
        flow.target = er.selfIsOrigin ? other : leafName;
        diagram_.flows.push_back(std::move(flow));
        return true;
    }

    Diagram diagram_;
};

} // namespace

Diagram expandStructuralRules(const Diagram& diagram) {
    return Expander(diagram).run();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

struct Substitution {
    std::size_t ruleIndex;
    const ItemPattern* pattern;
    ItemKey replacement;
};

struct LeafInfo {
    std::string name;
    SymbolSet inheritedClasses;
    const Entity* entity;
};

/// Premise binding: one matched item per pattern plus captured classes.
struct Binding {
    std::vector<ItemKey> items;
    std::vector<double> grades;
    std::map<std::string, SymbolSet> captures; // class variables
    std::map<std::string, ItemKey> vars;       // subject variables
};

class Evaluator {
public:
    Evaluator(const Diagram& diagram, const EvalConfig& config)
        : diagram_(diagram), config_(config) {}

    EvaluationState run() {
        collectLeaves();
        collectFlows();
        initializeState();
        state_.iterationBound = iterationBound();
        if (config_.instrument) state_.history.push_back(state_.entityItems);

        if (config_.rewriteMode == EvalConfig::RewriteMode::Stratified)
            freezeSubstitutions();

        for (std::size_t round = 0;; ++round) {
            if (round >= state_.iterationBound)
                throw EngineError(
                    "iteration bound exceeded; this indicates an engine bug");
            if (config_.rewriteMode == EvalConfig::RewriteMode::Iterative)
                deriveSubstitutionsFromState();
            bool changed = propagateFlows();
            changed |= applyRules();
            state_.iterations = round + 1;
            if (config_.instrument) state_.history.push_back(state_.entityItems);
            if (!changed) break;
        }
        finalizeEffectiveFlows();
        return std::move(state_);
    }

private:
    // --- setup -----------------------------------------------------------
    void collectLeaves() {
        struct Walker {
            Evaluator& self;
            void walk(const Entity& e, SymbolSet inherited) {
                inherited.unionWith(e.classes);
                if (!e.complex) {
                    self.leaves_.push_back({e.name, inherited, &e});
                    return;
                }
                for (const auto& c : e.children) walk(c, inherited);
            }
        } walker{*this};
        for (const auto& e : diagram_.entities) walker.walk(e, {});
    }

    void collectFlows() { flows_ = diagram_.simpleFlows(); }

    void initializeState() {
        for (const auto& leaf : leaves_) {
            ItemSet& items = state_.entityItems[leaf.name];
            for (const auto& item : leaf.entity->items) {
                if (item.grade <= 0.0) continue; // grade 0 counts as absent
                if (mergeInto(items, item.key(), item.grade))
                    recordProvenance(leaf.name, item.key(),
                                     {Derivation::Kind::Declared, 0, {}, {}, {}});
            }
        }
        // Item-producing classification rules seed every leaf below a
        // classified entity (leaf resolution).
        for (std::size_t i = 0; i < diagram_.entityRules.size(); ++i) {
            const EntityRule& er = diagram_.entityRules[i];
            if (er.product != EntityRule::Product::Item) continue;
            const double grade = er.probability * er.item.grade;
            if (grade <= 0.0) continue;
            for (const auto& name :
                 matchingEntities(diagram_.entities, er.entityClass)) {
                const Entity* host = diagram_.findEntity(name);
                for (const Entity* leaf : leafEntities(*host)) {
                    if (mergeInto(state_.entityItems[leaf->name],
                                  er.item.key(), grade))
                        recordProvenance(
                            leaf->name, er.item.key(),
                            {Derivation::Kind::Seeded, i, {}, {}, {}});
                }
            }
        }
        bumpAllVersions();
    }

    std::size_t iterationBound() const {
        if (config_.maxIterations) return config_.maxIterations;
        std::set<std::string> names;
        for (const auto& leaf : leaves_)
            for (const auto& item : leaf.entity->items) names.insert(item.name);
        for (const Flow* f : flows_)
            for (const auto& fi : f->items)
                if (!fi.wildcard) names.insert(fi.name);
        for (const auto& rule : diagram_.rules)
            for (const auto& o : rule.outcomes)
                if (!o.fromVar) names.insert(o.nameOrVar);
        for (const auto& er : diagram_.entityRules)
            if (er.product == EntityRule::Product::Item)
                names.insert(er.item.name);
        const std::size_t classCount = diagram_.itemClasses.size();
        std::size_t universe = kBoundCap;
        if (classCount < 30) {
            universe = names.size() << classCount;
            universe = std::min(universe, kBoundCap);
        }
        std::size_t bound = universe * std::max<std::size_t>(leaves_.size(), 1);
        bound = std::min(bound, kBoundCap);
        return bound + 1;
    }

    // --- rewrite arrows ---------------------------------------------------
    /// Collects the rewrite substitutions of one leaf, using `available`
    /// to decide whether the replacement item is at hand.
    std::vector<Substitution> substitutionsFor(const LeafInfo& leaf,
                                               const ItemSet& available) {
        std::vector<Substitution> out;
        for (std::size_t i = 0; i < diagram_.rules.size(); ++i) {
            const Rule& rule = diagram_.rules[i];
            if (!rule.rewriteArrow) continue;
            if (!rule.scope.empty() &&
                !rule.scope.intersects(leaf.inheritedClasses))
                continue;
            const ItemOutcome& outcome = rule.outcomes.front();
            ItemKey replacement{outcome.nameOrVar, {}};
            for (const auto& term : outcome.classes)
                replacement.classes.insert(term.text);
            auto it = available.find(replacement);
            if (it == available.end() || it->second <= 0.0)
                continue; // substitute only when the replacement is held
            out.push_back({i, &rule.premises.front(), std::move(replacement)});
        }
        return out;
    }

    /// Stratified mode: run a flow-free closure per leaf, then fix the
    /// substitutions from the locally derivable items.
    void freezeSubstitutions() {
        for (const auto& leaf : leaves_) {
            ItemSet local = state_.entityItems[leaf.name];
            localClosure(leaf, local);
            substitutions_[leaf.name] = substitutionsFor(leaf, local);
        }
    }

    void deriveSubstitutionsFromState() {
        for (const auto& leaf : leaves_)
            substitutions_[leaf.name] =
                substitutionsFor(leaf, state_.entityItems[leaf.name]);
    }

    void localClosure(const LeafInfo& leaf, ItemSet& items) {
        std::map<AppliedBinding, double> ledger;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < diagram_.rules.size(); ++i) {
                const Rule& rule = diagram_.rules[i];
                if (rule.rewriteArrow) continue;
                if (!rule.scope.empty() &&
                    !rule.scope.intersects(leaf.inheritedClasses))
                    continue;
                changed |= applyRuleToSet(rule, i, leaf.name, items, ledger,
                                          nullptr);
            }
        }
    }

    /// Applies the first matching substitution to a flow entry key.
    const Substitution* substitutionForKey(const std::string& leafName,
                                           const ItemKey& key) const {
        auto it = substitutions_.find(leafName);
        if (it == substitutions_.end()) return nullptr;
        for (const auto& sub : it->second)
            if (sub.pattern->matches(key)) return &sub;
        return nullptr;
    }

    // --- flows -------------------------------------------------------------
    bool propagateFlows() {
        bool changed = false;
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            const Flow& flow = *flows_[i];
            const ItemSet& origin = state_.entityItems[flow.origin];
            ItemSet& target = state_.entityItems[flow.target];
            for (const auto& entry : flow.items) {
                if (entry.wildcard) {
                    // Snapshot: additions during this pass are picked up
                    // in the next round.
                    std::vector<std::pair<ItemKey, double>> snapshot(
                        origin.begin(), origin.end());
                    for (const auto& [key, grade] : snapshot) {
                        if (grade <= 0.0) continue;
                        ItemKey carried = key;
                        double originGrade = grade;
                        if (const Substitution* sub =
                                substitutionForKey(flow.origin, key)) {
                            carried = sub->replacement;
                            originGrade = gradeOf(origin, carried);
                            if (originGrade <= 0.0) continue;
                        }
                        changed |= deliver(flow, i, target, carried,
                                           std::min(originGrade, entry.grade));
                    }
                    continue;
                }
                ItemKey carried = entry.key();
                if (const Substitution* sub =
                        substitutionForKey(flow.origin, carried))
                    carried = sub->replacement;
                const double originGrade = gradeOf(origin, carried);
                if (originGrade <= 0.0) continue;
                changed |= deliver(flow, i, target, carried,
                                   std::min(originGrade, entry.grade));
            }
        }
        return changed;
    }

    double gradeOf(const ItemSet& items, const ItemKey& key) const {
        auto it = items.find(key);
        return it == items.end() ? 0.0 : it->second;
    }

    bool deliver(const Flow& flow, std::size_t flowIndex, ItemSet& target,
                 const ItemKey& key, double grade) {
        if (grade <= 0.0) return false;
        const bool changed = mergeInto(target, key, grade);
        // Alternative derivations matter for traces even when the item
        // was already present.
        recordProvenance(flow.target, key,
                         {Derivation::Kind::FlowHop, flowIndex, flow.origin,
                          key, {}});
        if (changed) bumpVersion(flow.target);
        return changed;
    }

    // --- rules --------------------------------------------------------------
    bool applyRules() {
        bool changed = false;
        for (auto& leaf : leaves_) {
            for (std::size_t i = 0; i < diagram_.rules.size(); ++i) {
                const Rule& rule = diagram_.rules[i];
                if (rule.rewriteArrow) continue;
                if (!rule.scope.empty() &&
                    !rule.scope.intersects(leaf.inheritedClasses))
                    continue;
                // Semi-naive visit: re-enumerate only when the leaf's
                // set changed since this rule last ran here.
                const std::uint64_t version = versions_[leaf.name];
                const auto key = std::make_pair(i, leaf.name);
                auto seen = lastVisited_.find(key);
                if (seen != lastVisited_.end() && seen->second == version)
                    continue;
                ItemSet& items = state_.entityItems[leaf.name];
                if (applyRuleToSet(rule, i, leaf.name, items,
                                   state_.appliedRules, &changed))
                    bumpVersion(leaf.name);
                lastVisited_[key] = version;
            }
        }
        return changed;
    }

    /// Enumerates premise bindings of `rule` over `items` and merges the
    /// outcomes in. The ledger skips bindings already applied at an
    /// equal or higher derived grade.
    bool applyRuleToSet(const Rule& rule, std::size_t ruleIndex,
                        const std::string& entityName, ItemSet& items,
                        std::map<AppliedBinding, double>& ledger,
                        bool* globalChanged) {
        std::vector<std::pair<ItemKey, double>> snapshot(items.begin(),
                                                         items.end());
        std::vector<std::vector<std::size_t>> candidates(rule.premises.size());
        for (std::size_t p = 0; p < rule.premises.size(); ++p) {
            for (std::size_t s = 0; s < snapshot.size(); ++s) {
                if (snapshot[s].second <= 0.0) continue;
                if (rule.premises[p].matches(snapshot[s].first))
                    candidates[p].push_back(s);
            }
            if (candidates[p].empty()) return false;
        }
        bool changed = false;
        std::vector<std::size_t> pick(rule.premises.size(), 0);
        while (true) {
            Binding binding;
            binding.items.reserve(rule.premises.size());
            double minGrade = 1.0;
            for (std::size_t p = 0; p < rule.premises.size(); ++p) {
                const auto& [key, grade] = snapshot[candidates[p][pick[p]]];
                binding.items.push_back(key);
                binding.grades.push_back(grade);
                minGrade = std::min(minGrade, grade);
                const ItemPattern& pattern = rule.premises[p];
                if (!pattern.var.empty()) binding.vars[pattern.var] = key;
                if (!pattern.captureVar.empty())
                    binding.captures[pattern.captureVar] =
                        key.classes.difference(pattern.required);
            }
            const double grade = rule.probability * minGrade;
            AppliedBinding fingerprint{ruleIndex, entityName, binding.items};
            auto ledgerIt = ledger.find(fingerprint);
            const bool skip =
                ledgerIt != ledger.end() && ledgerIt->second >= grade;
            if (!skip && grade > 0.0) {
                ledger[std::move(fingerprint)] = grade;
                for (const auto& outcome : rule.outcomes) {
                    ItemKey produced = instantiate(outcome, binding);
                    if (mergeInto(items, produced, grade)) {
                        changed = true;
                        if (globalChanged) *globalChanged = true;
                    }
                    if (globalChanged)
                        recordProvenance(entityName, produced,
                                         {Derivation::Kind::RuleApplied,
                                          ruleIndex, {}, {}, binding.items});
                }
            }
            // advance the cartesian product
            std::size_t p = 0;
            for (; p < pick.size(); ++p) {
                if (++pick[p] < candidates[p].size()) break;
                pick[p] = 0;
            }
            if (p == pick.size()) break;
        }
        return changed;
    }

    ItemKey instantiate(const ItemOutcome& outcome, const Binding& binding) {
        ItemKey out;
        if (outcome.fromVar)
            out.name = binding.vars.at(outcome.nameOrVar).name;
        else
            out.name = outcome.nameOrVar;
        for (const auto& term : outcome.classes) {
            if (term.isVar) {
                auto it = binding.captures.find(term.text);
                if (it != binding.captures.end())
                    out.classes.unionWith(it->second);
            } else {
                out.classes.insert(term.text);
            }
        }
        return out;
    }

    // --- bookkeeping ----------------------------------------------------
    void recordProvenance(const std::string& entity, const ItemKey& key,
                          Derivation derivation) {
        auto& list = state_.provenance[{entity, key}];
        for (const auto& existing : list)
            if (existing == derivation) return;
        list.push_back(std::move(derivation));
    }

    void bumpVersion(const std::string& entity) { ++versions_[entity]; }
    void bumpAllVersions() {
        for (const auto& leaf : leaves_) ++versions_[leaf.name];
    }

    void finalizeEffectiveFlows() {
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            const Flow& flow = *flows_[i];
            std::vector<FlowItem> effective;
            auto push = [&](const ItemKey& key, double grade) {
                for (const auto& existing : effective)
                    if (existing.name == key.name &&
                        existing.classes == key.classes) return;
                FlowItem fi;
                fi.name = key.name;
                fi.classes = key.classes;
                fi.grade = grade;
                effective.push_back(std::move(fi));
            };
            const ItemSet& origin = state_.entityItems[flow.origin];
            for (const auto& entry : flow.items) {
                if (entry.wildcard) {
                    for (const auto& [key, grade] : origin) {
                        ItemKey carried = key;
                        if (const Substitution* sub =
                                substitutionForKey(flow.origin, key))
                            carried = sub->replacement;
                        push(carried, std::min(gradeOf(origin, carried),
                                               entry.grade));
                    }
                    continue;
                }
                ItemKey carried = entry.key();
                if (const Substitution* sub =
                        substitutionForKey(flow.origin, carried))
                    carried = sub->replacement;
                push(carried, std::min(entry.grade, gradeOf(origin, carried)));
            }
            state_.effectiveFlows[flow.name] = std::move(effective);
        }
    }

    const Diagram& diagram_;
    const EvalConfig& config_;
    EvaluationState state_;
    std::vector<LeafInfo> leaves_;
    std::vector<const Flow*> flows_;
    std::map<std::string, std::vector<Substitution>> substitutions_;
    std::map<std::string, std::uint64_t> versions_;
    std::map<std::pair<std::size_t, std::string>, std::uint64_t> lastVisited_;
};

} // namespace

EvaluationState evaluate(const Diagram& diagram, const EvalConfig& config) {
    return Evaluator(diagram, config).run();
}

// ---------------------------------------------------------------------------
// Derivation traces
// ---------------------------------------------------------------------------

namespace {

using ProvKey = std::pair<std::string, ItemKey>;

struct TraceBuilder {
    const EvaluationState& state;
    std::map<ProvKey, std::size_t> costs;

    static constexpr std::size_t kInf =
        std::numeric_limits<std::size_t>::max() / 4;

    std::size_t costOf(const ProvKey& key) const {
        auto it = costs.find(key);
        return it == costs.end() ? kInf : it->second;
    }

    std::size_t derivationCost(const ProvKey& key,
                               const Derivation& derivation) const {
        switch (derivation.kind) {
        case Derivation::Kind::Declared:
        case Derivation::Kind::Seeded:
            return 1;
        case Derivation::Kind::FlowHop:
            return 1 + costOf({derivation.fromEntity, derivation.fromItem});
        case Derivation::Kind::RuleApplied: {
            std::size_t total = 1;
            for (const auto& premise : derivation.premises) {
                const std::size_t c = costOf({key.first, premise});
                if (c >= kInf) return kInf;
                total += c;
            }
            return total;
        }
        }
        return kInf;
    }

    void computeCosts() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [key, derivations] : state.provenance) {
                std::size_t best = costOf(key);
                for (const auto& d : derivations)
                    best = std::min(best, derivationCost(key, d));
                if (best < costOf(key)) {
                    costs[key] = best;
                    changed = true;
                }
            }
        }
    }

    /// Ranks derivations by (cost, kind, declaration index).
    const Derivation* best(const ProvKey& key) const {
        auto it = state.provenance.find(key);
        if (it == state.provenance.end()) return nullptr;
        const Derivation* winner = nullptr;
        std::size_t winnerCost = kInf;
        for (const auto& d : it->second) {
            const std::size_t c = derivationCost(key, d);
            if (c >= kInf) continue;
            if (!winner || c < winnerCost ||
                (c == winnerCost &&
                 std::tie(d.kind, d.index) <
                     std::tie(winner->kind, winner->index))) {
                winner = &d;
                winnerCost = c;
            }
        }
        return winner;
    }

    DerivationTree build(const ProvKey& key) const {
        DerivationTree node;
        node.entity = key.first;
        node.item = key.second;
        node.grade = state.gradeAt(key.first, key.second);
        const Derivation* d = best(key);
        if (!d) {
            node.kind = Derivation::Kind::Declared;
            return node;
        }
        node.kind = d->kind;
        node.index = d->index;
        switch (d->kind) {
        case Derivation::Kind::Declared:
        case Derivation::Kind::Seeded:
            break;
        case Derivation::Kind::FlowHop:
            node.children.push_back(build({d->fromEntity, d->fromItem}));
            break;
        case Derivation::Kind::RuleApplied:
            for (const auto& premise : d->premises)
                node.children.push_back(build({key.first, premise}));
            break;
        }
        return node;
    }
};

} // namespace

DerivationTree trace(const EvaluationState& state, const Diagram& diagram,
                     const std::string& entity, const ItemKey& item) {
    (void)diagram;
    if (!state.holds(entity, item))
        throw EngineError("item is not present at entity '" + entity + "'");
    TraceBuilder builder{state, {}};
    builder.computeCosts();
    return builder.build({entity, item});
}

std::string describeNode(const DerivationTree& node, const Diagram& diagram) {
    std::string item = node.item.name;
    std::string classes;
    for (const auto& c : node.item.classes) {
        if (!classes.empty()) classes += "+";
        classes += c;
    }
    if (!classes.empty()) item += ":" + classes;
    std::string out = item + " @ " + node.entity;
    switch (node.kind) {
    case Derivation::Kind::Declared:
        out += " (declared)";
        break;
    case Derivation::Kind::Seeded:
        out += " (classification rule #" + std::to_string(node.index + 1) + ")";
        break;
    case Derivation::Kind::FlowHop: {
        const auto flows = diagram.simpleFlows();
        const std::string flowName =
            node.index < flows.size() ? flows[node.index]->name : "?";
        out += " (flow " + flowName + ")";
        break;
    }
    case Derivation::Kind::RuleApplied:
        out += " (rule #" + std::to_string(node.index + 1) + ")";
        break;
    }
    return out;
}

} // namespace i2d
