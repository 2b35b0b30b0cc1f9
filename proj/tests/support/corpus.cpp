#include "support/corpus.hpp"

#include <random>

namespace i2d::testing {

namespace {

const double kGradePool[] = {1.0, 0.9, 0.75, 0.5, 0.25};

class Generator {
public:
    Generator(std::uint32_t seed, const CorpusOptions& options)
        : rng_(seed), options_(options) {}

    Diagram run() {
        buildEntities();
        buildFlows();
        buildRules();
        if (options_.itemEntityRules) buildItemEntityRules();
        diagram_.refreshRegistries();
        if (options_.requirements) buildRequirements();
        return std::move(diagram_);
    }

private:
    std::size_t roll(std::size_t n) { return n == 0 ? 0 : rng_() % n; }
    bool chance(std::size_t percent) { return roll(100) < percent; }
    std::string itemName() { return "i" + std::to_string(roll(10)); }
    std::string itemClass() { return "c" + std::to_string(roll(5)); }
    std::string entityClass() { return "e" + std::to_string(roll(3)); }
    double grade() { return kGradePool[roll(5)]; }

    SymbolSet someItemClasses(std::size_t maxCount) {
        SymbolSet out;
        const std::size_t n = roll(maxCount + 1);
        for (std::size_t i = 0; i < n; ++i) out.insert(itemClass());
        return out;
    }

    SymbolSet someEntityClasses() {
        SymbolSet out;
        if (chance(40)) out.insert(entityClass());
        if (chance(10)) out.insert(entityClass());
        return out;
    }

    Item someItem() {
        Item item;
        item.name = itemName();
        item.classes = someItemClasses(2);
        item.grade = grade();
        return item;
    }

    void buildEntities() {
        const std::size_t leafCount = 1 + roll(options_.maxEntities);
        std::vector<Entity> pool;
        std::size_t itemBudget = options_.maxItems;
        for (std::size_t i = 0; i < leafCount; ++i) {
            Entity leaf;
            leaf.name = "E" + std::to_string(i + 1);
            leaf.classes = someEntityClasses();
            const std::size_t declared = roll(3);
            for (std::size_t k = 0; k < declared && itemBudget > 0; ++k) {
                Item item = someItem();
                bool duplicate = false;
                for (const auto& existing : leaf.items)
                    if (existing.key() == item.key()) duplicate = true;
                if (duplicate) continue;
                leaf.items.push_back(std::move(item));
                --itemBudget;
            }
            leafNames_.push_back(leaf.name);
            pool.push_back(std::move(leaf));
        }
        // Group a random suffix of the leaves under complex parents,
        // occasionally two levels deep.
        while (pool.size() >= 2 && chance(55)) {
            const std::size_t take = 2 + roll(pool.size() - 1);
            Entity parent;
            parent.name = "G" + std::to_string(++groups_);
            parent.complex = true;
            parent.classes = someEntityClasses();
            for (std::size_t i = 0; i < take && !pool.empty(); ++i) {
                parent.children.push_back(std::move(pool.back()));
                pool.pop_back();
            }
            complexNames_.push_back(parent.name);
            pool.push_back(std::move(parent));
        }
        diagram_.entities = std::move(pool);
    }

    void buildFlows() {
        if (leafNames_.size() < 2) return;
        const std::size_t flowCount = roll(options_.maxFlows + 1);
        for (std::size_t i = 0; i < flowCount; ++i) {
            Flow flow;
            flow.name = "f" + std::to_string(i + 1);
            flow.origin = leafNames_[roll(leafNames_.size())];
            do {
                flow.target = leafNames_[roll(leafNames_.size())];
            } while (flow.target == flow.origin);
            if (chance(15)) {
                FlowItem wildcard;
                wildcard.wildcard = true;
                if (chance(30)) wildcard.grade = grade();
                flow.items.push_back(std::move(wildcard));
            } else {
                const std::size_t entries = 1 + roll(3);
                for (std::size_t k = 0; k < entries; ++k) {
                    FlowItem entry;
                    entry.name = itemName();
                    entry.classes = someItemClasses(2);
                    if (chance(25)) entry.grade = grade();
                    bool duplicate = false;
                    for (const auto& existing : flow.items)
                        if (!existing.wildcard &&
                            existing.key() == entry.key())
                            duplicate = true;
                    if (!duplicate) flow.items.push_back(std::move(entry));
                }
            }
            diagram_.flows.push_back(std::move(flow));
        }
    }

    ItemOutcome concreteOutcome() {
        ItemOutcome outcome;
        outcome.nameOrVar = itemName();
        for (const auto& c : someItemClasses(2))
            outcome.classes.push_back({false, c});
        return outcome;
    }

    void buildRules() {
        const std::size_t ruleCount = roll(options_.maxRules + 1);
        for (std::size_t i = 0; i < ruleCount; ++i) {
            Rule rule;
            if (chance(25)) rule.scope.insert(entityClass());
            if (chance(30)) rule.probability = grade();
            if (options_.rewriteArrows && chance(25)) {
                rule.rewriteArrow = true;
                rule.probability = 1.0;
                ItemPattern premise;
                if (chance(50)) {
                    premise.itemName = itemName();
                    premise.required = someItemClasses(1);
                } else {
                    premise.var = "x";
                    premise.required.insert(itemClass());
                    if (chance(30)) premise.open = true;
                }
                rule.premises.push_back(std::move(premise));
                rule.outcomes.push_back(concreteOutcome());
                diagram_.rules.push_back(std::move(rule));
                continue;
            }
            if (chance(50)) {
                // concrete premises
                const std::size_t premises = 1 + roll(2);
                for (std::size_t p = 0; p < premises; ++p) {
                    ItemPattern premise;
                    premise.itemName = itemName();
                    premise.required = someItemClasses(1);
                    rule.premises.push_back(std::move(premise));
                }
                const std::size_t outcomes = 1 + roll(2);
                for (std::size_t o = 0; o < outcomes; ++o)
                    rule.outcomes.push_back(concreteOutcome());
            } else {
                // class atoms over variables
                const char* vars[] = {"x", "y"};
                const char* captures[] = {"v", "w"};
                const std::size_t premises = 1 + roll(2);
                std::vector<std::string> captured;
                for (std::size_t p = 0; p < premises; ++p) {
                    ItemPattern premise;
                    premise.var = vars[p];
                    premise.required.insert(itemClass());
                    if (chance(20)) premise.forbidden.insert(itemClass());
                    if (chance(40)) {
                        premise.open = true;
                        if (chance(50)) {
                            premise.captureVar = captures[p];
                            captured.push_back(captures[p]);
                        }
                    }
                    rule.premises.push_back(std::move(premise));
                }
                const std::size_t outcomes = 1 + roll(2);
                for (std::size_t o = 0; o < outcomes; ++o) {
                    ItemOutcome outcome;
                    if (chance(50)) {
                        outcome.fromVar = true;
                        outcome.nameOrVar =
                            rule.premises[roll(rule.premises.size())].var;
                        for (const auto& c : someItemClasses(2))
                            outcome.classes.push_back({false, c});
                    } else {
                        outcome = concreteOutcome();
                    }
                    if (!captured.empty() && chance(40))
                        outcome.classes.push_back(
                            {true, captured[roll(captured.size())]});
                    std::sort(outcome.classes.begin(), outcome.classes.end(),
                              [](const ClassTerm& a, const ClassTerm& b) {
                                  return std::tie(a.isVar, a.text) <
                                         std::tie(b.isVar, b.text);
                              });
                    outcome.classes.erase(std::unique(outcome.classes.begin(),
                                                      outcome.classes.end()),
                                          outcome.classes.end());
                    rule.outcomes.push_back(std::move(outcome));
                }
            }
            diagram_.rules.push_back(std::move(rule));
        }
    }

    void buildItemEntityRules() {
        const std::size_t count = roll(3);
        for (std::size_t i = 0; i < count; ++i) {
            EntityRule er;
            er.entityClass = entityClass();
            er.product = EntityRule::Product::Item;
            er.item = someItem();
            if (chance(30)) er.probability = grade();
            diagram_.entityRules.push_back(std::move(er));
        }
    }

    void buildRequirements() {
        const std::size_t count = roll(3);
        for (std::size_t i = 0; i < count; ++i) {
            Requirement req;
            if (chance(50)) {
                ItemPattern ref;
                ref.itemName = itemName();
                ref.required = someItemClasses(1);
                // requirement vocabulary must be declared explicitly
                diagram_.itemClasses.unionWith(ref.required);
                req.items.push_back(std::move(ref));
            } else {
                ItemPattern atom;
                atom.var = "x";
                atom.open = true;
                const std::string cls = itemClass();
                atom.required.insert(cls);
                diagram_.itemClasses.insert(cls);
                req.items.push_back(std::move(atom));
            }
            req.membership = chance(40);
            const std::size_t mode = roll(3);
            if (mode == 0 && !complexNames_.empty()) {
                req.targetKind = Requirement::TargetKind::Entity;
                req.target = complexNames_[roll(complexNames_.size())];
            } else if (mode == 1) {
                req.targetKind = Requirement::TargetKind::EntityClass;
                req.target = entityClass();
                diagram_.entityClasses.insert(req.target);
            } else if (mode == 2 && chance(50)) {
                req.targetKind = Requirement::TargetKind::Wildcard;
                if (chance(50) && !leafNames_.empty())
                    req.exceptions.push_back(
                        leafNames_[roll(leafNames_.size())]);
            } else {
                req.targetKind = Requirement::TargetKind::Entity;
                req.target = leafNames_[roll(leafNames_.size())];
            }
            diagram_.requirements.push_back(std::move(req));
        }
    }

    std::mt19937 rng_;
    CorpusOptions options_;
    Diagram diagram_;
    std::vector<std::string> leafNames_;
    std::vector<std::string> complexNames_;
    std::size_t groups_ = 0;
};

} // namespace

Diagram randomDiagram(std::uint32_t seed, const CorpusOptions& options) {
    return Generator(seed, options).run();
}

Diagram materialize(const Diagram& diagram,
                    const std::map<std::string, ItemSet>& state) {
    Diagram out = diagram;
    out.rules.clear();
    out.entityRules.clear();
    out.flows.clear();
    struct Rewriter {
        const std::map<std::string, ItemSet>& state;
        void apply(Entity& e) {
            if (!e.complex) {
                e.items.clear();
                auto it = state.find(e.name);
                if (it != state.end())
                    for (const auto& [key, grade] : it->second)
                        e.items.push_back({key.name, key.classes, grade});
                return;
            }
            for (auto& child : e.children) apply(child);
        }
    } rewriter{state};
    for (auto& e : out.entities) rewriter.apply(e);
    out.refreshRegistries();
    return out;
}

} // namespace i2d::testing
