// Fixpoint evaluation: propagates items along flows, applies every
// rule family to stability, and records a derivation for each added
// item. Entity item sets only grow and grades only rise, so the least
// fixpoint exists and is reached in finitely many rounds.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "i2d/model.hpp"

namespace i2d {

class EngineError : public ModelError {
public:
    using ModelError::ModelError;
};

class ExpansionError : public ModelError {
public:
    using ModelError::ModelError;
};

struct EvalConfig {
    enum class RewriteMode {
        /// Substitutions are fixed from a flow-free local closure per
        /// entity before the global fixpoint runs (default).
        Stratified,
        /// Substitutions are re-derived from the current state every
        /// round; order sensitive, kept for experimentation.
        Iterative,
    };

    RewriteMode rewriteMode = RewriteMode::Stratified;
    /// Safety bound on evaluation rounds; 0 derives the analytic bound
    /// |item names| * 2^|item classes| * |leaves| + 1 from the diagram.
    std::size_t maxIterations = 0;
    /// Snapshot entity item sets after every round (for tests).
    bool instrument = false;
};

/// One way an item became available at an entity.
struct Derivation {
    enum class Kind { Declared, Seeded, FlowHop, RuleApplied };

    Kind kind = Kind::Declared;
    std::size_t index = 0;         // flow / rule / erule index
    std::string fromEntity;        // FlowHop: the origin
    ItemKey fromItem;              // FlowHop: the item at the origin
    std::vector<ItemKey> premises; // RuleApplied: bound premises

    auto operator<=>(const Derivation&) const = default;
};

/// Ledger entry marking one rule application on one premise binding.
struct AppliedBinding {
    std::size_t ruleIndex = 0;
    std::string entity;
    std::vector<ItemKey> premises;

    auto operator<=>(const AppliedBinding&) const = default;
};

struct EvaluationState {
    /// Final item set per simple entity.
    std::map<std::string, ItemSet> entityItems;
    /// Effective item set per simple flow after rewrite-arrow
    /// substitution; wildcards are expanded against the final state.
    std::map<std::string, std::vector<FlowItem>> effectiveFlows;
    /// Applied (rule, binding) fingerprints with the derived grade.
    std::map<AppliedBinding, double> appliedRules;
    /// Every way each item was derived.
    std::map<std::pair<std::string, ItemKey>, std::vector<Derivation>>
        provenance;
    std::size_t iterations = 0;
    std::size_t iterationBound = 0;
    /// Per-round snapshots when EvalConfig::instrument is set; the
    /// first entry is the initial state.
    std::vector<std::map<std::string, ItemSet>> history;

    const ItemSet& itemsAt(const std::string& entity) const;
    bool holds(const std::string& entity, const ItemKey& item) const;
    double gradeAt(const std::string& entity, const ItemKey& item) const;
};

/// Applies every entity-classification rule that adds child entities
/// or flows, cascading until stable. Item-producing rules are left to
/// evaluation, where they seed the leaves of classified entities.
/// Application is idempotent. Throws ExpansionError on name collisions
/// and unplaceable flows.
Diagram expandStructuralRules(const Diagram& diagram);

/// Computes the least fixpoint. Expects a valid diagram whose
/// structural rules have been expanded.
EvaluationState evaluate(const Diagram& diagram, const EvalConfig& config = {});

/// A minimal derivation of `item` at `entity`: fewest nodes, ties
/// broken by declaration order. Throws EngineError when the item is
/// not present.
struct DerivationTree {
    std::string entity;
    ItemKey item;
    double grade = 1.0;
    Derivation::Kind kind = Derivation::Kind::Declared;
    std::size_t index = 0; // flow / rule / erule index
    std::vector<DerivationTree> children;
};

DerivationTree trace(const EvaluationState& state, const Diagram& diagram,
                     const std::string& entity, const ItemKey& item);

/// Human-readable one-line label for a tree node, e.g.
/// "c:sec @ ISP (rule #7)".
std::string describeNode(const DerivationTree& node, const Diagram& diagram);

} // namespace i2d
