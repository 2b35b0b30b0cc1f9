// Checking normative declarations against an evaluation state.
#pragma once

#include <string>
#include <vector>

#include "i2d/engine.hpp"
#include "i2d/model.hpp"

namespace i2d {

/// One piece of evidence for a verdict: a matching item found where it
/// must not be, or an item found missing where it is required.
struct Witness {
    std::string entity; // leaf (not-in) or target group (in)
    std::string itemText;
    ItemKey item;       // meaningful when present
    double grade = 0.0;
    bool present = false;
};

struct Verdict {
    std::size_t requirementIndex = 0;
    bool satisfied = true;
    double threshold = 0.0;
    std::vector<Witness> witnesses;
};

/// The simple entities a requirement's target denotes: a named entity
/// resolves to its leaves, an entity class to the leaves of every
/// carrier, and the wildcard to all leaves minus those of excepted
/// entities. Throws ModelError for unresolvable names.
std::vector<const Entity*> resolveTarget(const Requirement& requirement,
                                         const Diagram& diagram);

/// Evaluates every requirement against the fixpoint `state`. An item
/// counts as held when its grade exceeds `threshold`. A complex entity
/// holds an item when at least one of its leaves does; "not-in" forbids
/// the item at every leaf. Entity-class targets oblige every carrier,
/// and the wildcard target obliges every leaf.
std::vector<Verdict> check(const EvaluationState& state,
                           const Diagram& diagram, double threshold = 0.0);

/// Renders a requirement back to its surface syntax (for reports).
std::string describeRequirement(const Requirement& requirement);

} // namespace i2d
