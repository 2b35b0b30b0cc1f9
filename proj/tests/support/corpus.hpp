// Deterministic random diagram generator for property suites.
#pragma once

#include <cstdint>
#include <map>

#include "i2d/model.hpp"

namespace i2d::testing {

struct CorpusOptions {
    bool rewriteArrows = false;   // excluded from oracle comparisons
    bool itemEntityRules = true;
    bool requirements = true;
    std::size_t maxEntities = 6;
    std::size_t maxItems = 10;
    std::size_t maxRules = 8;
    std::size_t maxFlows = 8;
};

/// Valid-by-construction random diagram; identical for equal seeds.
Diagram randomDiagram(std::uint32_t seed, const CorpusOptions& options = {});

/// Replaces declared item sets with `state` and strips everything that
/// produced it (rules, flows, seeds); requirements are kept. The
/// result evaluates to exactly `state`.
Diagram materialize(const Diagram& diagram,
                    const std::map<std::string, ItemSet>& state);

} // namespace i2d::testing
