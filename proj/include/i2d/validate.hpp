// Structural validation of diagrams. Violations are report entries,
// not faults; an empty report means the diagram is well formed.
#pragma once

#include <string>
#include <vector>

#include "i2d/model.hpp"

namespace i2d {

struct ValidationIssue {
    std::string where;   // element path, e.g. "flow content/content_1"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
};

ValidationReport validate(const Diagram& diagram);

} // namespace i2d
