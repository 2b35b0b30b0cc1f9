// Run reports: one structure rendered both as human-readable text and
// as line-delimited JSON records carrying identical facts.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "i2d/dsl.hpp"
#include "i2d/engine.hpp"
#include "i2d/model.hpp"
#include "i2d/norms.hpp"

namespace i2d {

struct ReportTrace {
    std::string entity;
    std::string item;
    std::string via; // "declared", "flow NAME", "rule #K", ...
    double grade = 1.0;
    std::vector<ReportTrace> children;
};

ReportTrace toReportTrace(const DerivationTree& tree, const Diagram& diagram);

struct ReportWitness {
    std::string entity;
    std::string item;
    double grade = 0.0;
    bool present = false;
    std::optional<ReportTrace> trace;
};

struct ReportVerdict {
    std::string requirement;
    bool satisfied = true;
    double threshold = 0.0;
    std::vector<ReportWitness> witnesses;
};

struct RunReport {
    std::string path;
    std::vector<Diagnostic> diagnostics;
    bool evaluated = false;
    std::size_t iterations = 0;
    /// (entity, items) sorted by entity name; items sorted by identity.
    std::vector<std::pair<std::string, std::vector<std::pair<ItemKey, double>>>>
        entityItems;
    std::vector<ReportVerdict> verdicts;
    std::vector<ReportTrace> traces; // explicitly requested traces
};

std::string renderText(const RunReport& report);
std::string renderJsonLines(const RunReport& report);

std::string itemKeyText(const ItemKey& key);

} // namespace i2d
