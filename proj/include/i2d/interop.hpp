// Interoperability: a minimal structural DFD import and DOT export.
//
// DFD documents are JSON:
//   { "version": 1,
//     "nodes": [ {"id": "...", "kind": "process|datastore|external-entity",
//                 "label": "..."} ],
//     "boundaries": [ {"id": "...", "label": "...", "members": ["id", ...]} ],
//     "edges": [ {"id": "...", "source": "...", "target": "...",
//                 "label": "..."} ] }
//
// Nodes become simple entities classed dfd_process / dfd_datastore /
// dfd_external, trust boundaries become complex entities classed
// dfd_trust_boundary, and each edge becomes a flow carrying one
// abstract item (classed dfd_data) named after the edge label. No
// rules or requirements are generated.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "i2d/engine.hpp"
#include "i2d/model.hpp"
#include "i2d/norms.hpp"

namespace i2d {

class InteropError : public ModelError {
public:
    using ModelError::ModelError;
};

struct DfdNode {
    std::string id;
    std::string kind; // process | datastore | external-entity
    std::string label;
};

struct DfdBoundary {
    std::string id;
    std::string label;
    std::vector<std::string> members;
};

struct DfdEdge {
    std::string id;
    std::string source;
    std::string target;
    std::string label;
};

struct DfdDocument {
    std::vector<DfdNode> nodes;
    std::vector<DfdBoundary> boundaries;
    std::vector<DfdEdge> edges;
};

/// Parses and validates the JSON form. Throws InteropError on malformed
/// documents, duplicate ids, or dangling references.
DfdDocument parseDfdDocument(const std::string& jsonText);

/// Structural translation as described above. Entity names come from
/// labels (falling back to ids); unlabeled edges carry data_<edgeid>.
Diagram importDfd(const DfdDocument& document);

/// DOT rendering: clusters for complex entities, edges for flows
/// (dashed inside complex flows). With a state, items carry their
/// grades and entities witnessing violations are highlighted.
std::string exportDot(const Diagram& diagram,
                      const EvaluationState* state = nullptr,
                      const std::vector<Verdict>* verdicts = nullptr);

} // namespace i2d
