#include "i2d/interop.hpp"

#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "i2d/dsl.hpp"

namespace i2d {

namespace {

using nlohmann::json;

std::string requireString(const json& object, const char* field,
                          const char* where) {
    if (!object.contains(field) || !object[field].is_string())
        throw InteropError(std::string(where) + " needs a string '" + field +
                           "' field");
    return object[field].get<std::string>();
}

std::string optionalString(const json& object, const char* field) {
    if (object.contains(field) && object[field].is_string())
        return object[field].get<std::string>();
    return "";
}

/// Labels may contain anything; entity and item names may not.
std::string sanitizeName(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
            out += c;
        else if (c == ' ' || c == '-' || c == '.')
            out += '_';
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])))
        out = "n_" + out;
    return out;
}

} // namespace

DfdDocument parseDfdDocument(const std::string& jsonText) {
    json root;
    try {
        root = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw InteropError(std::string("malformed DFD JSON: ") + e.what());
    }
    if (!root.is_object())
        throw InteropError("DFD document must be a JSON object");

    DfdDocument doc;
    std::set<std::string> ids;
    auto claimId = [&](const std::string& id, const char* what) {
        if (id.empty())
            throw InteropError(std::string(what) + " id must be non-empty");
        if (!ids.insert(id).second)
            throw InteropError("duplicate id '" + id + "'");
    };

    for (const auto& node : root.value("nodes", json::array())) {
        DfdNode n;
        n.id = requireString(node, "id", "node");
        claimId(n.id, "node");
        n.kind = requireString(node, "kind", "node");
        if (n.kind != "process" && n.kind != "datastore" &&
            n.kind != "external-entity")
            throw InteropError("node '" + n.id + "' has unknown kind '" +
                               n.kind + "'");
        n.label = optionalString(node, "label");
        doc.nodes.push_back(std::move(n));
    }
    std::set<std::string> nodeIds;
    for (const auto& n : doc.nodes) nodeIds.insert(n.id);

    for (const auto& boundary : root.value("boundaries", json::array())) {
        DfdBoundary b;
        b.id = requireString(boundary, "id", "boundary");
        claimId(b.id, "boundary");
        b.label = optionalString(boundary, "label");
        if (!boundary.contains("members") || !boundary["members"].is_array())
            throw InteropError("boundary '" + b.id +
                               "' needs a 'members' array");
        for (const auto& member : boundary["members"]) {
            if (!member.is_string())
                throw InteropError("boundary '" + b.id +
                                   "' members must be node ids");
            const std::string id = member.get<std::string>();
            if (!nodeIds.count(id))
                throw InteropError("boundary '" + b.id +
                                   "' references unknown node '" + id + "'");
            b.members.push_back(id);
        }
        doc.boundaries.push_back(std::move(b));
    }

    for (const auto& edge : root.value("edges", json::array())) {
        DfdEdge e;
        e.id = requireString(edge, "id", "edge");
        claimId(e.id, "edge");
        e.source = requireString(edge, "source", "edge");
        e.target = requireString(edge, "target", "edge");
        for (const std::string* endpoint : {&e.source, &e.target})
            if (!nodeIds.count(*endpoint))
                throw InteropError("edge '" + e.id +
                                   "' references unknown node '" + *endpoint +
                                   "'");
        e.label = optionalString(edge, "label");
        doc.edges.push_back(std::move(e));
    }
    return doc;
}

Diagram importDfd(const DfdDocument& document) {
    Diagram diagram;
    diagram.entityClasses = {"dfd_process", "dfd_datastore", "dfd_external",
                             "dfd_trust_boundary"};
    diagram.itemClasses = {"dfd_data"};

    std::map<std::string, std::string> entityName; // node id -> entity name
    std::set<std::string> usedNames;
    auto uniqueName = [&](const std::string& preferred) {
        std::string name = sanitizeName(preferred);
        std::string candidate = name;
        int suffix = 1;
        while (!usedNames.insert(candidate).second)
            candidate = name + "_" + std::to_string(++suffix);
        return candidate;
    };

    std::map<std::string, Entity> nodeEntities;
    for (const auto& node : document.nodes) {
        Entity e;
        e.name = uniqueName(node.label.empty() ? node.id : node.label);
        if (node.kind == "process")
            e.classes.insert("dfd_process");
        else if (node.kind == "datastore")
            e.classes.insert("dfd_datastore");
        else
            e.classes.insert("dfd_external");
        entityName[node.id] = e.name;
        nodeEntities.emplace(node.id, std::move(e));
    }

    std::set<std::string> boundMembers;
    for (const auto& boundary : document.boundaries) {
        Entity complex;
        complex.name = uniqueName(boundary.label.empty() ? boundary.id
                                                         : boundary.label);
        complex.complex = true;
        complex.classes.insert("dfd_trust_boundary");
        for (const auto& member : boundary.members) {
            auto it = nodeEntities.find(member);
            if (it == nodeEntities.end())
                throw InteropError("node '" + member +
                                   "' belongs to two boundaries");
            complex.children.push_back(std::move(it->second));
            nodeEntities.erase(it);
            boundMembers.insert(member);
        }
        if (complex.children.empty())
            throw InteropError("boundary '" + boundary.id + "' is empty");
        diagram.entities.push_back(std::move(complex));
    }
    for (const auto& node : document.nodes) {
        auto it = nodeEntities.find(node.id);
        if (it != nodeEntities.end())
            diagram.entities.push_back(std::move(it->second));
    }

    std::set<std::string> flowNames;
    for (const auto& edge : document.edges) {
        Flow flow;
        flow.name = sanitizeName(edge.id);
        while (!flowNames.insert(flow.name).second) flow.name += "_";
        flow.origin = entityName.at(edge.source);
        flow.target = entityName.at(edge.target);
        FlowItem item;
        item.name = edge.label.empty() ? "data_" + sanitizeName(edge.id)
                                       : sanitizeName(edge.label);
        item.classes.insert("dfd_data");
        flow.items.push_back(std::move(item));
        diagram.flows.push_back(std::move(flow));
    }
    return diagram;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

namespace {

std::string dotQuote(const std::string& raw) {
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += "\"";
    return out;
}

std::string itemLabel(const ItemKey& key, double grade) {
    std::string out = key.name;
    std::string classes;
    for (const auto& c : key.classes) {
        if (!classes.empty()) classes += "+";
        classes += c;
    }
    if (!classes.empty()) out += ":" + classes;
    if (grade != 1.0) out += "@" + formatGrade(grade);
    return out;
}

class DotWriter {
public:
    DotWriter(const Diagram& diagram, const EvaluationState* state,
              const std::vector<Verdict>* verdicts)
        : diagram_(diagram), state_(state) {
        if (verdicts) {
            for (const auto& verdict : *verdicts) {
                if (verdict.satisfied) continue;
                for (const auto& witness : verdict.witnesses)
                    flagged_.insert(witness.entity);
            }
        }
    }

    std::string render() {
        os_ << "digraph i2d {\n";
        if (!diagram_.entities.empty() || !diagram_.flows.empty()) {
            os_ << "  rankdir=LR;\n";
            os_ << "  node [shape=box, fontname=\"Helvetica\"];\n";
        }
        for (const auto& entity : diagram_.entities) writeEntity(entity, "  ");
        for (const auto& flow : diagram_.flows) writeFlow(flow, false);
        os_ << "}\n";
        return os_.str();
    }

private:
    void writeEntity(const Entity& entity, const std::string& indent) {
        if (entity.complex) {
            os_ << indent << "subgraph " << clusterId(entity.name) << " {\n";
            os_ << indent << "  label=" << dotQuote(entity.name) << ";\n";
            for (const auto& child : entity.children)
                writeEntity(child, indent + "  ");
            os_ << indent << "}\n";
            return;
        }
        os_ << indent << dotQuote(entity.name)
            << " [label=" << dotQuote(nodeLabel(entity));
        if (flagged_.count(entity.name))
            os_ << ", style=filled, fillcolor=\"#f4cccc\"";
        os_ << "];\n";
    }

    std::string nodeLabel(const Entity& entity) {
        std::string label = entity.name;
        if (state_) {
            for (const auto& [key, grade] : state_->itemsAt(entity.name))
                label += "\\n" + itemLabel(key, grade);
        } else {
            for (const auto& item : entity.items)
                label += "\\n" + itemLabel(item.key(), item.grade);
        }
        return label;
    }

    void writeFlow(const Flow& flow, bool nested) {
        if (flow.complex) {
            for (const auto& sub : flow.subflows) writeFlow(sub, true);
            return;
        }
        std::string label = flow.name;
        std::string items;
        for (const auto& entry : flow.items) {
            if (!items.empty()) items += ", ";
            items += entry.wildcard ? "*" : itemLabel(entry.key(), entry.grade);
        }
        if (!items.empty()) label += ": " + items;
        os_ << "  " << dotQuote(flow.origin) << " -> " << dotQuote(flow.target)
            << " [label=" << dotQuote(label);
        if (nested) os_ << ", style=dashed";
        os_ << "];\n";
    }

    std::string clusterId(const std::string& name) {
        return "cluster_" + std::to_string(clusterIndex_[name] =
                                               nextCluster_++);
    }

    const Diagram& diagram_;
    const EvaluationState* state_;
    std::set<std::string> flagged_;
    std::map<std::string, int> clusterIndex_;
    int nextCluster_ = 0;
    std::ostringstream os_;
};

} // namespace

std::string exportDot(const Diagram& diagram, const EvaluationState* state,
                      const std::vector<Verdict>* verdicts) {
    return DotWriter(diagram, state, verdicts).render();
}

} // namespace i2d
