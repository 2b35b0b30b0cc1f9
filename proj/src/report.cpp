#include "i2d/report.hpp"

#include <sstream>

#include <json.hpp>

namespace i2d {

namespace {

using nlohmann::json;

std::string viaText(const DerivationTree& node, const Diagram& diagram) {
    switch (node.kind) {
    case Derivation::Kind::Declared:
        return "declared";
    case Derivation::Kind::Seeded:
        return "classification rule #" + std::to_string(node.index + 1);
    case Derivation::Kind::FlowHop: {
        const auto flows = diagram.simpleFlows();
        return "flow " + (node.index < flows.size() ? flows[node.index]->name
                                                    : std::string("?"));
    }
    case Derivation::Kind::RuleApplied:
        return "rule #" + std::to_string(node.index + 1);
    }
    return "?";
}

json traceJson(const ReportTrace& trace) {
    json node;
    node["entity"] = trace.entity;
    node["item"] = trace.item;
    node["via"] = trace.via;
    node["grade"] = trace.grade;
    json children = json::array();
    for (const auto& child : trace.children)
        children.push_back(traceJson(child));
    node["children"] = std::move(children);
    return node;
}

void traceText(std::ostringstream& os, const ReportTrace& trace,
               const std::string& indent) {
    os << indent << trace.item << " @ " << trace.entity;
    if (trace.grade != 1.0) os << " (grade " << formatGrade(trace.grade) << ")";
    os << " <- " << trace.via << "\n";
    for (const auto& child : trace.children)
        traceText(os, child, indent + "  ");
}

} // namespace

std::string itemKeyText(const ItemKey& key) {
    std::string out = key.name;
    std::string classes;
    for (const auto& c : key.classes) {
        if (!classes.empty()) classes += "+";
        classes += c;
    }
    if (!classes.empty()) out += ":" + classes;
    return out;
}

ReportTrace toReportTrace(const DerivationTree& tree, const Diagram& diagram) {
    ReportTrace out;
    out.entity = tree.entity;
    out.item = itemKeyText(tree.item);
    out.via = viaText(tree, diagram);
    out.grade = tree.grade;
    for (const auto& child : tree.children)
        out.children.push_back(toReportTrace(child, diagram));
    return out;
}

std::string renderText(const RunReport& report) {
    std::ostringstream os;
    for (const auto& diagnostic : report.diagnostics)
        os << diagnostic.render() << "\n";
    if (!report.evaluated) return os.str();
    os << report.path << ": fixpoint after " << report.iterations
       << (report.iterations == 1 ? " iteration" : " iterations") << "\n";
    for (const auto& [entity, items] : report.entityItems) {
        os << entity << ":";
        if (items.empty()) os << " (no items)";
        os << "\n";
        for (const auto& [key, grade] : items) {
            os << "  " << itemKeyText(key);
            if (grade != 1.0) os << " @" << formatGrade(grade);
            os << "\n";
        }
    }
    for (const auto& verdict : report.verdicts) {
        os << (verdict.satisfied ? "satisfied: " : "VIOLATED:  ")
           << verdict.requirement;
        if (verdict.threshold != 0.0)
            os << " (threshold " << formatGrade(verdict.threshold) << ")";
        os << "\n";
        for (const auto& witness : verdict.witnesses) {
            if (witness.present) {
                os << "  witness: " << witness.item << " @ " << witness.entity
                   << " (grade " << formatGrade(witness.grade) << ")\n";
                if (witness.trace) traceText(os, *witness.trace, "    ");
            } else {
                os << "  missing: " << witness.item << " @ " << witness.entity
                   << "\n";
            }
        }
    }
    for (const auto& trace : report.traces) traceText(os, trace, "");
    return os.str();
}

std::string renderJsonLines(const RunReport& report) {
    std::ostringstream os;
    auto emit = [&](json record) { os << record.dump() << "\n"; };
    for (const auto& diagnostic : report.diagnostics) {
        json record;
        record["kind"] = "diagnostic";
        record["path"] = diagnostic.path.empty() ? report.path : diagnostic.path;
        record["line"] = diagnostic.loc.line;
        record["column"] = diagnostic.loc.column;
        record["message"] = diagnostic.message;
        emit(std::move(record));
    }
    if (!report.evaluated) return os.str();
    {
        json record;
        record["kind"] = "summary";
        record["path"] = report.path;
        record["iterations"] = report.iterations;
        record["entities"] = report.entityItems.size();
        std::size_t items = 0;
        for (const auto& [entity, entityItems] : report.entityItems)
            items += entityItems.size();
        record["items"] = items;
        emit(std::move(record));
    }
    for (const auto& [entity, items] : report.entityItems) {
        json record;
        record["kind"] = "entity-items";
        record["entity"] = entity;
        json list = json::array();
        for (const auto& [key, grade] : items) {
            json item;
            item["name"] = key.name;
            item["classes"] = key.classes.values();
            item["grade"] = grade;
            list.push_back(std::move(item));
        }
        record["items"] = std::move(list);
        emit(std::move(record));
    }
    for (const auto& verdict : report.verdicts) {
        json record;
        record["kind"] = "verdict";
        record["requirement"] = verdict.requirement;
        record["status"] = verdict.satisfied ? "satisfied" : "violated";
        record["threshold"] = verdict.threshold;
        json witnesses = json::array();
        for (const auto& witness : verdict.witnesses) {
            json w;
            w["entity"] = witness.entity;
            w["item"] = witness.item;
            w["grade"] = witness.grade;
            w["present"] = witness.present;
            if (witness.trace) w["trace"] = traceJson(*witness.trace);
            witnesses.push_back(std::move(w));
        }
        record["witnesses"] = std::move(witnesses);
        emit(std::move(record));
    }
    for (const auto& trace : report.traces) {
        json record;
        record["kind"] = "trace";
        record["entity"] = trace.entity;
        record["item"] = trace.item;
        record["tree"] = traceJson(trace);
        emit(std::move(record));
    }
    return os.str();
}

} // namespace i2d
