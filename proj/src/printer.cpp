// Canonical text rendering; parse(print(d)) is structurally equal to d.
#include <charconv>
#include <sstream>

#include "i2d/dsl.hpp"

namespace i2d {

namespace {

std::string joinClasses(const SymbolSet& classes) {
    std::string out;
    for (const auto& c : classes) {
        if (!out.empty()) out += "+";
        out += c;
    }
    return out;
}

void printItem(std::ostream& os, const Item& item, const std::string& indent) {
    os << indent << "item " << item.name;
    if (!item.classes.empty()) os << " : " << joinClasses(item.classes);
    if (item.grade != 1.0) os << " @" << formatGrade(item.grade);
    os << ";\n";
}

void printEntity(std::ostream& os, const Entity& entity,
                 const std::string& indent, const char* terminator) {
    os << indent << "entity " << entity.name;
    if (!entity.classes.empty()) os << " : " << joinClasses(entity.classes);
    if (entity.complex) {
        os << " {\n";
        for (const auto& child : entity.children)
            printEntity(os, child, indent + "  ", "");
        os << indent << "}" << terminator << "\n";
    } else if (!entity.items.empty()) {
        os << " {\n";
        for (const auto& item : entity.items)
            printItem(os, item, indent + "  ");
        os << indent << "}" << terminator << "\n";
    } else {
        os << ";\n";
    }
}

void printFlowItems(std::ostream& os, const std::vector<FlowItem>& items) {
    os << " [";
    bool first = true;
    for (const auto& fi : items) {
        if (!first) os << ", ";
        first = false;
        if (fi.wildcard)
            os << "*";
        else {
            os << fi.name;
            if (!fi.classes.empty()) os << ":" << joinClasses(fi.classes);
        }
        if (fi.grade != 1.0) os << "@" << formatGrade(fi.grade);
    }
    os << "]";
}

void printFlow(std::ostream& os, const Flow& flow, const std::string& indent) {
    os << indent << "flow " << flow.name << ": " << flow.origin << " -> "
       << flow.target;
    if (!flow.classes.empty()) os << " : " << joinClasses(flow.classes);
    if (flow.complex) {
        os << " {\n";
        for (const auto& sub : flow.subflows)
            printFlow(os, sub, indent + "  ");
        os << indent << "}\n";
        return;
    }
    if (!flow.items.empty()) printFlowItems(os, flow.items);
    os << ";\n";
}

/// Renders one premise; requirement atoms leave the implied wildcard
/// out (class atoms match by carrying there).
std::string patternText(const ItemPattern& pattern, bool requirementContext) {
    std::string out;
    if (pattern.itemName) {
        out = *pattern.itemName;
        std::string classes;
        auto add = [&](const std::string& part) {
            if (!classes.empty()) classes += "+";
            classes += part;
        };
        for (const auto& c : pattern.required) add(c);
        for (const auto& c : pattern.forbidden) add("!" + c);
        if (!pattern.captureVar.empty())
            add("*" + pattern.captureVar);
        else if (pattern.open)
            add("*");
        if (!classes.empty()) out += ":" + classes;
        return out;
    }
    auto add = [&](const std::string& atom) {
        if (!out.empty()) out += ", ";
        out += atom;
    };
    for (const auto& c : pattern.required) add(c + "(" + pattern.var + ")");
    for (const auto& c : pattern.forbidden) add("!" + c + "(" + pattern.var + ")");
    if (!pattern.captureVar.empty())
        add("*" + pattern.captureVar + "(" + pattern.var + ")");
    else if (pattern.open && !requirementContext)
        add("*(" + pattern.var + ")");
    else if (out.empty())
        add("*(" + pattern.var + ")");
    return out;
}

std::string outcomeText(const ItemOutcome& outcome) {
    std::string out = outcome.nameOrVar;
    std::string classes;
    for (const auto& term : outcome.classes) {
        if (!classes.empty()) classes += "+";
        if (term.isVar) classes += "*";
        classes += term.text;
    }
    if (!classes.empty()) out += ":" + classes;
    return out;
}

void printRule(std::ostream& os, const Rule& rule) {
    os << "rule ";
    if (!rule.scope.empty()) os << "on " << joinClasses(rule.scope) << " ";
    bool first = true;
    for (const auto& p : rule.premises) {
        if (!first) os << ", ";
        first = false;
        os << patternText(p, false);
    }
    if (rule.rewriteArrow) {
        os << " => " << outcomeText(rule.outcomes.front()) << ";\n";
        return;
    }
    os << " |- ";
    if (rule.probability != 1.0) os << "@" << formatGrade(rule.probability) << " ";
    first = true;
    for (const auto& o : rule.outcomes) {
        if (!first) os << ", ";
        first = false;
        os << outcomeText(o);
    }
    os << ";\n";
}

void printEntityRule(std::ostream& os, const EntityRule& er) {
    os << "erule " << er.entityClass << " -> ";
    if (er.probability != 1.0) os << "@" << formatGrade(er.probability) << " ";
    switch (er.product) {
    case EntityRule::Product::Item:
        os << "item " << er.item.name;
        if (!er.item.classes.empty())
            os << " : " << joinClasses(er.item.classes);
        if (er.item.grade != 1.0) os << " @" << formatGrade(er.item.grade);
        os << ";\n";
        break;
    case EntityRule::Product::Entity:
        printEntity(os, er.entity, "", ";");
        break;
    case EntityRule::Product::Flow:
        os << "flow ";
        if (!er.flow.name.empty()) os << er.flow.name << ": ";
        os << er.flow.origin << " -> " << er.flow.target;
        if (!er.flow.classes.empty())
            os << " : " << joinClasses(er.flow.classes);
        if (!er.flow.items.empty()) printFlowItems(os, er.flow.items);
        os << ";\n";
        break;
    }
}

void printRequirement(std::ostream& os, const Requirement& req) {
    os << "require ";
    bool first = true;
    for (const auto& p : req.items) {
        if (!first) os << ", ";
        first = false;
        os << patternText(p, true);
    }
    os << (req.membership ? " in " : " not-in ");
    if (req.targetKind == Requirement::TargetKind::Wildcard)
        os << "*";
    else
        os << req.target;
    if (!req.exceptions.empty()) {
        os << " \\ ";
        for (std::size_t i = 0; i < req.exceptions.size(); ++i) {
            if (i) os << ", ";
            os << req.exceptions[i];
        }
    }
    os << ";\n";
}

} // namespace

std::string formatGrade(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

std::string print(const Diagram& input) {
    const Diagram diagram = input.canonical();
    std::ostringstream os;
    for (const auto& name : diagram.imports)
        os << "use \"" << name << "\";\n";
    for (const auto& c : diagram.entityClasses) os << "class entity " << c << ";\n";
    for (const auto& c : diagram.flowClasses) os << "class flow " << c << ";\n";
    for (const auto& c : diagram.itemClasses) os << "class item " << c << ";\n";
    for (const auto& entity : diagram.entities) printEntity(os, entity, "", "");
    for (const auto& flow : diagram.flows) printFlow(os, flow, "");
    for (const auto& rule : diagram.rules) printRule(os, rule);
    for (const auto& er : diagram.entityRules) printEntityRule(os, er);
    for (const auto& req : diagram.requirements) printRequirement(os, req);
    return os.str();
}

} // namespace i2d
