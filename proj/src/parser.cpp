#include <cstdio>
#include <cstdlib>

#include "i2d/dsl.hpp"
#include "i2d/validate.hpp"
#include "parser_impl.hpp"

namespace i2d {

using detail::ParseAbort;
using detail::Tok;
using detail::Token;

namespace {

/// Raw requirement target, resolved against names after the full parse.
struct PendingTarget {
    std::size_t requirementIndex;
    bool wildcard = false;
    std::string name;
    SourceLoc loc;
};

class DiagramParser : public detail::Parser {
public:
    DiagramParser(std::vector<Token> tokens, std::string path,
                  std::vector<Diagnostic>& diagnostics)
        : Parser(std::move(tokens), std::move(path), diagnostics) {}

    Diagram run() {
        while (!at(Tok::End)) {
            try {
                parseStatement();
            } catch (const ParseAbort&) {
                synchronize();
            }
        }
        finalize();
        return std::move(diagram_);
    }

private:
    void parseStatement() {
        if (at(Tok::Semicolon)) { // tolerate stray semicolons
            take();
            return;
        }
        const Token head = cur();
        if (head.kind != Tok::Ident)
            fail("expected a statement keyword (use, class, entity, flow, "
                 "rule, erule, require), found " + describe(head));
        const std::string& kw = head.text;
        if (kw == "use") return parseUse();
        if (kw == "class") return parseClassDecl();
        if (kw == "entity") {
            take();
            Entity e = parseEntityLiteral(true);
            diagram_.entities.push_back(std::move(e));
            return;
        }
        if (kw == "flow") {
            take();
            Flow f = parseFlowBody();
            diagram_.flows.push_back(std::move(f));
            return;
        }
        if (kw == "rule") {
            take();
            ruleLocs_.push_back(head.loc);
            diagram_.rules.push_back(parseRuleTail());
            return;
        }
        if (kw == "erule") return parseEntityRule();
        if (kw == "require") return parseRequirement();
        fail("expected a statement keyword (use, class, entity, flow, rule, "
             "erule, require), found " + describe(head));
    }

    void parseUse() {
        take();
        const Token name = expect(Tok::String);
        expect(Tok::Semicolon);
        if (name.text.empty())
            error(name.loc, "schema name must be non-empty");
        else
            diagram_.imports.push_back(name.text);
    }

    void parseClassDecl() {
        take();
        const std::string kind = expectIdent("'item', 'entity' or 'flow'");
        const std::string name = expectIdent("class name");
        expect(Tok::Semicolon);
        if (kind == "item")
            diagram_.itemClasses.insert(name);
        else if (kind == "entity")
            diagram_.entityClasses.insert(name);
        else if (kind == "flow")
            diagram_.flowClasses.insert(name);
        else
            fail("expected 'item', 'entity' or 'flow' after 'class'");
    }

private:
    /// erule := CLASS '->' ['@' NUMBER] product ';'
    void parseEntityRule() {
        const SourceLoc loc = take().loc;
        EntityRule er;
        er.entityClass = expectIdent("entity class");
        expect(Tok::Arrow);
        if (accept(Tok::At)) er.probability = parseGrade();
        const std::string kind = expectIdent("'item', 'entity' or 'flow'");
        if (kind == "item") {
            er.product = EntityRule::Product::Item;
            er.item.name = expectIdent("item name");
            if (accept(Tok::Colon)) er.item.classes = parseClassList();
            if (accept(Tok::At)) er.item.grade = parseGrade();
        } else if (kind == "entity") {
            er.product = EntityRule::Product::Entity;
            // Literal children only become diagram entities when the
            // rule fires; don't reserve their names now.
            declareNames_ = false;
            er.entity = parseEntityLiteral(false);
            declareNames_ = true;
        } else if (kind == "flow") {
            er.product = EntityRule::Product::Flow;
            parseEruleFlow(er);
        } else {
            fail("expected 'item', 'entity' or 'flow' after '->'");
        }
        expect(Tok::Semicolon);
        eruleLocs_.push_back(loc);
        diagram_.entityRules.push_back(std::move(er));
    }

    /// [NAME ':'] ('self' '->' NAME | NAME '->' 'self') [':' classlist]
    /// ['[' flowitems ']']
    void parseEruleFlow(EntityRule& er) {
        std::string first = expectIdent("flow or entity name");
        if (accept(Tok::Colon)) {
            er.flow.name = first;
            first = expectIdent("'self' or entity name");
        }
        er.flow.origin = first;
        expect(Tok::Arrow);
        er.flow.target = expectIdent("'self' or entity name");
        er.selfIsOrigin = er.flow.origin == "self";
        if (!er.selfIsOrigin && er.flow.target != "self")
            fail("one flow endpoint must be 'self'");
        if (er.selfIsOrigin && er.flow.target == "self")
            fail("only one flow endpoint may be 'self'");
        if (accept(Tok::Colon)) er.flow.classes = parseClassList();
        if (accept(Tok::LBracket)) {
            while (!at(Tok::RBracket)) {
                er.flow.items.push_back(parseFlowItem());
                if (!accept(Tok::Comma)) break;
            }
            expect(Tok::RBracket);
        }
    }

    /// require := pattern (',' pattern)* ('in' | 'not-in') target
    ///            ['\' NAME (',' NAME)*] ';'
    void parseRequirement() {
        const SourceLoc loc = take().loc;
        Requirement req;
        std::vector<ParsedAtom> atoms;
        atoms.push_back(parsePatternTerm());
        while (accept(Tok::Comma)) atoms.push_back(parsePatternTerm());
        req.items = mergePatterns(atoms);
        // A class atom in a requirement matches any item carrying the
        // classes; extra classes never exempt an item.
        for (auto& p : req.items)
            if (!p.var.empty()) p.open = true;
        req.membership = parseMembership();
        PendingTarget pending;
        pending.loc = cur().loc;
        if (accept(Tok::Star)) {
            pending.wildcard = true;
            req.targetKind = Requirement::TargetKind::Wildcard;
        } else {
            pending.name = expectIdent("entity, entity class, or '*'");
        }
        if (accept(Tok::Backslash)) {
            req.exceptions.push_back(expectIdent("entity name"));
            while (accept(Tok::Comma))
                req.exceptions.push_back(expectIdent("entity name"));
            if (!pending.wildcard)
                error(pending.loc,
                      "exceptions are only permitted with the wildcard target");
        }
        expect(Tok::Semicolon);
        pending.requirementIndex = diagram_.requirements.size();
        requirementLocs_.push_back(loc);
        pendingTargets_.push_back(std::move(pending));
        diagram_.requirements.push_back(std::move(req));
    }

    bool parseMembership() {
        if (accept(Tok::MemberOf)) return true;
        if (accept(Tok::NotMemberOf)) return false;
        if (atIdent("in")) {
            take();
            return true;
        }
        if (atIdent("not")) {
            take();
            expect(Tok::Minus);
            if (!atIdent("in")) fail("expected 'in' after 'not-'");
            take();
            return false;
        }
        fail("expected 'in' or 'not-in', found " + describe(cur()));
    }

    // Post-parse resolution --------------------------------------------------
    void finalize() {
        diagram_.refreshRegistries();
        for (const auto& pending : pendingTargets_) {
            if (pending.wildcard) continue;
            Requirement& req = diagram_.requirements[pending.requirementIndex];
            const bool isEntity = entityLocs_.count(pending.name) != 0;
            const bool isClass = diagram_.entityClasses.contains(pending.name);
            if (isEntity && isClass) {
                error(pending.loc, "target '" + pending.name +
                                       "' is both an entity and an entity "
                                       "class; rename one of them");
            } else if (isEntity) {
                req.targetKind = Requirement::TargetKind::Entity;
            } else if (isClass) {
                req.targetKind = Requirement::TargetKind::EntityClass;
            } else {
                error(pending.loc, "unknown requirement target '" +
                                       pending.name + "'");
            }
            req.target = pending.name;
        }
    }

public:
    /// Maps a validation issue back to the closest declaration site.
    SourceLoc locate(const std::string& where) const {
        auto lookup = [&](const char* prefix,
                          const std::map<std::string, SourceLoc>& table)
            -> std::optional<SourceLoc> {
            const std::size_t plen = std::string(prefix).size();
            if (where.rfind(prefix, 0) != 0) return std::nullopt;
            std::string name = where.substr(plen);
            if (auto slash = name.find('/'); slash != std::string::npos)
                name = name.substr(0, slash);
            if (auto it = table.find(name); it != table.end())
                return it->second;
            return std::nullopt;
        };
        auto byIndex = [&](const char* prefix,
                           const std::vector<SourceLoc>& table)
            -> std::optional<SourceLoc> {
            if (where.rfind(prefix, 0) != 0) return std::nullopt;
            const std::size_t index =
                std::strtoul(where.c_str() + std::string(prefix).size(),
                             nullptr, 10);
            if (index >= 1 && index <= table.size()) return table[index - 1];
            return std::nullopt;
        };
        if (auto loc = lookup("entity ", entityLocs_)) return *loc;
        if (auto loc = lookup("flow ", flowLocs_)) return *loc;
        if (auto loc = byIndex("rule #", ruleLocs_)) return *loc;
        if (auto loc = byIndex("erule #", eruleLocs_)) return *loc;
        if (auto loc = byIndex("requirement #", requirementLocs_)) return *loc;
        return {1, 1};
    }

private:
    Diagram diagram_;
    std::vector<SourceLoc> ruleLocs_;
    std::vector<SourceLoc> eruleLocs_;
    std::vector<SourceLoc> requirementLocs_;
    std::vector<PendingTarget> pendingTargets_;
};

} // namespace

std::string Diagnostic::render() const {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%d:%d", loc.line, loc.column);
    std::string out = path.empty() ? std::string("<input>") : path;
    out += ":";
    out += buffer;
    out += ": ";
    out += message;
    return out;
}

ParseResult parse(const std::string& text, const std::string& path) {
    ParseResult result;
    auto tokens = detail::lex(text, path, result.diagnostics);
    DiagramParser parser(std::move(tokens), path, result.diagnostics);
    Diagram diagram = parser.run();
    if (result.diagnostics.empty()) {
        // The parser accepts anything syntactically well formed; the
        // structural invariants come from the model validator.
        ValidationReport report = validate(diagram);
        for (const auto& issue : report.issues)
            result.diagnostics.push_back({parser.locate(issue.where),
                                          issue.where + ": " + issue.message,
                                          path});
    }
    result.diagram = std::move(diagram);
    return result;
}

} // namespace i2d
