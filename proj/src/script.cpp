// Parser for transformation scripts (one transformation per statement).
#include "i2d/transforms.hpp"

#include "parser_impl.hpp"

namespace i2d {

using detail::ParseAbort;
using detail::Tok;
using detail::Token;

namespace {

class ScriptParser : public detail::Parser {
public:
    ScriptParser(std::vector<Token> tokens, std::string path,
                 std::vector<Diagnostic>& diagnostics)
        : Parser(std::move(tokens), std::move(path), diagnostics) {
        declareNames_ = false; // names resolve against the diagram, not
                               // the script
    }

    void run(ScriptResult& result) {
        while (!at(Tok::End)) {
            try {
                if (at(Tok::Semicolon)) {
                    take();
                    continue;
                }
                const SourceLoc loc = cur().loc;
                result.transformations.push_back(parseStatement());
                result.locations.push_back(loc);
            } catch (const ParseAbort&) {
                synchronize();
            }
        }
    }

private:
    Transformation parseStatement() {
        const std::string kw = expectIdent(
            "a transformation (add, classify, rule, erule, require, refine, "
            "bisect, fold)");
        if (kw == "add") return parseAdd();
        if (kw == "classify") return parseClassify();
        if (kw == "rule") return AddRule{parseRuleTail()};
        if (kw == "erule") return parseAddEntityRule();
        if (kw == "require") return parseAddRequirement();
        if (kw == "refine") return parseRefine();
        if (kw == "bisect") {
            Bisect t;
            t.flow = expectIdent("flow name");
            t.mediator = expectIdent("mediator entity");
            expect(Tok::Semicolon);
            return t;
        }
        if (kw == "fold") {
            FoldView t;
            t.entity = expectIdent("entity name");
            if (at(Tok::Number)) {
                t.depth = static_cast<std::size_t>(
                    std::strtoul(take().text.c_str(), nullptr, 10));
            }
            expect(Tok::Semicolon);
            return t;
        }
        fail("unknown transformation '" + kw + "'");
    }

    Transformation parseAdd() {
        const std::string kind = expectIdent("'item', 'entity' or 'flow'");
        if (kind == "item") {
            AddItem t;
            t.entity = expectIdent("entity name");
            t.item = parseItemLiteral();
            expect(Tok::Semicolon);
            return t;
        }
        if (kind == "entity") {
            AddEntity t;
            t.entity.name = expectIdent("entity name");
            if (accept(Tok::Colon)) t.entity.classes = parseClassList();
            if (atIdent("in")) {
                take();
                t.parent = expectIdent("parent entity");
            }
            expect(Tok::Semicolon);
            return t;
        }
        if (kind == "flow") {
            AddFlow t;
            t.flow = parseFlowBody(/*allowComplex=*/false);
            if (t.flow.name.empty()) t.flow.name = freshFlowName();
            return t; // parseFlowBody consumed the ';'
        }
        fail("expected 'item', 'entity' or 'flow' after 'add'");
    }

    Transformation parseClassify() {
        const std::string kind = expectIdent("'item', 'entity' or 'flow'");
        if (kind == "entity") {
            ClassifyEntity t;
            t.entity = expectIdent("entity name");
            expect(Tok::Colon);
            t.classes = parseClassList();
            expect(Tok::Semicolon);
            return t;
        }
        if (kind == "flow") {
            ClassifyFlow t;
            t.flow = expectIdent("flow name");
            expect(Tok::Colon);
            t.classes = parseClassList();
            expect(Tok::Semicolon);
            return t;
        }
        if (kind == "item") {
            // classify item NAME[:existing] : new+classes ;
            ClassifyItem t;
            t.selector.name = expectIdent("item name");
            expect(Tok::Colon);
            SymbolSet first = parseClassList();
            if (accept(Tok::Colon)) {
                t.selector.classes = first;
                t.classes = parseClassList();
            } else {
                t.classes = first;
            }
            expect(Tok::Semicolon);
            return t;
        }
        fail("expected 'item', 'entity' or 'flow' after 'classify'");
    }

    Transformation parseAddEntityRule() {
        // Same surface as the diagram statement.
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
            er.entity = parseEntityLiteral(false);
        } else if (kind == "flow") {
            er.product = EntityRule::Product::Flow;
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
            if (accept(Tok::Colon)) er.flow.classes = parseClassList();
            if (accept(Tok::LBracket)) {
                while (!at(Tok::RBracket)) {
                    er.flow.items.push_back(parseFlowItem());
                    if (!accept(Tok::Comma)) break;
                }
                expect(Tok::RBracket);
            }
        } else {
            fail("expected 'item', 'entity' or 'flow' after '->'");
        }
        expect(Tok::Semicolon);
        return AddEntityRule{std::move(er)};
    }

    Transformation parseAddRequirement() {
        Requirement req;
        std::vector<ParsedAtom> atoms;
        atoms.push_back(parsePatternTerm());
        while (accept(Tok::Comma)) atoms.push_back(parsePatternTerm());
        req.items = mergePatterns(atoms);
        for (auto& p : req.items)
            if (!p.var.empty()) p.open = true;
        req.membership = parseMembership();
        if (accept(Tok::Star)) {
            req.targetKind = Requirement::TargetKind::Wildcard;
        } else {
            // Entity versus class is settled when the transformation is
            // applied to a concrete diagram.
            req.target = expectIdent("entity, entity class, or '*'");
            req.targetKind = Requirement::TargetKind::Entity;
        }
        if (accept(Tok::Backslash)) {
            req.exceptions.push_back(expectIdent("entity name"));
            while (accept(Tok::Comma))
                req.exceptions.push_back(expectIdent("entity name"));
        }
        expect(Tok::Semicolon);
        return AddRequirement{std::move(req)};
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

    Transformation parseRefine() {
        RefineEntity t;
        t.entity = expectIdent("entity name");
        if (!atIdent("into")) fail("expected 'into' after the entity name");
        take();
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (at(Tok::End)) fail("missing '}' in refinement");
            if (!atIdent("entity"))
                fail("expected 'entity' in refinement body, found " +
                     describe(cur()));
            take();
            t.children.push_back(parseEntityLiteral(true));
        }
        take();
        if (atIdent("items")) {
            take();
            if (!atIdent("to")) fail("expected 'to' after 'items'");
            take();
            t.itemsTo = expectIdent("child entity");
        }
        if (atIdent("retarget")) {
            take();
            while (true) {
                const std::string flowName = expectIdent("flow name");
                expect(Tok::Arrow);
                const std::string child = expectIdent("child entity");
                if (!t.retarget.emplace(flowName, child).second)
                    fail("duplicate retarget entry for flow '" + flowName +
                         "'");
                if (!accept(Tok::Comma)) break;
            }
        }
        expect(Tok::Semicolon);
        return t;
    }
};

} // namespace

ScriptResult parseTransformScript(const std::string& text,
                                  const std::string& path) {
    ScriptResult result;
    auto tokens = detail::lex(text, path, result.diagnostics);
    ScriptParser parser(std::move(tokens), path, result.diagnostics);
    parser.run(result);
    return result;
}

} // namespace i2d
