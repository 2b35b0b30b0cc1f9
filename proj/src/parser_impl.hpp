// Recursive-descent parser core, shared by the diagram parser and the
// transformation script parser.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "lexer.hpp"

namespace i2d::detail {

struct ParseAbort {};

class Parser {
public:
    Parser(std::vector<Token> tokens, std::string path,
           std::vector<Diagnostic>& diagnostics)
        : tokens_(std::move(tokens)), path_(std::move(path)),
          diagnostics_(diagnostics) {}

    // Token plumbing -----------------------------------------------------
    const Token& cur() const { return tokens_[pos_]; }
    const Token& peek(std::size_t ahead = 1) const {
        std::size_t p = pos_ + ahead;
        if (p >= tokens_.size()) p = tokens_.size() - 1;
        return tokens_[p];
    }
    bool at(Tok kind) const { return cur().kind == kind; }
    bool atIdent(const char* word) const {
        return cur().kind == Tok::Ident && cur().text == word;
    }
    Token take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok kind) {
        if (!at(kind)) return false;
        take();
        return true;
    }
    Token expect(Tok kind) {
        if (!at(kind))
            fail(std::string("expected ") + tokenName(kind) + ", found " +
                 describe(cur()));
        return take();
    }
    std::string expectIdent(const char* what) {
        if (!at(Tok::Ident))
            fail(std::string("expected ") + what + ", found " + describe(cur()));
        return take().text;
    }

    [[noreturn]] void fail(const std::string& message) {
        error(cur().loc, message);
        throw ParseAbort{};
    }
    void error(SourceLoc loc, const std::string& message) {
        diagnostics_.push_back({loc, message, path_});
    }

    static std::string describe(const Token& token) {
        if (token.kind == Tok::Ident || token.kind == Tok::Number)
            return "'" + token.text + "'";
        return tokenName(token.kind);
    }

    /// Panic recovery: skip to the next ';' at brace depth zero.
    void synchronize() {
        int depth = 0;
        while (!at(Tok::End)) {
            if (at(Tok::LBrace)) ++depth;
            if (at(Tok::RBrace)) {
                if (depth == 0) return;
                --depth;
            }
            if (at(Tok::Semicolon) && depth == 0) {
                take();
                return;
            }
            take();
        }
    }

    // Shared grammar fragments -------------------------------------------
    /// classlist := IDENT ('+' IDENT)*
    SymbolSet parseClassList() {
        SymbolSet out;
        out.insert(expectIdent("class name"));
        while (accept(Tok::Plus)) out.insert(expectIdent("class name"));
        return out;
    }

    /// '@' NUMBER with range validation.
    double parseGrade() {
        const SourceLoc loc = cur().loc;
        const Token token = expect(Tok::Number);
        double value = 0.0;
        try {
            value = std::stod(token.text);
        } catch (const std::exception&) {
            error(loc, "malformed number '" + token.text + "'");
            return 1.0;
        }
        if (value < 0.0 || value > 1.0)
            error(loc, "grade must lie in [0,1]");
        return value;
    }

    /// Premise or requirement pattern. Atoms bind variables; references
    /// name concrete items, optionally with class patterns:
    ///   c(x)  !d(x)  *(x)  *v(x)  name  name:a+b  name:a+!b+*  name:*v
    struct ParsedAtom {
        bool isAtom = false;     // subject in parentheses
        std::string subject;     // variable (atom) or item name (reference)
        ItemPattern pattern;     // partially filled
        SourceLoc loc;
    };

    ParsedAtom parsePatternTerm() {
        ParsedAtom out;
        out.loc = cur().loc;
        if (at(Tok::Bang)) {
            take();
            std::string cls = expectIdent("class name");
            expect(Tok::LParen);
            out.isAtom = true;
            out.subject = expectIdent("variable");
            expect(Tok::RParen);
            out.pattern.forbidden.insert(cls);
            return out;
        }
        if (at(Tok::Star)) {
            take();
            std::string captureVar;
            if (at(Tok::Ident)) captureVar = take().text;
            expect(Tok::LParen);
            out.isAtom = true;
            out.subject = expectIdent("variable");
            expect(Tok::RParen);
            out.pattern.open = true;
            out.pattern.captureVar = captureVar;
            return out;
        }
        std::string name = expectIdent("item name or class atom");
        if (at(Tok::LParen)) {
            take();
            out.isAtom = true;
            out.subject = expectIdent("variable");
            expect(Tok::RParen);
            out.pattern.required.insert(name);
            return out;
        }
        out.subject = name;
        out.pattern.itemName = name;
        if (accept(Tok::Colon)) parseClassPatterns(out.pattern);
        return out;
    }

    /// classpattern := (IDENT | '!' IDENT | '*' | '*' IDENT) ('+' ...)*
    void parseClassPatterns(ItemPattern& pattern) {
        while (true) {
            if (at(Tok::Bang)) {
                take();
                pattern.forbidden.insert(expectIdent("class name"));
            } else if (at(Tok::Star)) {
                take();
                pattern.open = true;
                if (at(Tok::Ident)) {
                    if (!pattern.captureVar.empty())
                        fail("only one class variable per premise");
                    pattern.captureVar = take().text;
                }
            } else {
                pattern.required.insert(expectIdent("class name"));
            }
            if (!accept(Tok::Plus)) break;
        }
    }

    /// Merges atoms naming the same variable into a single pattern;
    /// keeps first-appearance order of subjects.
    std::vector<ItemPattern> mergePatterns(const std::vector<ParsedAtom>& atoms) {
        std::vector<ItemPattern> out;
        std::map<std::string, std::size_t> varSlots;
        for (const auto& atom : atoms) {
            if (!atom.isAtom) {
                out.push_back(atom.pattern);
                continue;
            }
            auto it = varSlots.find(atom.subject);
            if (it == varSlots.end()) {
                ItemPattern p = atom.pattern;
                p.var = atom.subject;
                varSlots.emplace(atom.subject, out.size());
                out.push_back(std::move(p));
                continue;
            }
            ItemPattern& p = out[it->second];
            p.required.unionWith(atom.pattern.required);
            p.forbidden.unionWith(atom.pattern.forbidden);
            if (atom.pattern.open) p.open = true;
            if (!atom.pattern.captureVar.empty()) {
                if (!p.captureVar.empty() &&
                    p.captureVar != atom.pattern.captureVar)
                    error(atom.loc, "only one class variable per premise");
                p.captureVar = atom.pattern.captureVar;
            }
        }
        for (auto& p : out)
            if (!p.captureVar.empty()) p.open = true;
        return out;
    }

    /// outcome := IDENT [':' (IDENT | '*' IDENT) ('+' ...)*]
    ItemOutcome parseOutcome() {
        ItemOutcome out;
        out.nameOrVar = expectIdent("item name or variable");
        if (accept(Tok::Colon)) {
            while (true) {
                if (at(Tok::Star)) {
                    take();
                    out.classes.push_back({true, expectIdent("class variable")});
                } else {
                    out.classes.push_back({false, expectIdent("class name")});
                }
                if (!accept(Tok::Plus)) break;
            }
            // Normalized order: literal classes first, then splices.
            std::sort(out.classes.begin(), out.classes.end(),
                      [](const ClassTerm& a, const ClassTerm& b) {
                          return std::tie(a.isVar, a.text) <
                                 std::tie(b.isVar, b.text);
                      });
            out.classes.erase(std::unique(out.classes.begin(),
                                          out.classes.end()),
                              out.classes.end());
        }
        return out;
    }

    /// Rule body after the 'rule' keyword, up to and including ';'.
    Rule parseRuleTail() {
        Rule rule;
        if (atIdent("on") && peek().kind != Tok::LParen) {
            take();
            rule.scope = parseClassList();
        }
        std::vector<ParsedAtom> atoms;
        atoms.push_back(parsePatternTerm());
        while (accept(Tok::Comma)) atoms.push_back(parsePatternTerm());
        rule.premises = mergePatterns(atoms);
        if (accept(Tok::Rewrite)) {
            rule.rewriteArrow = true;
            rule.outcomes.push_back(parseOutcome());
        } else {
            expect(Tok::Entails);
            if (accept(Tok::At)) rule.probability = parseGrade();
            rule.outcomes.push_back(parseOutcome());
            while (accept(Tok::Comma)) rule.outcomes.push_back(parseOutcome());
        }
        expect(Tok::Semicolon);
        resolveOutcomeVariables(rule);
        return rule;
    }

    /// Marks outcome names that refer to premise variables.
    void resolveOutcomeVariables(Rule& rule) {
        std::set<std::string> vars;
        for (const auto& p : rule.premises)
            if (!p.var.empty()) vars.insert(p.var);
        for (auto& o : rule.outcomes)
            if (vars.count(o.nameOrVar)) o.fromVar = true;
    }

    // Entity and flow literals --------------------------------------------
    /// entity := NAME [':' classlist] (';' | '{' (item | entity)* '}')
    /// With `statement` set the short form requires the terminating ';'.
    Entity parseEntityLiteral(bool statement) {
        Entity entity;
        const SourceLoc loc = cur().loc;
        entity.name = expectIdent("entity name");
        if (declareNames_) registerEntityName(entity.name, loc);
        if (accept(Tok::Colon)) entity.classes = parseClassList();
        if (accept(Tok::LBrace)) {
            bool sawItem = false;
            while (!at(Tok::RBrace)) {
                if (at(Tok::End)) fail("missing '}' in entity body");
                if (atIdent("item")) {
                    take();
                    if (entity.complex)
                        error(cur().loc,
                              "an entity holds either items or child entities");
                    sawItem = true;
                    parseItemDecl(entity);
                    continue;
                }
                if (atIdent("entity")) {
                    take();
                    if (sawItem)
                        error(cur().loc,
                              "an entity holds either items or child entities");
                    entity.complex = true;
                    entity.children.push_back(parseEntityLiteral(true));
                    continue;
                }
                fail("expected 'item' or 'entity' in entity body, found " +
                     describe(cur()));
            }
            take();
            if (entity.complex) entity.items.clear();
        } else if (statement) {
            expect(Tok::Semicolon);
        }
        return entity;
    }

    /// item := NAME [':' classlist] ['@' NUMBER] ';'
    void parseItemDecl(Entity& entity) {
        Item item = parseItemLiteral();
        expect(Tok::Semicolon);
        // Repeated declarations of one identity merge by maximum grade.
        for (auto& existing : entity.items) {
            if (existing.name == item.name && existing.classes == item.classes) {
                existing.grade = std::max(existing.grade, item.grade);
                return;
            }
        }
        entity.items.push_back(std::move(item));
    }

    Item parseItemLiteral() {
        Item item;
        item.name = expectIdent("item name");
        if (accept(Tok::Colon)) item.classes = parseClassList();
        if (accept(Tok::At)) item.grade = parseGrade();
        return item;
    }

    /// flow := [NAME ':'] ORIGIN '->' TARGET [':' classlist]
    ///         ('[' flowitems ']' ';' | '{' flow* '}' | ';')
    Flow parseFlowBody(bool allowComplex = true) {
        Flow flow;
        const SourceLoc loc = cur().loc;
        std::string first = expectIdent("flow or entity name");
        if (accept(Tok::Colon)) {
            flow.name = first;
            flow.origin = expectIdent("origin entity");
        } else {
            flow.origin = first;
        }
        expect(Tok::Arrow);
        flow.target = expectIdent("target entity");
        if (accept(Tok::Colon)) flow.classes = parseClassList();
        if (flow.name.empty()) flow.name = freshFlowName();
        if (declareNames_) registerFlowName(flow.name, loc);
        if (accept(Tok::LBracket)) {
            while (!at(Tok::RBracket)) {
                flow.items.push_back(parseFlowItem());
                if (!accept(Tok::Comma)) break;
            }
            expect(Tok::RBracket);
            expect(Tok::Semicolon);
            return flow;
        }
        if (allowComplex && accept(Tok::LBrace)) {
            flow.complex = true;
            while (!at(Tok::RBrace)) {
                if (at(Tok::End)) fail("missing '}' in flow body");
                if (!atIdent("flow"))
                    fail("expected 'flow' in complex flow body, found " +
                         describe(cur()));
                take();
                flow.subflows.push_back(parseFlowBody());
            }
            take();
            return flow;
        }
        expect(Tok::Semicolon);
        return flow;
    }

    /// flowitem := '*' ['@' NUMBER] | NAME [':' classlist] ['@' NUMBER]
    FlowItem parseFlowItem() {
        FlowItem item;
        if (accept(Tok::Star)) {
            item.wildcard = true;
        } else {
            item.name = expectIdent("item name or '*'");
            if (accept(Tok::Colon)) item.classes = parseClassList();
        }
        if (accept(Tok::At)) item.grade = parseGrade();
        return item;
    }

    void registerEntityName(const std::string& name, SourceLoc loc) {
        if (!entityLocs_.emplace(name, loc).second)
            error(loc, "entity name '" + name + "' is not unique");
    }

    void registerFlowName(const std::string& name, SourceLoc loc) {
        if (!flowLocs_.emplace(name, loc).second)
            error(loc, "flow name '" + name + "' is not unique");
    }

    std::string freshFlowName() {
        while (true) {
            std::string candidate = "f" + std::to_string(++anonymousFlows_);
            if (!flowLocs_.count(candidate)) return candidate;
        }
    }

protected:
    std::vector<Token> tokens_;
    std::string path_;
    std::vector<Diagnostic>& diagnostics_;
    std::size_t pos_ = 0;
    std::map<std::string, SourceLoc> entityLocs_;
    std::map<std::string, SourceLoc> flowLocs_;
    int anonymousFlows_ = 0;
    bool declareNames_ = true;
};

} // namespace i2d::detail
