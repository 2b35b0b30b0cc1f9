#include "support/dotcheck.hpp"

#include <cctype>
#include <vector>

namespace i2d::testing {

namespace {

// A tokenizer plus recursive checker for the subset of the DOT grammar
// we emit: graph/digraph, subgraphs, node statements with attribute
// lists, and edge statements.
struct DotToken {
    enum Kind { Id, Punct, End } kind = End;
    std::string text;
};

struct DotLexer {
    const std::string& text;
    std::size_t pos = 0;
    std::string error;

    DotToken next() {
        while (pos < text.size() &&
               std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos >= text.size()) return {DotToken::End, ""};
        const char c = text[pos];
        if (c == '"') {
            std::string value;
            ++pos;
            while (pos < text.size() && text[pos] != '"') {
                if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
                value += text[pos++];
            }
            if (pos >= text.size()) {
                error = "unterminated quoted id";
                return {DotToken::End, ""};
            }
            ++pos;
            return {DotToken::Id, value};
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
            c == '.') {
            std::string value;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '_' || text[pos] == '.'))
                value += text[pos++];
            return {DotToken::Id, value};
        }
        if (c == '-' && pos + 1 < text.size() &&
            (text[pos + 1] == '>' || text[pos + 1] == '-')) {
            pos += 2;
            return {DotToken::Punct, text.substr(pos - 2, 2)};
        }
        ++pos;
        return {DotToken::Punct, std::string(1, c)};
    }
};

struct DotChecker {
    DotLexer lexer;
    DotToken cur;
    std::string error;

    explicit DotChecker(const std::string& text) : lexer{text} {
        advance();
    }

    void advance() {
        cur = lexer.next();
        if (!lexer.error.empty() && error.empty()) error = lexer.error;
    }

    bool is(const char* punct) const {
        return cur.kind == DotToken::Punct && cur.text == punct;
    }

    bool fail(const std::string& message) {
        if (error.empty()) error = message + " near '" + cur.text + "'";
        return false;
    }

    bool expectPunct(const char* punct) {
        if (!is(punct)) return fail(std::string("expected '") + punct + "'");
        advance();
        return true;
    }

    bool expectId() {
        if (cur.kind != DotToken::Id) return fail("expected an identifier");
        advance();
        return true;
    }

    bool attrList() {
        if (!is("[")) return true;
        advance();
        while (!is("]")) {
            if (cur.kind == DotToken::End) return fail("unterminated '['");
            if (!expectId()) return false;
            if (is("=")) {
                advance();
                if (!expectId()) return false;
            }
            if (is(",")) advance();
        }
        advance();
        return true;
    }

    bool statements() {
        while (!is("}")) {
            if (cur.kind == DotToken::End) return fail("unterminated '{'");
            if (cur.kind == DotToken::Id && cur.text == "subgraph") {
                advance();
                if (cur.kind == DotToken::Id) advance(); // optional name
                if (!expectPunct("{")) return false;
                if (!statements()) return false;
                if (!expectPunct("}")) return false;
                continue;
            }
            if (!expectId()) return false;
            if (is("=")) { // graph attribute, e.g. rankdir=LR
                advance();
                if (!expectId()) return false;
            } else {
                while (is("->") || is("--")) {
                    advance();
                    if (!expectId()) return false;
                }
                if (!attrList()) return false;
            }
            if (!is(";")) return fail("expected ';'");
            advance();
        }
        return true;
    }

    bool run() {
        if (cur.kind != DotToken::Id ||
            (cur.text != "digraph" && cur.text != "graph"))
            return fail("expected 'digraph' or 'graph'");
        advance();
        if (cur.kind == DotToken::Id) advance(); // optional graph name
        if (!expectPunct("{")) return false;
        if (!statements()) return false;
        if (!expectPunct("}")) return false;
        if (cur.kind != DotToken::End) return fail("trailing content");
        return true;
    }
};

} // namespace

std::string dotSyntaxError(const std::string& text) {
    DotChecker checker(text);
    checker.run();
    return checker.error;
}

} // namespace i2d::testing
