#include "lexer.hpp"

#include <cctype>

namespace i2d::detail {

namespace {

bool identStart(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool identChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

std::vector<Token> lex(const std::string& text, const std::string& path,
                       std::vector<Diagnostic>& diagnostics) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto peek = [&](std::size_t ahead) -> char {
        return i + ahead < n ? text[i + ahead] : '\0';
    };
    auto advance = [&](std::size_t count) {
        for (std::size_t k = 0; k < count && i < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto push = [&](Tok kind, std::string tokText, SourceLoc loc) {
        out.push_back({kind, std::move(tokText), loc});
    };

    while (i < n) {
        const char c = text[i];
        const SourceLoc loc{line, col};
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (i < n && text[i] != '\n') advance(1);
            continue;
        }
        if (c == '#') {
            while (i < n && text[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && peek(1) == '*') {
            advance(2);
            while (i < n && !(text[i] == '*' && peek(1) == '/')) advance(1);
            if (i >= n)
                diagnostics.push_back({loc, "unterminated comment", path});
            advance(2);
            continue;
        }
        if (identStart(c)) {
            std::size_t start = i;
            while (i < n && identChar(text[i])) advance(1);
            push(Tok::Ident, text.substr(start, i - start), loc);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            std::size_t start = i;
            while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                             text[i] == '.'))
                advance(1);
            if (i < n && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t exp = 1;
                if (peek(1) == '+' || peek(1) == '-') exp = 2;
                if (std::isdigit(static_cast<unsigned char>(peek(exp)))) {
                    advance(exp);
                    while (i < n &&
                           std::isdigit(static_cast<unsigned char>(text[i])))
                        advance(1);
                }
            }
            push(Tok::Number, text.substr(start, i - start), loc);
            continue;
        }
        if (c == '"') {
            advance(1);
            std::string value;
            bool closed = false;
            while (i < n) {
                if (text[i] == '"') {
                    closed = true;
                    advance(1);
                    break;
                }
                if (text[i] == '\n') break;
                value += text[i];
                advance(1);
            }
            if (!closed)
                diagnostics.push_back({loc, "unterminated string literal", path});
            push(Tok::String, value, loc);
            continue;
        }
        // Multibyte aliases from the mathematical notation.
        if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < n) {
            const unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
            const unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
            if (b1 == 0x8A && b2 == 0xA2) { // ⊢
                push(Tok::Entails, "⊢", loc);
                advance(3);
                continue;
            }
            if (b1 == 0x88 && b2 == 0x88) { // ∈
                push(Tok::MemberOf, "∈", loc);
                advance(3);
                continue;
            }
            if (b1 == 0x88 && b2 == 0x89) { // ∉
                push(Tok::NotMemberOf, "∉", loc);
                advance(3);
                continue;
            }
            if (b1 == 0x86 && b2 == 0x92) { // →
                push(Tok::Rewrite, "→", loc);
                advance(3);
                continue;
            }
        }
        if (c == '-' && peek(1) == '>') {
            push(Tok::Arrow, "->", loc);
            advance(2);
            continue;
        }
        if (c == '|' && peek(1) == '-') {
            push(Tok::Entails, "|-", loc);
            advance(2);
            continue;
        }
        if (c == '=' && peek(1) == '>') {
            push(Tok::Rewrite, "=>", loc);
            advance(2);
            continue;
        }
        Tok kind;
        switch (c) {
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case ':': kind = Tok::Colon; break;
        case ';': kind = Tok::Semicolon; break;
        case ',': kind = Tok::Comma; break;
        case '+': kind = Tok::Plus; break;
        case '@': kind = Tok::At; break;
        case '*': kind = Tok::Star; break;
        case '!': kind = Tok::Bang; break;
        case '\\': kind = Tok::Backslash; break;
        case '-': kind = Tok::Minus; break;
        default:
            diagnostics.push_back(
                {loc, std::string("unexpected character '") + c + "'", path});
            advance(1);
            continue;
        }
        push(kind, std::string(1, c), loc);
        advance(1);
    }
    out.push_back({Tok::End, "", {line, col}});
    return out;
}

const char* tokenName(Tok kind) {
    switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Colon: return "':'";
    case Tok::Semicolon: return "';'";
    case Tok::Comma: return "','";
    case Tok::Plus: return "'+'";
    case Tok::At: return "'@'";
    case Tok::Star: return "'*'";
    case Tok::Bang: return "'!'";
    case Tok::Backslash: return "'\\'";
    case Tok::Arrow: return "'->'";
    case Tok::Entails: return "'|-'";
    case Tok::Rewrite: return "'=>'";
    case Tok::MemberOf: return "'in'";
    case Tok::NotMemberOf: return "'not-in'";
    case Tok::Minus: return "'-'";
    case Tok::End: return "end of input";
    }
    return "token";
}

} // namespace i2d::detail
