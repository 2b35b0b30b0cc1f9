// Shared tokenizer for diagram sources and transformation scripts.
#pragma once

#include <string>
#include <vector>

#include "i2d/dsl.hpp"

namespace i2d::detail {

enum class Tok {
    Ident,
    Number,
    String,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Semicolon,
    Comma,
    Plus,
    At,
    Star,
    Bang,
    Backslash,
    Arrow,      // ->
    Entails,    // |- or ⊢
    Rewrite,    // => or →
    MemberOf,   // ∈
    NotMemberOf,// ∉
    Minus,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceLoc loc;
};

/// Tokenizes `text`; lexical problems are appended to `diagnostics`
/// and skipped so parsing can continue.
std::vector<Token> lex(const std::string& text, const std::string& path,
                       std::vector<Diagnostic>& diagnostics);

const char* tokenName(Tok kind);

} // namespace i2d::detail
