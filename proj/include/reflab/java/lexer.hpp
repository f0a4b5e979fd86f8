#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflab::java {

enum class TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    FloatLiteral,
    CharLiteral,
    StringLiteral,
    TextBlock,
    BoolLiteral,
    NullLiteral,
    Punct,
};

struct Token {
    TokenKind kind;
    std::string text;
    size_t offset = 0; // byte offset into the source
    size_t line = 1;   // 1-based
};

struct LexError {
    std::string message;
    size_t offset = 0;
    size_t line = 1;
};

struct LexResult {
    std::vector<Token> tokens; // comments and whitespace dropped
    std::optional<LexError> error;

    bool ok() const { return !error.has_value(); }
};

// Tokenizes Java source. Covers the full lexical grammar: all literal forms
// (hex/octal/binary ints, underscores, hex floats, text blocks, unicode and
// octal escapes), comments, and compound operators. Stops at the first
// lexical error (unterminated string/comment, invalid escape, stray byte).
LexResult tokenize(std::string_view source);

// True for reserved words plus the literals true/false/null (the convention
// used for keyword-weighted n-gram matching).
bool is_java_keyword(std::string_view word);

} // namespace reflab::java
