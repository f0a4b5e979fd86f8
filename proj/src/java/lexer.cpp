#include "reflab/java/lexer.hpp"

#include <cctype>
#include <unordered_set>

namespace reflab::java {

namespace {

const std::unordered_set<std::string_view> kKeywords = {
    "abstract", "assert",   "boolean",   "break",      "byte",    "case",
    "catch",    "char",     "class",     "const",      "continue", "default",
    "do",       "double",   "else",      "enum",       "extends", "final",
    "finally",  "float",    "for",       "goto",       "if",      "implements",
    "import",   "instanceof", "int",     "interface",  "long",    "native",
    "new",      "package",  "private",   "protected",  "public",  "return",
    "short",    "static",   "strictfp",  "super",      "switch",  "synchronized",
    "this",     "throw",    "throws",    "transient",  "try",     "void",
    "volatile", "while",    "var",       "record",     "yield",   "sealed",
    "permits",  "non-sealed",
};

// Longest-match table of operators and separators.
constexpr std::string_view kPuncts[] = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
    "&&",  "||",  "++",  "--",  "+=", "-=", "*=", "/=", "&=", "|=", "^=",
    "%=",  "<<",  ">>",  "(",   ")",  "{",  "}",  "[",  "]",  ";",  ",",
    ".",   "=",   ">",   "<",   "!",  "~",  "?",  ":",  "+",  "-",  "*",
    "/",   "&",   "|",   "^",   "%",  "@",
};

struct Cursor {
    std::string_view src;
    size_t pos = 0;
    size_t line = 1;

    bool eof() const { return pos >= src.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    void advance() {
        if (src[pos] == '\n') ++line;
        ++pos;
    }
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_part(char c) {
    return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

bool is_hex_digit(char c) { return std::isxdigit(static_cast<unsigned char>(c)); }

class Lexer {
public:
    explicit Lexer(std::string_view source) : cur_{source} {}

    LexResult run() {
        while (!cur_.eof() && !result_.error) {
            char c = cur_.peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                cur_.advance();
            } else if (c == '/' && cur_.peek(1) == '/') {
                skip_line_comment();
            } else if (c == '/' && cur_.peek(1) == '*') {
                skip_block_comment();
            } else if (is_ident_start(c)) {
                lex_word();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1))))) {
                lex_number();
            } else if (c == '"') {
                if (cur_.peek(1) == '"' && cur_.peek(2) == '"')
                    lex_text_block();
                else
                    lex_string();
            } else if (c == '\'') {
                lex_char();
            } else {
                lex_punct();
            }
        }
        return std::move(result_);
    }

private:
    void fail(const std::string& message, size_t offset, size_t line) {
        if (!result_.error) result_.error = LexError{message, offset, line};
    }

    void emit(TokenKind kind, size_t start, size_t start_line) {
        result_.tokens.push_back(Token{
            kind, std::string(cur_.src.substr(start, cur_.pos - start)), start, start_line});
    }

    void skip_line_comment() {
        while (!cur_.eof() && cur_.peek() != '\n') cur_.advance();
    }

    void skip_block_comment() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        cur_.advance();
        cur_.advance();
        while (!cur_.eof()) {
            if (cur_.peek() == '*' && cur_.peek(1) == '/') {
                cur_.advance();
                cur_.advance();
                return;
            }
            cur_.advance();
        }
        fail("unterminated block comment", start, start_line);
    }

    void lex_word() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        while (!cur_.eof() && is_ident_part(cur_.peek())) cur_.advance();
        // "non-sealed" is the only hyphenated keyword.
        if (cur_.src.substr(start, cur_.pos - start) == "non" && cur_.peek() == '-' &&
            cur_.src.substr(cur_.pos + 1, 6) == "sealed") {
            for (int i = 0; i < 7; ++i) cur_.advance();
        }
        std::string_view word = cur_.src.substr(start, cur_.pos - start);
        TokenKind kind = TokenKind::Identifier;
        if (word == "true" || word == "false")
            kind = TokenKind::BoolLiteral;
        else if (word == "null")
            kind = TokenKind::NullLiteral;
        else if (kKeywords.count(word))
            kind = TokenKind::Keyword;
        emit(kind, start, start_line);
    }

    void lex_number() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        bool is_float = false;

        if (cur_.peek() == '0' && (cur_.peek(1) == 'x' || cur_.peek(1) == 'X')) {
            cur_.advance();
            cur_.advance();
            size_t digits = 0;
            while (is_hex_digit(cur_.peek()) || cur_.peek() == '_') {
                if (cur_.peek() != '_') ++digits;
                cur_.advance();
            }
            // Hexadecimal floating point: 0x1.8p3
            if (cur_.peek() == '.' || cur_.peek() == 'p' || cur_.peek() == 'P') {
                is_float = true;
                if (cur_.peek() == '.') {
                    cur_.advance();
                    while (is_hex_digit(cur_.peek()) || cur_.peek() == '_') cur_.advance();
                }
                if (cur_.peek() == 'p' || cur_.peek() == 'P') {
                    cur_.advance();
                    if (cur_.peek() == '+' || cur_.peek() == '-') cur_.advance();
                    if (!std::isdigit(static_cast<unsigned char>(cur_.peek()))) {
                        fail("malformed hexadecimal float exponent", cur_.pos, cur_.line);
                        return;
                    }
                    while (std::isdigit(static_cast<unsigned char>(cur_.peek())) ||
                           cur_.peek() == '_')
                        cur_.advance();
                } else {
                    fail("hexadecimal float requires an exponent", cur_.pos, cur_.line);
                    return;
                }
            } else if (digits == 0) {
                fail("hexadecimal literal without digits", start, start_line);
                return;
            }
        } else if (cur_.peek() == '0' && (cur_.peek(1) == 'b' || cur_.peek(1) == 'B')) {
            cur_.advance();
            cur_.advance();
            size_t digits = 0;
            while (cur_.peek() == '0' || cur_.peek() == '1' || cur_.peek() == '_') {
                if (cur_.peek() != '_') ++digits;
                cur_.advance();
            }
            if (digits == 0) {
                fail("binary literal without digits", start, start_line);
                return;
            }
        } else {
            while (std::isdigit(static_cast<unsigned char>(cur_.peek())) || cur_.peek() == '_')
                cur_.advance();
            if (cur_.peek() == '.' &&
                (std::isdigit(static_cast<unsigned char>(cur_.peek(1))) ||
                 !is_ident_start(cur_.peek(1)))) {
                // Not a qualified name like 1.toString (invalid anyway); 1. is valid.
                is_float = true;
                cur_.advance();
                while (std::isdigit(static_cast<unsigned char>(cur_.peek())) ||
                       cur_.peek() == '_')
                    cur_.advance();
            }
            if (cur_.peek() == 'e' || cur_.peek() == 'E') {
                char after = cur_.peek(1);
                char after2 = cur_.peek(2);
                if (std::isdigit(static_cast<unsigned char>(after)) ||
                    ((after == '+' || after == '-') &&
                     std::isdigit(static_cast<unsigned char>(after2)))) {
                    is_float = true;
                    cur_.advance();
                    if (cur_.peek() == '+' || cur_.peek() == '-') cur_.advance();
                    while (std::isdigit(static_cast<unsigned char>(cur_.peek())) ||
                           cur_.peek() == '_')
                        cur_.advance();
                }
            }
        }

        char suffix = cur_.peek();
        if (suffix == 'l' || suffix == 'L') {
            cur_.advance();
        } else if (suffix == 'f' || suffix == 'F' || suffix == 'd' || suffix == 'D') {
            is_float = true;
            cur_.advance();
        }
        emit(is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral, start, start_line);
    }

    // Consumes one escape sequence after the backslash has been seen.
    bool consume_escape(size_t esc_start, size_t esc_line, bool in_text_block) {
        cur_.advance(); // the backslash
        char c = cur_.peek();
        switch (c) {
        case 'b': case 't': case 'n': case 'f': case 'r': case 's':
        case '"': case '\'': case '\\':
            cur_.advance();
            return true;
        case 'u': {
            while (cur_.peek() == 'u') cur_.advance();
            for (int i = 0; i < 4; ++i) {
                if (!is_hex_digit(cur_.peek())) {
                    fail("malformed unicode escape", esc_start, esc_line);
                    return false;
                }
                cur_.advance();
            }
            return true;
        }
        case '0': case '1': case '2': case '3':
        case '4': case '5': case '6': case '7': {
            bool long_form = c <= '3';
            cur_.advance();
            for (int i = 0; i < (long_form ? 2 : 1); ++i) {
                if (cur_.peek() >= '0' && cur_.peek() <= '7')
                    cur_.advance();
                else
                    break;
            }
            return true;
        }
        case '\n':
            if (in_text_block) { // line continuation, valid only in text blocks
                cur_.advance();
                return true;
            }
            fail("invalid escape sequence: backslash before end of line", esc_start, esc_line);
            return false;
        default:
            fail(std::string("invalid escape sequence: \\") + (c ? std::string(1, c) : "<eof>"),
                 esc_start, esc_line);
            return false;
        }
    }

    void lex_string() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        cur_.advance();
        while (!cur_.eof()) {
            char c = cur_.peek();
            if (c == '"') {
                cur_.advance();
                emit(TokenKind::StringLiteral, start, start_line);
                return;
            }
            if (c == '\n') {
                fail("unterminated string literal", start, start_line);
                return;
            }
            if (c == '\\') {
                if (!consume_escape(cur_.pos, cur_.line, false)) return;
            } else {
                cur_.advance();
            }
        }
        fail("unterminated string literal", start, start_line);
    }

    void lex_text_block() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        cur_.advance();
        cur_.advance();
        cur_.advance();
        while (!cur_.eof()) {
            if (cur_.peek() == '"' && cur_.peek(1) == '"' && cur_.peek(2) == '"') {
                cur_.advance();
                cur_.advance();
                cur_.advance();
                emit(TokenKind::TextBlock, start, start_line);
                return;
            }
            if (cur_.peek() == '\\') {
                if (!consume_escape(cur_.pos, cur_.line, true)) return;
            } else {
                cur_.advance();
            }
        }
        fail("unterminated text block", start, start_line);
    }

    void lex_char() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        cur_.advance();
        if (cur_.peek() == '\\') {
            if (!consume_escape(cur_.pos, cur_.line, false)) return;
        } else if (cur_.peek() == '\n' || cur_.eof() || cur_.peek() == '\'') {
            fail("empty or unterminated character literal", start, start_line);
            return;
        } else {
            cur_.advance();
        }
        if (cur_.peek() != '\'') {
            fail("unterminated character literal", start, start_line);
            return;
        }
        cur_.advance();
        emit(TokenKind::CharLiteral, start, start_line);
    }

    void lex_punct() {
        size_t start = cur_.pos;
        size_t start_line = cur_.line;
        std::string_view rest = cur_.src.substr(cur_.pos);
        for (std::string_view p : kPuncts) {
            if (rest.substr(0, p.size()) != p) continue;
            for (size_t i = 0; i < p.size(); ++i) cur_.advance();
            emit(TokenKind::Punct, start, start_line);
            return;
        }
        fail(std::string("illegal character: '") + cur_.peek() + "'", start, start_line);
    }

    Cursor cur_;
    LexResult result_;
};

} // namespace

LexResult tokenize(std::string_view source) { return Lexer(source).run(); }

bool is_java_keyword(std::string_view word) {
    return kKeywords.count(word) > 0 || word == "true" || word == "false" || word == "null";
}

} // namespace reflab::java
