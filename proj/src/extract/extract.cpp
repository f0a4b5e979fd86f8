#include "reflab/extract/extract.hpp"

#include "reflab/java/lexer.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/strings.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace reflab::extract {

namespace {

// ---------------------------------------------------------------------------
// Lenient scanner. Model output is part prose, part code, so this tokenizer
// never fails: unknown bytes become single-char puncts, an apostrophe that is
// not a short character literal stays an apostrophe, strings end at newlines.
// ---------------------------------------------------------------------------

struct RoughToken {
    enum class Kind { word, punct, str, comment };
    Kind kind;
    std::string_view text;
    size_t begin;
    size_t end;
};

bool word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
}
bool word_part(char c) { return word_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

std::vector<RoughToken> rough_scan(std::string_view text) {
    std::vector<RoughToken> tokens;
    size_t i = 0;
    auto push = [&](RoughToken::Kind kind, size_t begin, size_t end) {
        tokens.push_back({kind, text.substr(begin, end - begin), begin, end});
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            size_t begin = i;
            while (i < text.size() && text[i] != '\n') ++i;
            push(RoughToken::Kind::comment, begin, i);
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            size_t begin = i;
            i += 2;
            while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) ++i;
            i = std::min(text.size(), i + 2);
            push(RoughToken::Kind::comment, begin, i);
        } else if (word_start(c)) {
            size_t begin = i;
            while (i < text.size() && word_part(text[i])) ++i;
            push(RoughToken::Kind::word, begin, i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t begin = i;
            while (i < text.size() &&
                   (word_part(text[i]) || text[i] == '.' || text[i] == '+' || text[i] == '-'))
                ++i;
            push(RoughToken::Kind::word, begin, i);
        } else if (c == '"') {
            size_t begin = i;
            ++i;
            while (i < text.size() && text[i] != '"' && text[i] != '\n') {
                if (text[i] == '\\' && i + 1 < text.size()) ++i;
                ++i;
            }
            if (i < text.size() && text[i] == '"') ++i;
            push(RoughToken::Kind::str, begin, i);
        } else if (c == '\'') {
            // Accept only short character literals; otherwise keep the
            // apostrophe as punctuation so prose does not derail the scan.
            size_t close = std::string_view::npos;
            for (size_t j = i + 1; j < std::min(text.size(), i + 5); ++j) {
                if (text[j] == '\n') break;
                if (text[j] == '\'' && j > i + 1) {
                    close = j;
                    break;
                }
            }
            if (close != std::string_view::npos) {
                push(RoughToken::Kind::str, i, close + 1);
                i = close + 1;
            } else {
                push(RoughToken::Kind::punct, i, i + 1);
                ++i;
            }
        } else {
            push(RoughToken::Kind::punct, i, i + 1);
            ++i;
        }
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Declaration recognition over the rough token stream.
// ---------------------------------------------------------------------------

const std::unordered_set<std::string_view> kTypeKeywords = {"class", "interface", "enum",
                                                            "record"};
const std::unordered_set<std::string_view> kStatementWords = {
    "return", "new",  "throw",  "if",     "while", "for",   "do",     "else",
    "switch", "case", "break",  "continue", "try", "catch", "finally", "assert",
    "yield",  "import", "package"};
const std::unordered_set<std::string_view> kReservedNonName = {
    "if", "while", "for", "switch", "catch", "synchronized", "return", "new", "do",
    "else", "try", "finally", "throw", "assert", "case", "yield", "this", "super"};

bool is_punct(const std::vector<RoughToken>& tokens, size_t i, std::string_view p) {
    return i < tokens.size() && tokens[i].kind == RoughToken::Kind::punct && tokens[i].text == p;
}
bool is_word(const std::vector<RoughToken>& tokens, size_t i) {
    return i < tokens.size() && tokens[i].kind == RoughToken::Kind::word;
}

// Matching close brace index for the open brace at `open`, or npos.
size_t match_brace(const std::vector<RoughToken>& tokens, size_t open) {
    int depth = 0;
    for (size_t i = open; i < tokens.size(); ++i) {
        if (tokens[i].kind != RoughToken::Kind::punct) continue;
        if (tokens[i].text == "{") ++depth;
        if (tokens[i].text == "}" && --depth == 0) return i;
    }
    return std::string_view::npos;
}

// Walks annotation/modifier/javadoc tokens backwards from `index` (exclusive);
// returns the first token index of the declaration prefix.
size_t backtrack_prefix(const std::vector<RoughToken>& tokens, size_t index,
                        size_t lower_bound) {
    size_t start = index;
    size_t j = index;
    while (j > lower_bound) {
        size_t k = j - 1;
        const RoughToken& t = tokens[k];
        if (t.kind == RoughToken::Kind::comment) {
            start = k;
            j = k;
            continue;
        }
        if (t.kind == RoughToken::Kind::word) {
            static const std::unordered_set<std::string_view> kModifiers = {
                "public", "private", "protected", "static",   "final",
                "abstract", "sealed", "strictfp", "default",  "native",
                "synchronized", "transient", "volatile"};
            if (kModifiers.count(t.text)) {
                start = k;
                j = k;
                continue;
            }
            // annotation name directly preceded by '@'
            if (k > lower_bound && is_punct(tokens, k - 1, "@")) {
                start = k - 1;
                j = k - 1;
                continue;
            }
        }
        if (t.kind == RoughToken::Kind::punct && t.text == ")") {
            // possible annotation argument list @Name(...)
            int depth = 0;
            size_t m = k;
            while (true) {
                if (is_punct(tokens, m, ")")) ++depth;
                if (is_punct(tokens, m, "(") && --depth == 0) break;
                if (m == lower_bound) { depth = -1; break; }
                --m;
            }
            if (depth == 0 && m >= lower_bound + 2 && is_word(tokens, m - 1) &&
                is_punct(tokens, m - 2, "@")) {
                start = m - 2;
                j = m - 2;
                continue;
            }
        }
        break;
    }
    return start;
}

struct BlockPartition {
    std::vector<std::pair<size_t, size_t>> methods; // byte ranges
    std::vector<std::pair<size_t, size_t>> classes;
    std::vector<std::pair<size_t, size_t>> others;
};

// True when tokens starting right after a type keyword look like
// `Name <...>? (extends|implements|permits ...)? {`.
size_t type_body_open(const std::vector<RoughToken>& tokens, size_t kw) {
    size_t i = kw + 1;
    if (!is_word(tokens, i)) return std::string_view::npos;
    ++i;
    if (is_punct(tokens, i, "<")) {
        int depth = 0;
        while (i < tokens.size()) {
            if (is_punct(tokens, i, "<")) ++depth;
            if (is_punct(tokens, i, ">") && --depth == 0) { ++i; break; }
            ++i;
        }
    }
    if (is_punct(tokens, i, "(")) { // record header
        int depth = 0;
        while (i < tokens.size()) {
            if (is_punct(tokens, i, "(")) ++depth;
            if (is_punct(tokens, i, ")") && --depth == 0) { ++i; break; }
            ++i;
        }
    }
    while (i < tokens.size()) {
        if (is_punct(tokens, i, "{")) return i;
        const RoughToken& t = tokens[i];
        bool joiner = t.kind == RoughToken::Kind::word
                          ? (t.text == "extends" || t.text == "implements" ||
                             t.text == "permits" || !kStatementWords.count(t.text))
                          : (t.text == "," || t.text == "." || t.text == "<" ||
                             t.text == ">" || t.text == "&" || t.text == "@");
        if (!joiner) return std::string_view::npos;
        // A bare word is only acceptable while chaining type names; prose
        // sentences fail on the first disallowed punct (usually '.') or the
        // missing '{'.
        ++i;
        if (i - kw > 40) return std::string_view::npos;
    }
    return std::string_view::npos;
}

BlockPartition partition_block(std::string_view text) {
    std::vector<RoughToken> tokens = rough_scan(text);
    BlockPartition out;
    size_t flush_byte = 0; // start of unclassified residue
    size_t i = 0;
    int brace_depth = 0;
    int paren_depth = 0;
    size_t segment_start_tok = 0; // lower bound for prefix backtracking

    auto flush_before = [&](size_t fragment_begin) {
        std::string residue = strings::trim(
            std::string(text.substr(flush_byte, fragment_begin - flush_byte)));
        if (!residue.empty()) out.others.push_back({flush_byte, fragment_begin});
    };

    while (i < tokens.size()) {
        const RoughToken& t = tokens[i];
        // depth as of just before this token, so '(' and '{' can open a
        // declaration they themselves introduce
        bool top = brace_depth == 0 && paren_depth == 0;

        // Type declarations.
        if (top && t.kind == RoughToken::Kind::word && kTypeKeywords.count(t.text)) {
            size_t open = type_body_open(tokens, i);
            if (open != std::string_view::npos) {
                size_t close = match_brace(tokens, open);
                if (close != std::string_view::npos) {
                    size_t begin_tok = backtrack_prefix(tokens, i, segment_start_tok);
                    size_t begin = std::max(tokens[begin_tok].begin, flush_byte);
                    flush_before(begin);
                    out.classes.push_back({begin, tokens[close].end});
                    flush_byte = tokens[close].end;
                    i = close + 1;
                    segment_start_tok = i;
                    brace_depth = paren_depth = 0;
                    continue;
                }
            }
        }

        // Callable declarations: identifier followed by a parameter list.
        if (top && t.kind == RoughToken::Kind::punct && t.text == "(" && i > 0 &&
            is_word(tokens, i - 1) && !kReservedNonName.count(tokens[i - 1].text)) {
            size_t name_tok = i - 1;
            size_t prefix_begin = name_tok;
            size_t j = name_tok;
            while (j > segment_start_tok) {
                const RoughToken& p = tokens[j - 1];
                bool accept = false;
                if (p.kind == RoughToken::Kind::word)
                    accept = !kStatementWords.count(p.text);
                else if (p.kind == RoughToken::Kind::comment)
                    accept = true;
                else
                    accept = p.text == "<" || p.text == ">" || p.text == "," ||
                             p.text == "[" || p.text == "]" || p.text == "@" ||
                             p.text == "?" || p.text == "&";
                if (!accept) break;
                --j;
                prefix_begin = j;
            }
            size_t word_count = 0;
            for (size_t k = prefix_begin; k <= name_tok; ++k)
                if (tokens[k].kind == RoughToken::Kind::word) ++word_count;
            bool blocked_by_new =
                prefix_begin > 0 && is_word(tokens, prefix_begin - 1) &&
                (tokens[prefix_begin - 1].text == "new" || tokens[prefix_begin - 1].text == "throw" ||
                 tokens[prefix_begin - 1].text == "return");

            // arguments end
            int depth = 0;
            size_t close_paren = std::string_view::npos;
            for (size_t k = i; k < tokens.size(); ++k) {
                if (is_punct(tokens, k, "(")) ++depth;
                if (is_punct(tokens, k, ")") && --depth == 0) {
                    close_paren = k;
                    break;
                }
            }
            if (close_paren != std::string_view::npos && !blocked_by_new) {
                // skip throws clause and annotations to the body or ';'
                size_t k = close_paren + 1;
                bool valid_tail = true;
                while (k < tokens.size() && !is_punct(tokens, k, "{") &&
                       !is_punct(tokens, k, ";")) {
                    const RoughToken& tail = tokens[k];
                    bool joiner =
                        tail.kind == RoughToken::Kind::word
                            ? (tail.text == "throws" || !kStatementWords.count(tail.text))
                            : tail.kind == RoughToken::Kind::comment ||
                                  (tail.text == "," || tail.text == "." || tail.text == "@" ||
                                   tail.text == "<" || tail.text == ">");
                    if (!joiner || k - close_paren > 30) {
                        valid_tail = false;
                        break;
                    }
                    ++k;
                }
                if (k >= tokens.size()) valid_tail = false;
                bool with_body = valid_tail && is_punct(tokens, k, "{");
                bool header_only = valid_tail && is_punct(tokens, k, ";");
                bool plausible = word_count >= 2 || (word_count == 1 && with_body);
                if (valid_tail && plausible && (with_body || header_only)) {
                    size_t end_tok;
                    if (with_body) {
                        end_tok = match_brace(tokens, k);
                    } else {
                        end_tok = k;
                    }
                    if (end_tok != std::string_view::npos) {
                        size_t begin_tok =
                            backtrack_prefix(tokens, prefix_begin, segment_start_tok);
                        size_t begin = std::max(tokens[begin_tok].begin, flush_byte);
                        flush_before(begin);
                        out.methods.push_back({begin, tokens[end_tok].end});
                        flush_byte = tokens[end_tok].end;
                        i = end_tok + 1;
                        segment_start_tok = i;
                        brace_depth = paren_depth = 0;
                        continue;
                    }
                }
            }
        }
        if (t.kind == RoughToken::Kind::punct) {
            if (t.text == "{") ++brace_depth;
            if (t.text == "}") brace_depth = std::max(0, brace_depth - 1);
            if (t.text == "(") ++paren_depth;
            if (t.text == ")") paren_depth = std::max(0, paren_depth - 1);
            if (t.text == ";" || t.text == "{" || t.text == "}")
                segment_start_tok = i + 1;
        }
        ++i;
    }
    if (flush_byte < text.size()) {
        std::string residue = strings::trim(std::string(text.substr(flush_byte)));
        if (!residue.empty()) out.others.push_back({flush_byte, text.size()});
    }
    return out;
}

struct Segment {
    bool fenced;
    size_t begin;
    size_t end;
};

// Fence boundaries: lines that start with ``` (language tag allowed).
std::vector<Segment> split_fences(const std::string& raw) {
    std::vector<Segment> segments;
    size_t pos = 0;
    bool in_fence = false;
    size_t segment_begin = 0;
    while (pos <= raw.size()) {
        size_t line_end = raw.find('\n', pos);
        if (line_end == std::string::npos) line_end = raw.size();
        std::string_view line(raw.data() + pos, line_end - pos);
        std::string trimmed = strings::trim(line);
        if (strings::starts_with(trimmed, "```")) {
            if (pos > segment_begin)
                segments.push_back({in_fence, segment_begin, pos});
            in_fence = !in_fence;
            segment_begin = line_end + (line_end < raw.size() ? 1 : 0);
        }
        if (line_end == raw.size()) break;
        pos = line_end + 1;
    }
    if (segment_begin < raw.size())
        segments.push_back({in_fence, segment_begin, raw.size()});
    return segments;
}

std::string strip_one_trailing_newline(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

} // namespace

ExtractedCode extract(const std::string& raw_text) {
    ExtractedCode out;
    if (strings::trim(raw_text).empty()) return out;

    std::vector<Segment> segments = split_fences(raw_text);
    bool any_fence = std::any_of(segments.begin(), segments.end(),
                                 [](const Segment& s) { return s.fenced; });

    for (const Segment& segment : segments) {
        std::string_view text(raw_text.data() + segment.begin,
                              segment.end - segment.begin);
        bool treat_as_code = segment.fenced;
        if (!any_fence) {
            // Unfenced output: code only if it tokenizes as Java outright.
            treat_as_code = java::tokenize(text).ok();
        }
        if (!treat_as_code) {
            std::string prose = strings::trim(std::string(text));
            if (!prose.empty()) out.others.push_back(std::move(prose));
            continue;
        }
        BlockPartition partition = partition_block(text);
        for (auto [begin, end] : partition.methods)
            out.methods.push_back(
                strip_one_trailing_newline(std::string(text.substr(begin, end - begin))));
        for (auto [begin, end] : partition.classes)
            out.classes.push_back(
                strip_one_trailing_newline(std::string(text.substr(begin, end - begin))));
        for (auto [begin, end] : partition.others) {
            std::string prose = strings::trim(std::string(text.substr(begin, end - begin)));
            if (!prose.empty()) out.others.push_back(std::move(prose));
        }
    }
    return out;
}

std::string fragment_name(const std::string& fragment, corpus::TargetKind kind) {
    std::vector<RoughToken> tokens = rough_scan(fragment);
    if (kind == corpus::TargetKind::clazz) {
        for (size_t i = 0; i + 1 < tokens.size(); ++i)
            if (tokens[i].kind == RoughToken::Kind::word && kTypeKeywords.count(tokens[i].text) &&
                is_word(tokens, i + 1))
                return std::string(tokens[i + 1].text);
        return {};
    }
    int brace_depth = 0;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i].kind == RoughToken::Kind::punct) {
            if (tokens[i].text == "{") ++brace_depth;
            if (tokens[i].text == "}") --brace_depth;
        }
        if (brace_depth == 0 && is_punct(tokens, i + 1, "(") &&
            tokens[i].kind == RoughToken::Kind::word &&
            !kReservedNonName.count(tokens[i].text))
            return std::string(tokens[i].text);
    }
    return {};
}

PrimaryFragment primary_fragment(const ExtractedCode& extracted,
                                 corpus::TargetKind target_kind,
                                 const std::string& target_name) {
    const std::vector<std::string>& pool =
        target_kind == corpus::TargetKind::method ? extracted.methods : extracted.classes;
    if (pool.empty())
        throw MissingFragmentError(std::string("no ") +
                                   corpus::target_kind_name(target_kind) +
                                   " fragment in extracted output");

    PrimaryFragment result;
    std::string wanted = target_name;
    size_t paren = wanted.find('(');
    if (paren != std::string::npos) {
        std::string head = strings::trim(wanted.substr(0, paren));
        size_t sep = head.find_last_of(" \t>");
        wanted = sep == std::string::npos ? head : head.substr(sep + 1);
    }
    if (!wanted.empty()) {
        for (const std::string& fragment : pool) {
            if (fragment_name(fragment, target_kind) == wanted) {
                result.text = fragment;
                return result;
            }
        }
        result.warnings.push_back("no fragment named '" + wanted +
                                  "'; falling back to the first " +
                                  corpus::target_kind_name(target_kind));
    }
    result.text = pool.front();
    return result;
}

std::string join(const ExtractedCode& extracted) {
    // Code fragments are re-fenced one per block and consecutive prose chunks
    // are kept apart by an empty fence, so extraction of the result rebuilds
    // the same partition.
    std::string out;
    bool last_was_prose = false;
    auto append = [&](const std::string& piece, bool prose) {
        if (!out.empty()) out += "\n";
        if (prose && last_was_prose) out += "```\n```\n";
        if (prose) {
            out += piece;
        } else {
            out += "```java\n" + piece + "\n```";
        }
        last_was_prose = prose;
    };
    for (const auto& piece : extracted.methods) append(piece, false);
    for (const auto& piece : extracted.classes) append(piece, false);
    for (const auto& piece : extracted.others) append(piece, true);
    return out;
}

} // namespace reflab::extract
