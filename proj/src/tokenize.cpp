#include "irvd/tokenize.hpp"

#include <cctype>
#include <stdexcept>

#include "irvd/common.hpp"

namespace irvd::tok {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '$' || c == '-';
}

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

bool is_hex_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f') ||
           (c >= 'A' && c <= 'F');
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') in_string = !in_string;
        if (c == ';' && !in_string) return line.substr(0, i);
    }
    return line;
}

// A line of the form `name:` (trailing comment already stripped) defines a
// basic-block label. RetDec names blocks like `dec_label_pc_401000`.
std::optional<std::string> label_definition(const std::string& code) {
    std::size_t i = 0;
    while (i < code.size() && std::isspace(static_cast<unsigned char>(code[i]))) ++i;
    std::size_t b = i;
    while (i < code.size() && is_ident_char(code[i])) ++i;
    if (i == b || i >= code.size() || code[i] != ':') return std::nullopt;
    std::size_t rest = i + 1;
    while (rest < code.size() && std::isspace(static_cast<unsigned char>(code[rest]))) ++rest;
    if (rest != code.size()) return std::nullopt;
    return code.substr(b, i - b);
}

struct Lexeme {
    enum Kind { Word, LocalRef, GlobalRef, Number, Punct, Atom } kind;
    std::string text;  // for refs: the name without the sigil
};

// Splits one comment-free line into raw lexemes. Whitespace separates
// lexemes and is dropped.
std::vector<Lexeme> lex_line(const std::string& code) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    const std::size_t n = code.size();
    while (i < n) {
        char c = code[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '%' || c == '@') {
            Lexeme::Kind kind = (c == '%') ? Lexeme::LocalRef : Lexeme::GlobalRef;
            ++i;
            std::string name;
            if (i < n && code[i] == '"') {
                std::size_t close = code.find('"', i + 1);
                if (close == std::string::npos) close = n - 1;
                name = code.substr(i + 1, close - i - 1);
                i = close + 1;
            } else {
                std::size_t b = i;
                while (i < n && is_ident_char(code[i])) ++i;
                name = code.substr(b, i - b);
            }
            if (name.empty()) {
                out.push_back({Lexeme::Punct, std::string(1, c)});
            } else {
                out.push_back({kind, name});
            }
            continue;
        }
        // String constants (c"..." or bare "...") stay one atomic token.
        if (c == '"' || (c == 'c' && i + 1 < n && code[i + 1] == '"')) {
            std::size_t start = i;
            i = (c == 'c') ? i + 2 : i + 1;
            while (i < n && code[i] != '"') ++i;
            if (i < n) ++i;
            out.push_back({Lexeme::Atom, code.substr(start, i - start)});
            continue;
        }
        if (is_word_start(c)) {
            std::size_t b = i;
            while (i < n && is_word_char(code[i])) ++i;
            out.push_back({Lexeme::Word, code.substr(b, i - b)});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(code[i + 1])))) {
            std::size_t b = i;
            if (code[i] == '-') ++i;
            if (i + 1 < n && code[i] == '0' && (code[i + 1] == 'x' || code[i + 1] == 'X')) {
                i += 2;
                // LLVM fp80/fp128 payloads carry a kind letter after 0x.
                if (i < n && (code[i] == 'K' || code[i] == 'L' || code[i] == 'M' ||
                              code[i] == 'H' || code[i] == 'R'))
                    ++i;
                while (i < n && is_hex_digit(code[i])) ++i;
            } else {
                while (i < n && std::isdigit(static_cast<unsigned char>(code[i]))) ++i;
                if (i + 1 < n && code[i] == '.' &&
                    std::isdigit(static_cast<unsigned char>(code[i + 1]))) {
                    ++i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(code[i]))) ++i;
                }
                if (i < n && (code[i] == 'e' || code[i] == 'E')) {
                    std::size_t save = i;
                    ++i;
                    if (i < n && (code[i] == '+' || code[i] == '-')) ++i;
                    if (i < n && std::isdigit(static_cast<unsigned char>(code[i]))) {
                        while (i < n && std::isdigit(static_cast<unsigned char>(code[i]))) ++i;
                    } else {
                        i = save;
                    }
                }
            }
            std::string lexeme = code.substr(b, i - b);
            // A trailing identifier character means this was not a number
            // after all (e.g. a name starting with a digit); keep the whole
            // run as one atomic token.
            if (i < n && is_ident_char(code[i])) {
                while (i < n && is_ident_char(code[i])) ++i;
                out.push_back({Lexeme::Atom, code.substr(b, i - b)});
            } else if (is_numeric_literal(lexeme)) {
                out.push_back({Lexeme::Number, lexeme});
            } else {
                out.push_back({Lexeme::Atom, lexeme});
            }
            continue;
        }
        out.push_back({Lexeme::Punct, std::string(1, c)});
        ++i;
    }
    return out;
}

int assign_counter(std::map<std::string, int>& table, const std::string& name) {
    auto it = table.find(name);
    if (it != table.end()) return it->second;
    int id = static_cast<int>(table.size()) + 1;
    table.emplace(name, id);
    return id;
}

}  // namespace

CalleeKind classify_callee(const std::string& name, const ir::IrModule& module) {
    return module.has_definition(name) ? CalleeKind::Local : CalleeKind::External;
}

bool is_numeric_literal(std::string_view lexeme) {
    std::size_t i = 0;
    const std::size_t n = lexeme.size();
    if (i < n && lexeme[i] == '-') ++i;
    if (i >= n) return false;
    if (i + 1 < n && lexeme[i] == '0' && (lexeme[i + 1] == 'x' || lexeme[i + 1] == 'X')) {
        i += 2;
        if (i < n && (lexeme[i] == 'K' || lexeme[i] == 'L' || lexeme[i] == 'M' ||
                      lexeme[i] == 'H' || lexeme[i] == 'R'))
            ++i;
        if (i >= n) return false;
        while (i < n && is_hex_digit(lexeme[i])) ++i;
        return i == n;
    }
    if (!std::isdigit(static_cast<unsigned char>(lexeme[i]))) return false;
    while (i < n && std::isdigit(static_cast<unsigned char>(lexeme[i]))) ++i;
    if (i < n && lexeme[i] == '.') {
        ++i;
        if (i >= n || !std::isdigit(static_cast<unsigned char>(lexeme[i]))) return false;
        while (i < n && std::isdigit(static_cast<unsigned char>(lexeme[i]))) ++i;
    }
    if (i < n && (lexeme[i] == 'e' || lexeme[i] == 'E')) {
        ++i;
        if (i < n && (lexeme[i] == '+' || lexeme[i] == '-')) ++i;
        if (i >= n || !std::isdigit(static_cast<unsigned char>(lexeme[i]))) return false;
        while (i < n && std::isdigit(static_cast<unsigned char>(lexeme[i]))) ++i;
    }
    return i == n;
}

std::vector<std::string> split_numeric_literal(const std::string& lexeme) {
    if (!is_numeric_literal(lexeme))
        throw std::invalid_argument("split_numeric_literal: not a numeric literal: '" +
                                    lexeme + "'");
    std::vector<std::string> out;
    out.reserve(lexeme.size());
    for (char c : lexeme) out.emplace_back(1, c);
    return out;
}

TokenStream standardize_function(const ir::IrFunction& fn, const ir::IrModule& module,
                                 SymbolTable& symbols) {
    if (!fn.is_definition)
        throw std::invalid_argument("standardize_function: '" + fn.name +
                                    "' is a declaration");

    symbols = SymbolTable{};
    for (const auto& f : module.functions)
        if (f.is_definition) symbols.defined_functions.insert(f.name);

    // Pre-scan the block-label definitions so that forward references like
    // `br label %lbl` resolve before the label line is reached.
    std::set<std::string> label_names;
    for (const auto& raw : fn.body_lines) {
        if (auto name = label_definition(strip_comment(raw))) label_names.insert(*name);
    }

    TokenStream stream;
    stream.function_name = fn.name;
    stream.source_path = module.source_path;

    for (const auto& raw : fn.body_lines) {
        const std::string code = strip_comment(raw);
        if (trim(code).empty()) continue;

        std::vector<Lexeme> lexemes = lex_line(code);
        if (lexemes.empty()) continue;

        for (std::size_t k = 0; k < lexemes.size(); ++k) {
            const Lexeme& lx = lexemes[k];
            switch (lx.kind) {
                case Lexeme::LocalRef: {
                    const bool after_label_kw =
                        k > 0 && lexemes[k - 1].kind == Lexeme::Word &&
                        lexemes[k - 1].text == "label";
                    if (after_label_kw || label_names.count(lx.text)) {
                        int id = assign_counter(symbols.labels, lx.text);
                        stream.tokens.push_back("LBL_" + std::to_string(id));
                    } else {
                        int id = assign_counter(symbols.local_vars, lx.text);
                        stream.tokens.push_back("VAR_" + std::to_string(id));
                    }
                    break;
                }
                case Lexeme::GlobalRef: {
                    if (symbols.defined_functions.count(lx.text)) {
                        stream.tokens.push_back(kFun);
                    } else if (module.has_declaration(lx.text)) {
                        stream.tokens.push_back(lx.text);
                    } else if (k + 1 < lexemes.size() && lexemes[k + 1].kind == Lexeme::Punct &&
                               lexemes[k + 1].text == "(") {
                        // Call position with no matching definition: external.
                        stream.tokens.push_back(lx.text);
                    } else {
                        int id = assign_counter(symbols.globals, lx.text);
                        stream.tokens.push_back("GVAR_" + std::to_string(id));
                    }
                    break;
                }
                case Lexeme::Word: {
                    // A bare word followed by ':' is a block-label definition.
                    const bool is_label_def = k == 0 && k + 1 < lexemes.size() &&
                                              lexemes[k + 1].kind == Lexeme::Punct &&
                                              lexemes[k + 1].text == ":";
                    if (is_label_def && label_names.count(lx.text)) {
                        int id = assign_counter(symbols.labels, lx.text);
                        stream.tokens.push_back("LBL_" + std::to_string(id));
                    } else {
                        stream.tokens.push_back(lx.text);
                    }
                    break;
                }
                case Lexeme::Number: {
                    // Purely numeric block labels (`42:`) are still labels.
                    const bool is_label_def = k == 0 && k + 1 < lexemes.size() &&
                                              lexemes[k + 1].kind == Lexeme::Punct &&
                                              lexemes[k + 1].text == ":" &&
                                              label_names.count(lx.text) > 0;
                    if (is_label_def) {
                        int id = assign_counter(symbols.labels, lx.text);
                        stream.tokens.push_back("LBL_" + std::to_string(id));
                    } else {
                        for (auto& digit : split_numeric_literal(lx.text))
                            stream.tokens.push_back(std::move(digit));
                    }
                    break;
                }
                case Lexeme::Punct:
                case Lexeme::Atom:
                    stream.tokens.push_back(lx.text);
                    break;
            }
        }
        stream.tokens.push_back(kEol);
    }
    return stream;
}

TokenStream standardize_function(const ir::IrFunction& fn, const ir::IrModule& module) {
    SymbolTable symbols;
    return standardize_function(fn, module, symbols);
}

FileMeta metadata_from_filename(const std::string& filename) {
    FileMeta meta;
    std::string base = filename;
    if (std::size_t slash = base.find_last_of("/\\"); slash != std::string::npos)
        base = base.substr(slash + 1);
    if (std::size_t dot = base.rfind(".ll"); dot != std::string::npos && dot == base.size() - 3)
        base = base.substr(0, dot);

    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = base.find("__", start);
        if (pos == std::string::npos) {
            parts.push_back(base.substr(start));
            break;
        }
        parts.push_back(base.substr(start, pos - start));
        start = pos + 2;
    }
    if (parts.size() < 3) return meta;

    std::string cwe = parts.front();
    if (cwe.rfind("CWE", 0) == 0 || cwe.rfind("cwe", 0) == 0) cwe = cwe.substr(3);
    try {
        std::size_t used = 0;
        int value = std::stoi(cwe, &used);
        if (used == cwe.size() && value > 0) meta.cwe_id = value;
    } catch (const std::exception&) {
    }
    meta.flaw_label = flaw_from_string(parts.back());
    return meta;
}

std::string to_string(FlawLabel label) {
    return label == FlawLabel::Good ? "good" : "bad";
}

std::optional<FlawLabel> flaw_from_string(const std::string& s) {
    if (s == "good") return FlawLabel::Good;
    if (s == "bad") return FlawLabel::Bad;
    return std::nullopt;
}

}  // namespace irvd::tok
