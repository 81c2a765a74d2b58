#include "irvd/ir.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "irvd/common.hpp"

namespace irvd::ir {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '$' || c == '-';
}

// Extracts the symbol after the first '@' on a define/declare line.
// Quoted names (@"...") keep everything between the quotes.
std::string function_name_on(const std::string& line, std::size_t line_no) {
    std::size_t at = line.find('@');
    if (at == std::string::npos || at + 1 >= line.size())
        throw ParseError("function header without a @name", line_no);
    std::size_t i = at + 1;
    if (line[i] == '"') {
        std::size_t close = line.find('"', i + 1);
        if (close == std::string::npos)
            throw ParseError("unterminated quoted function name", line_no);
        return line.substr(i + 1, close - i - 1);
    }
    std::size_t b = i;
    while (i < line.size() && is_ident_char(line[i])) ++i;
    if (i == b) throw ParseError("empty function name after '@'", line_no);
    return line.substr(b, i - b);
}

std::string strip_comment(const std::string& line) {
    // ';' starts a comment unless inside a "..." string constant.
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') in_string = !in_string;
        if (c == ';' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool starts_with_word(const std::string& s, const char* word) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t n = std::char_traits<char>::length(word);
    if (s.compare(i, n, word) != 0) return false;
    std::size_t after = i + n;
    return after >= s.size() || !is_ident_char(s[after]);
}

}  // namespace

bool IrModule::has_definition(const std::string& name) const {
    return std::any_of(functions.begin(), functions.end(), [&](const IrFunction& f) {
        return f.is_definition && f.name == name;
    });
}

bool IrModule::has_declaration(const std::string& name) const {
    return std::any_of(functions.begin(), functions.end(), [&](const IrFunction& f) {
        return !f.is_definition && f.name == name;
    });
}

IrModule parse_module(const std::string& ir_text, const std::string& source_path) {
    IrModule module;
    module.source_path = source_path;

    std::vector<std::string> lines;
    {
        std::string current;
        std::istringstream in(ir_text);
        while (std::getline(in, current)) lines.push_back(current);
    }

    std::size_t i = 0;
    int top_depth = 0;  // brace depth of skipped module-level constructs
    while (i < lines.size()) {
        const std::size_t line_no = i + 1;
        std::string code = strip_comment(lines[i]);
        if (starts_with_word(code, "declare")) {
            IrFunction fn;
            fn.name = function_name_on(code, line_no);
            fn.is_definition = false;
            module.functions.push_back(std::move(fn));
            ++i;
            continue;
        }
        if (!starts_with_word(code, "define")) {
            // Globals and metadata may carry brace initializers, possibly
            // spanning lines; only a net closing brace is structural garbage.
            bool in_string = false;
            for (char c : code) {
                if (c == '"') in_string = !in_string;
                if (in_string) continue;
                if (c == '{') ++top_depth;
                if (c == '}' && --top_depth < 0)
                    throw ParseError("'}' outside of a function body", line_no);
            }
            ++i;
            continue;
        }

        IrFunction fn;
        fn.name = function_name_on(code, line_no);
        fn.is_definition = true;

        // Find the opening brace; it normally ends the define line itself.
        std::size_t open_line = i;
        while (open_line < lines.size() &&
               strip_comment(lines[open_line]).find('{') == std::string::npos) {
            if (open_line != i && !trim(strip_comment(lines[open_line])).empty())
                throw ParseError("'define' without an opening '{'", open_line + 1);
            ++open_line;
        }
        if (open_line == lines.size())
            throw ParseError("'define' without an opening '{'", lines.size());

        // Collect body lines until the closing brace.
        std::size_t j = open_line + 1;
        bool closed = false;
        for (; j < lines.size(); ++j) {
            std::string body_code = strip_comment(lines[j]);
            std::string t = trim(body_code);
            if (t == "}") {
                closed = true;
                break;
            }
            if (starts_with_word(body_code, "define"))
                throw ParseError("nested 'define' before the enclosing '}'", j + 1);
            fn.body_lines.push_back(lines[j]);
        }
        if (!closed)
            throw ParseError("unbalanced braces: '}' not found before end of input",
                             lines.size());
        if (std::all_of(fn.body_lines.begin(), fn.body_lines.end(), [](const std::string& l) {
                return trim(strip_comment(l)).empty();
            }))
            throw ParseError("'define' with an empty body", open_line + 1);

        for (const auto& existing : module.functions)
            if (existing.name == fn.name && existing.is_definition)
                throw ParseError("duplicate definition of '" + fn.name + "'", line_no);

        module.functions.push_back(std::move(fn));
        i = j + 1;
    }
    return module;
}

IrModule parse_module_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read IR file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_module(buf.str(), path);
}

}  // namespace irvd::ir
