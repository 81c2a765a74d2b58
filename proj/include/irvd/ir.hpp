#pragma once

#include <string>
#include <vector>

namespace irvd::ir {

/// One function extracted from a textual LLVM IR module. Definitions carry
/// the lines between the braces; declarations have an empty body.
struct IrFunction {
    std::string name;
    std::vector<std::string> body_lines;
    bool is_definition = false;
};

/// A decompiled module: the functions of one IR text file, in source order.
struct IrModule {
    std::string source_path;
    std::vector<IrFunction> functions;

    bool has_definition(const std::string& name) const;
    bool has_declaration(const std::string& name) const;
};

/// Splits RetDec-style textual LLVM IR into functions.
///
/// `define ... @name(...) { ... }` blocks become definitions whose body is
/// the lines strictly between the braces; `declare ... @name(...)` lines
/// become declarations. Anything outside function blocks (globals, metadata,
/// comments) is skipped. Throws ParseError with a line number on unbalanced
/// braces or a `define` without a body.
IrModule parse_module(const std::string& ir_text, const std::string& source_path = "");

/// Reads a file and parses it. Throws UserError if unreadable.
IrModule parse_module_file(const std::string& path);

}  // namespace irvd::ir
