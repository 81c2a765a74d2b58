#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "irvd/ir.hpp"

namespace irvd::tok {

enum class FlawLabel { Good, Bad };

enum class CalleeKind { Local, External };

/// The end-of-line marker emitted after each consumed code line.
inline constexpr const char* kEol = "EOL";
/// The fixed placeholder replacing calls to locally defined functions.
inline constexpr const char* kFun = "FUN";

/// Standardized token stream of one function, with corpus provenance.
struct TokenStream {
    std::vector<std::string> tokens;
    std::string function_name;
    std::optional<int> cwe_id;
    std::optional<FlawLabel> flaw_label;
    std::string source_path;
};

/// Identifier renaming state built while standardizing one function.
/// Counters are dense from 1 in first-occurrence order and the three
/// placeholder namespaces are disjoint.
struct SymbolTable {
    std::map<std::string, int> local_vars;
    std::map<std::string, int> globals;
    std::map<std::string, int> labels;
    std::set<std::string> defined_functions;
};

/// Local iff `name` is defined in the module; declarations and names that
/// appear nowhere are External.
CalleeKind classify_callee(const std::string& name, const ir::IrModule& module);

/// True if the lexeme matches the numeric-literal grammar handled by the
/// standardizer: optional leading '-', decimal digits with optional fraction
/// and exponent (sign allowed), or a 0x hex form in either letter case.
bool is_numeric_literal(std::string_view lexeme);

/// Splits a numeric literal into one single-character token per character.
/// Concatenating the result reproduces the input exactly. Throws
/// std::invalid_argument on a lexeme that is not a numeric literal.
std::vector<std::string> split_numeric_literal(const std::string& lexeme);

/// Applies the standardization rules to one function definition:
/// locals become VAR_n, globals GVAR_n, labels LBL_n (numbered by first
/// occurrence, counters reset per function), calls to locally defined
/// functions become FUN, external callees keep their verbatim name,
/// standalone numeric literals are split into per-character tokens, and an
/// EOL token closes every non-empty code line. Everything else (opcodes,
/// type keywords, punctuation) passes through as single tokens.
TokenStream standardize_function(const ir::IrFunction& fn, const ir::IrModule& module);

/// Same, also exposing the renaming table for inspection.
TokenStream standardize_function(const ir::IrFunction& fn, const ir::IrModule& module,
                                 SymbolTable& symbols_out);

/// Provenance parsed from the documented file-name convention
/// `<CWE>__<testcase>__<good|bad>.ll`; empty optionals when the name does
/// not follow it.
struct FileMeta {
    std::optional<int> cwe_id;
    std::optional<FlawLabel> flaw_label;
};
FileMeta metadata_from_filename(const std::string& filename);

std::string to_string(FlawLabel label);
std::optional<FlawLabel> flaw_from_string(const std::string& s);

}  // namespace irvd::tok
