#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "golden_ir.hpp"
#include "irvd/common.hpp"
#include "irvd/ir.hpp"
#include "irvd/tokenize.hpp"

using namespace irvd;

namespace {

const ir::IrFunction& find_definition(const ir::IrModule& module, const std::string& name) {
    for (const auto& fn : module.functions)
        if (fn.is_definition && fn.name == name) return fn;
    throw std::runtime_error("missing definition " + name);
}

tok::TokenStream tokens_of(const char* ir_text, const char* fn_name) {
    ir::IrModule module = ir::parse_module(ir_text, "test.ll");
    return tok::standardize_function(find_definition(module, fn_name), module);
}

}  // namespace

TEST_CASE("module parsing splits definitions and declarations") {
    const char* text = R"(declare i32 @printf(i8*, ...)

define void @f() {
  %a = alloca i32
  store i32 1, i32* %a
  ret void
}
)";
    ir::IrModule m = ir::parse_module(text);
    REQUIRE(m.functions.size() == 2);
    CHECK(m.functions[0].name == "printf");
    CHECK_FALSE(m.functions[0].is_definition);
    CHECK(m.functions[0].body_lines.empty());
    CHECK(m.functions[1].name == "f");
    CHECK(m.functions[1].is_definition);
    // The body is the lines strictly between the braces.
    REQUIRE(m.functions[1].body_lines.size() == 3);
    CHECK(m.functions[1].body_lines[0] == "  %a = alloca i32");
    CHECK(m.has_definition("f"));
    CHECK_FALSE(m.has_definition("printf"));
    CHECK(m.has_declaration("printf"));
}

TEST_CASE("empty input parses to an empty module") {
    CHECK(ir::parse_module("").functions.empty());
    CHECK(ir::parse_module("; only a comment\n\n").functions.empty());
}

TEST_CASE("global definitions and metadata outside functions are skipped") {
    const char* text = R"(@msg = constant [4 x i8] c"hi\0A\00"
!0 = !{i32 1}

define void @f() {
  ret void
})";
    ir::IrModule m = ir::parse_module(text);
    REQUIRE(m.functions.size() == 1);
    CHECK(m.functions[0].name == "f");
}

TEST_CASE("structural errors carry line numbers") {
    CHECK_THROWS_AS(ir::parse_module("define void @f() {\n  ret void\n"), ParseError);
    try {
        ir::parse_module("define void @f() {\n  ret void\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);  // end of input
        CHECK(std::string(e.what()).find("unbalanced") != std::string::npos);
    }
    // define with no opening brace at all
    CHECK_THROWS_AS(ir::parse_module("define void @f()\n"), ParseError);
    // nested define before the closing brace
    CHECK_THROWS_AS(ir::parse_module("define void @f() {\ndefine void @g() {\n}\n}"),
                    ParseError);
    // '}' with no open function
    CHECK_THROWS_AS(ir::parse_module("}\n"), ParseError);
    // empty body
    CHECK_THROWS_AS(ir::parse_module("define void @f() {\n}\n"), ParseError);
    // duplicate definition
    CHECK_THROWS_AS(
        ir::parse_module("define void @f() {\n ret void\n}\ndefine void @f() {\n ret void\n}"),
        ParseError);
}

TEST_CASE("quoted function names parse") {
    ir::IrModule m = ir::parse_module("define void @\"odd name\"() {\n  ret void\n}");
    REQUIRE(m.functions.size() == 1);
    CHECK(m.functions[0].name == "odd name");
}

TEST_CASE("callee classification") {
    const char* text = R"(declare void @memcpy(i8*, i8*, i64)

define void @local_fn() {
  ret void
})";
    ir::IrModule m = ir::parse_module(text);
    CHECK(tok::classify_callee("memcpy", m) == tok::CalleeKind::External);
    CHECK(tok::classify_callee("local_fn", m) == tok::CalleeKind::Local);
    CHECK(tok::classify_callee("never_seen", m) == tok::CalleeKind::External);
}

TEST_CASE("numeric literal grammar") {
    CHECK(tok::is_numeric_literal("25"));
    CHECK(tok::is_numeric_literal("-1"));
    CHECK(tok::is_numeric_literal("7"));
    CHECK(tok::is_numeric_literal("3.14"));
    CHECK(tok::is_numeric_literal("2.5e-3"));
    CHECK(tok::is_numeric_literal("1e5"));
    CHECK(tok::is_numeric_literal("1E+9"));
    CHECK(tok::is_numeric_literal("0x1F"));
    CHECK(tok::is_numeric_literal("0XAB"));
    CHECK(tok::is_numeric_literal("-0xff"));
    CHECK(tok::is_numeric_literal("0xK4000C9"));

    CHECK_FALSE(tok::is_numeric_literal(""));
    CHECK_FALSE(tok::is_numeric_literal("-"));
    CHECK_FALSE(tok::is_numeric_literal("i32"));
    CHECK_FALSE(tok::is_numeric_literal("0x"));
    CHECK_FALSE(tok::is_numeric_literal("0xG1"));
    CHECK_FALSE(tok::is_numeric_literal("5."));
    CHECK_FALSE(tok::is_numeric_literal(".5"));
    CHECK_FALSE(tok::is_numeric_literal("1e"));
    CHECK_FALSE(tok::is_numeric_literal("1e+"));
    CHECK_FALSE(tok::is_numeric_literal("12a"));
}

TEST_CASE("literal splitting round-trips and rejects non-literals") {
    CHECK(tok::split_numeric_literal("25") == std::vector<std::string>{"2", "5"});
    CHECK(tok::split_numeric_literal("-1") == std::vector<std::string>{"-", "1"});
    CHECK(tok::split_numeric_literal("7") == std::vector<std::string>{"7"});
    for (const char* lit : {"1024", "-3.5", "2.5e-3", "0x1F", "0xK4000C9"}) {
        std::string joined;
        for (const std::string& t : tok::split_numeric_literal(lit)) {
            CHECK(t.size() == 1);
            joined += t;
        }
        CHECK(joined == lit);
    }
    CHECK_THROWS_AS(tok::split_numeric_literal("i32"), std::invalid_argument);
    CHECK_THROWS_AS(tok::split_numeric_literal(""), std::invalid_argument);
}

TEST_CASE("golden token streams") {
    for (const golden::GoldenCase& c : golden::cases()) {
        CAPTURE(c.name);
        tok::TokenStream stream = tokens_of(c.ir, c.function);
        CHECK(stream.tokens == c.tokens);
        CHECK(stream.function_name == c.function);
        CHECK(stream.source_path == "test.ll");
    }
}

TEST_CASE("standardization is deterministic") {
    for (const golden::GoldenCase& c : golden::cases()) {
        tok::TokenStream a = tokens_of(c.ir, c.function);
        tok::TokenStream b = tokens_of(c.ir, c.function);
        CHECK(a.tokens == b.tokens);
    }
}

TEST_CASE("renaming tables are dense, first-occurrence ordered, and disjoint") {
    const char* text = R"(define void @f() {
start:
  %a = load i32, i32* @g1, align 4
  %b = add i32 %a, %a
  store i32 %b, i32* @g2, align 4
  br label %done
done:
  ret void
})";
    ir::IrModule m = ir::parse_module(text);
    tok::SymbolTable symbols;
    tok::TokenStream stream = tok::standardize_function(m.functions[0], m, symbols);

    CHECK(symbols.local_vars == std::map<std::string, int>{{"a", 1}, {"b", 2}});
    CHECK(symbols.globals == std::map<std::string, int>{{"g1", 1}, {"g2", 2}});
    CHECK(symbols.labels == std::map<std::string, int>{{"start", 1}, {"done", 2}});

    // Dense counters 1..k per namespace.
    for (const auto* table : {&symbols.local_vars, &symbols.globals, &symbols.labels}) {
        std::set<int> ids;
        for (const auto& [name, id] : *table) ids.insert(id);
        REQUIRE(!ids.empty());
        CHECK(*ids.begin() == 1);
        CHECK(*ids.rbegin() == static_cast<int>(ids.size()));
    }

    // Bijection: equal placeholders appear exactly where the source
    // identifier repeats.
    std::size_t var1 = std::count(stream.tokens.begin(), stream.tokens.end(), "VAR_1");
    CHECK(var1 == 3);  // %a defined once, read twice
}

TEST_CASE("EOL count equals non-empty code lines") {
    const char* text = "define void @f() {\n"
                       "  %a = alloca i32\n"
                       "\n"
                       "  ; pure comment\n"
                       "  store i32 7, i32* %a\n"
                       "  ret void\n"
                       "}";
    ir::IrModule m = ir::parse_module(text);
    tok::TokenStream stream = tok::standardize_function(m.functions[0], m);
    std::size_t eol = std::count(stream.tokens.begin(), stream.tokens.end(), "EOL");
    CHECK(eol == 3);
    CHECK(stream.tokens.back() == "EOL");
}

TEST_CASE("standardizing a declaration is a contract violation") {
    ir::IrModule m = ir::parse_module("declare void @memcpy(i8*, i8*, i64)\n");
    CHECK_THROWS_AS(tok::standardize_function(m.functions[0], m), std::invalid_argument);
}

TEST_CASE("file-name metadata convention") {
    tok::FileMeta meta = tok::metadata_from_filename("CWE121__tc_0001__bad.ll");
    REQUIRE(meta.cwe_id.has_value());
    CHECK(*meta.cwe_id == 121);
    REQUIRE(meta.flaw_label.has_value());
    CHECK(*meta.flaw_label == tok::FlawLabel::Bad);

    meta = tok::metadata_from_filename("corpus/sub/CWE78__x__good.ll");
    CHECK(*meta.cwe_id == 78);
    CHECK(*meta.flaw_label == tok::FlawLabel::Good);

    meta = tok::metadata_from_filename("cwe78__x__good.ll");
    CHECK(*meta.cwe_id == 78);

    // Extra separators: the label is the last part.
    meta = tok::metadata_from_filename("CWE590__a__b__bad.ll");
    CHECK(*meta.cwe_id == 590);
    CHECK(*meta.flaw_label == tok::FlawLabel::Bad);

    CHECK_FALSE(tok::metadata_from_filename("random.ll").cwe_id.has_value());
    CHECK_FALSE(tok::metadata_from_filename("random.ll").flaw_label.has_value());
    CHECK_FALSE(tok::metadata_from_filename("CWE121__bad.ll").cwe_id.has_value());
    CHECK_FALSE(tok::metadata_from_filename("CWEX__x__bad.ll").cwe_id.has_value());
    CHECK_FALSE(tok::metadata_from_filename("CWE121__x__fine.ll").flaw_label.has_value());
}

TEST_CASE("flaw label round trip") {
    CHECK(tok::to_string(tok::FlawLabel::Good) == "good");
    CHECK(tok::to_string(tok::FlawLabel::Bad) == "bad");
    CHECK(tok::flaw_from_string("good") == tok::FlawLabel::Good);
    CHECK(tok::flaw_from_string("bad") == tok::FlawLabel::Bad);
    CHECK_FALSE(tok::flaw_from_string("Good").has_value());
    CHECK_FALSE(tok::flaw_from_string("").has_value());
}
