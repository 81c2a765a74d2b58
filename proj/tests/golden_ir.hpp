#pragma once

// Hand-written IR snippets with hand-derived expected token streams. Each
// expectation was traced manually through the standardization rules; these
// are frozen oracles, not captured output.

#include <string>
#include <vector>

namespace golden {

struct GoldenCase {
    const char* name;
    const char* ir;        // full module text
    const char* function;  // definition whose stream is checked
    std::vector<std::string> tokens;
};

inline const std::vector<GoldenCase>& cases() {
    static const std::vector<GoldenCase> table = {
        {"local variable renaming with digit split",
         R"(define i32 @f() {
  %x = add i32 %x, 25
})",
         "f",
         {"VAR_1", "=", "add", "i32", "VAR_1", ",", "2", "5", "EOL"}},

        {"declared external callee kept verbatim",
         R"(declare void @memcpy(i8*, i8*, i64)

define void @f() {
  call void @memcpy(i8* %d, i8* %s, i64 4)
})",
         "f",
         {"call", "void", "memcpy", "(", "i8", "*", "VAR_1", ",", "i8", "*", "VAR_2", ",",
          "i64", "4", ")", "EOL"}},

        {"label forward reference and reuse",
         R"(define void @f() {
  br label %lbl_1
lbl_1:
  ret void
})",
         "f",
         {"br", "label", "LBL_1", "EOL", "LBL_1", ":", "EOL", "ret", "void", "EOL"}},

        {"global variable renaming is consistent",
         R"(@glob = global i32 0

define i32 @f() {
  %a = load i32, i32* @glob, align 4
  store i32 %a, i32* @glob, align 4
})",
         "f",
         {"VAR_1", "=", "load", "i32", ",", "i32", "*", "GVAR_1", ",", "align", "4", "EOL",
          "store", "i32", "VAR_1", ",", "i32", "*", "GVAR_1", ",", "align", "4", "EOL"}},

        {"locally defined callee becomes FUN",
         R"(define i32 @helper(i32 %n) {
  ret i32 %n
}

define i32 @f() {
  %r = call i32 @helper(i32 7)
})",
         "f",
         {"VAR_1", "=", "call", "i32", "FUN", "(", "i32", "7", ")", "EOL"}},

        {"unknown callee in call position stays verbatim",
         R"(define void @f() {
  call i32 @mystery(i32 1)
})",
         "f",
         {"call", "i32", "mystery", "(", "i32", "1", ")", "EOL"}},

        {"unknown global outside call position becomes GVAR",
         R"(define void @f() {
  store i32 5, i32* @counter, align 4
})",
         "f",
         {"store", "i32", "5", ",", "i32", "*", "GVAR_1", ",", "align", "4", "EOL"}},

        {"counters reset per function",
         R"(define i32 @a() {
  %x = add i32 %y, 1
}

define i32 @b() {
  %p = sub i32 %q, 2
})",
         "b",
         {"VAR_1", "=", "sub", "i32", "VAR_2", ",", "2", "EOL"}},

        {"multi-digit literal splits per character",
         R"(define void @f() {
  store i32 1024, i32* %p, align 8
})",
         "f",
         {"store", "i32", "1", "0", "2", "4", ",", "i32", "*", "VAR_1", ",", "align", "8",
          "EOL"}},

        {"negative literal emits the sign as a token",
         R"(define i32 @f() {
  %x = add i32 %x, -1
})",
         "f",
         {"VAR_1", "=", "add", "i32", "VAR_1", ",", "-", "1", "EOL"}},

        {"float literal splits through the point",
         R"(define double @f() {
  %x = fadd double %y, 3.14
})",
         "f",
         {"VAR_1", "=", "fadd", "double", "VAR_2", ",", "3", ".", "1", "4", "EOL"}},

        {"exponent literal splits sign and digits",
         R"(define double @f() {
  %x = fmul double %x, 2.5e-3
})",
         "f",
         {"VAR_1", "=", "fmul", "double", "VAR_1", ",", "2", ".", "5", "e", "-", "3", "EOL"}},

        {"hex literal splits prefix and digits",
         R"(define void @f() {
  store i64 0x1F, i64* %p
})",
         "f",
         {"store", "i64", "0", "x", "1", "F", ",", "i64", "*", "VAR_1", "EOL"}},

        {"vector type keywords survive whole",
         R"(define void @f() {
  %v = add <4 x i32> %v, %v
})",
         "f",
         {"VAR_1", "=", "add", "<", "4", "x", "i32", ">", "VAR_1", ",", "VAR_1", "EOL"}},

        {"getelementptr punctuation tokens",
         R"(define void @f() {
  %p = getelementptr [4 x i32], [4 x i32]* %arr, i64 0, i64 2
})",
         "f",
         {"VAR_1", "=", "getelementptr", "[", "4", "x", "i32", "]", ",", "[", "4", "x", "i32",
          "]", "*", "VAR_2", ",", "i64", "0", ",", "i64", "2", "EOL"}},

        {"blank lines emit no EOL",
         "define void @f() {\n  %x = alloca i32\n\n  ret void\n}",
         "f",
         {"VAR_1", "=", "alloca", "i32", "EOL", "ret", "void", "EOL"}},

        {"comments are stripped before tokenizing",
         R"(define void @f() {
  ; setup comment
  %x = alloca i32 ; trailing
})",
         "f",
         {"VAR_1", "=", "alloca", "i32", "EOL"}},

        {"string constants stay atomic (spaces included)",
         R"(define void @f() {
  store [6 x i8] c"ab cd\00", [6 x i8]* %b
})",
         "f",
         {"store", "[", "6", "x", "i8", "]", R"(c"ab cd\00")", ",", "[", "6", "x", "i8", "]",
          "*", "VAR_1", "EOL"}},

        {"quoted local identifiers rename like plain ones",
         R"(define void @f() {
  %"my var" = alloca i32
})",
         "f",
         {"VAR_1", "=", "alloca", "i32", "EOL"}},

        {"numeric block labels are labels, not digits",
         R"(define void @f() {
  br label %42
42:
  ret void
})",
         "f",
         {"br", "label", "LBL_1", "EOL", "LBL_1", ":", "EOL", "ret", "void", "EOL"}},

        {"phi incoming blocks resolve as labels",
         R"(define i32 @f(i1 %c) {
entry:
  br i1 %c, label %then, label %exit
then:
  br label %exit
exit:
  %r = phi i32 [ 1, %then ], [ 0, %entry ]
  ret i32 %r
})",
         "f",
         {"LBL_1", ":",     "EOL",   "br",  "i1",  "VAR_1", ",",     "label", "LBL_2", ",",
          "label", "LBL_3", "EOL",   "LBL_2", ":", "EOL",   "br",    "label", "LBL_3", "EOL",
          "LBL_3", ":",     "EOL",   "VAR_2", "=", "phi",   "i32",   "[",     "1",     ",",
          "LBL_2", "]",     ",",     "[",     "0", ",",     "LBL_1", "]",     "EOL",   "ret",
          "i32",   "VAR_2", "EOL"}},

        {"decompiler-style names with dashes",
         R"(define i32 @function_401000() {
dec_label_pc_401000:
  %stack_var_-8 = alloca i32, align 4
  store i32 10, i32* %stack_var_-8, align 4
  ret i32 0
})",
         "function_401000",
         {"LBL_1", ":",   "EOL",   "VAR_1", "=",     "alloca", "i32", ",",     "align", "4",
          "EOL",   "store", "i32", "1",     "0",     ",",      "i32", "*",     "VAR_1", ",",
          "align", "4",     "EOL", "ret",   "i32",   "0",      "EOL"}},

        {"dense counters across instructions",
         R"(define i32 @f(i32 %a, i32 %b) {
  %cmp = icmp slt i32 %a, %b
  %m = select i1 %cmp, i32 %a, i32 %b
  ret i32 %m
})",
         "f",
         {"VAR_1", "=",     "icmp", "slt", "i32",   "VAR_2", ",",     "VAR_3", "EOL",
          "VAR_4", "=",     "select", "i1", "VAR_1", ",",    "i32",   "VAR_2", ",",
          "i32",   "VAR_3", "EOL",  "ret", "i32",   "VAR_4", "EOL"}},

        {"FUN and external in the same function",
         R"(declare i32 @printf(i8*, ...)

define void @helper() {
  ret void
}

define void @f() {
  call void @helper()
  %r = call i32 @printf(i8* %fmt)
})",
         "f",
         {"call", "void", "FUN", "(", ")", "EOL", "VAR_1", "=", "call", "i32", "printf", "(",
          "i8", "*", "VAR_2", ")", "EOL"}},

        {"extended-precision hex payload splits fully",
         R"(define void @f() {
  store x86_fp80 0xK4000C9, x86_fp80* %p
})",
         "f",
         {"store", "x86_fp80", "0", "x", "K", "4", "0", "0", "0", "C", "9", ",", "x86_fp80",
          "*", "VAR_1", "EOL"}},
    };
    return table;
}

}  // namespace golden
