#pragma once

// Lexer and grammar fragments shared by the model and referent text formats.

#include "fedm/model.hpp"

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace fedm::text {

enum class Tok {
    ident,
    number,
    colon,
    comma,
    lparen,
    rparen,
    lbracket,
    rbracket,
    lbrace,
    rbrace,
    equals,
    amp,
    pipe,
    arrow, // =>
    gt,
    ge,
    lt,
    le,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

std::vector<Token> tokenize(std::string_view source);

std::string_view describe(Tok kind) noexcept;

class Cursor {
public:
    explicit Cursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const;
    bool at(Tok kind) const { return peek().kind == kind; }
    bool at_ident(std::string_view text) const { return at(Tok::ident) && peek().text == text; }
    bool accept(Tok kind);
    const Token& next();

    const Token& expect(Tok kind, std::string_view what);
    std::string expect_ident(std::string_view what);
    double expect_number(std::string_view what);
    void expect_keyword(std::string_view keyword);

    /// True at `keyword :` for any of the given keywords.
    bool at_section(std::initializer_list<std::string_view> keywords) const;

    [[noreturn]] void fail(const Token& at, const std::string& message) const;
    [[noreturn]] void fail_expected(std::string_view what) const;

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

Atom parse_atom(Cursor& in);
/// Disjunction of conjunctions; nested groups and `|` inside parentheses are rejected.
Dnf parse_dnf(Cursor& in);
/// `Name kind [lo, hi] { term = (a, b, c, d), ... }`; universe and breakpoints optional.
LinguisticVariable parse_variable(Cursor& in);
/// `Name KIND: antecedent => C(t), ... cf=0.8 principles=[P, ...]`
FuzzyRule parse_rule(Cursor& in);
std::vector<std::string> parse_ident_list(Cursor& in);

std::string format_number(double value);
std::string render_variable(const LinguisticVariable& variable, std::string_view indent);
std::string render_rule(const FuzzyRule& rule);

} // namespace fedm::text
