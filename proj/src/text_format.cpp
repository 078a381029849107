#include "text_format.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace fedm::text {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            }
            else {
                ++col;
            }
        }
    };
    auto emit = [&](Tok kind, std::size_t len) {
        out.push_back(Token{kind, std::string(src.substr(i, len)), 0.0, line, col});
        advance(len);
    };

    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j]))
                ++j;
            emit(Tok::ident, j - i);
            continue;
        }
        const bool signed_number = (c == '-' || c == '+') && i + 1 < src.size() && (digit(src[i + 1]) || src[i + 1] == '.');
        if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1])) || signed_number) {
            const std::size_t start = (c == '+') ? i + 1 : i;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(src.data() + start, src.data() + src.size(), value);
            if (ec != std::errc())
                throw ParseError("malformed number", line, col);
            const auto len = static_cast<std::size_t>(ptr - src.data()) - i;
            Token tok{Tok::number, std::string(src.substr(i, len)), value, line, col};
            out.push_back(std::move(tok));
            advance(len);
            continue;
        }
        const char n = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (c) {
        case ':': emit(Tok::colon, 1); break;
        case ',': emit(Tok::comma, 1); break;
        case '(': emit(Tok::lparen, 1); break;
        case ')': emit(Tok::rparen, 1); break;
        case '[': emit(Tok::lbracket, 1); break;
        case ']': emit(Tok::rbracket, 1); break;
        case '{': emit(Tok::lbrace, 1); break;
        case '}': emit(Tok::rbrace, 1); break;
        case '&': emit(Tok::amp, 1); break;
        case '|': emit(Tok::pipe, 1); break;
        case '=': n == '>' ? emit(Tok::arrow, 2) : emit(Tok::equals, 1); break;
        case '>': n == '=' ? emit(Tok::ge, 2) : emit(Tok::gt, 1); break;
        case '<': n == '=' ? emit(Tok::le, 2) : emit(Tok::lt, 1); break;
        default:
            throw ParseError(fmt::format("unexpected character '{}'", c), line, col);
        }
    }
    out.push_back(Token{Tok::end, "", 0.0, line, col});
    return out;
}

std::string_view describe(Tok kind) noexcept
{
    switch (kind) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::colon: return "':'";
    case Tok::comma: return "','";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::equals: return "'='";
    case Tok::amp: return "'&'";
    case Tok::pipe: return "'|'";
    case Tok::arrow: return "'=>'";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::end: return "end of input";
    }
    return "?";
}

const Token& Cursor::peek(std::size_t ahead) const
{
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
}

bool Cursor::accept(Tok kind)
{
    if (!at(kind))
        return false;
    next();
    return true;
}

const Token& Cursor::next()
{
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size())
        ++pos_;
    return t;
}

void Cursor::fail(const Token& at, const std::string& message) const
{
    throw ParseError(message, at.line, at.column);
}

void Cursor::fail_expected(std::string_view what) const
{
    const Token& t = peek();
    const std::string found = t.kind == Tok::ident || t.kind == Tok::number ? fmt::format("'{}'", t.text)
                                                                          : std::string(describe(t.kind));
    fail(t, fmt::format("expected {}, found {}", what, found));
}

const Token& Cursor::expect(Tok kind, std::string_view what)
{
    if (!at(kind))
        fail_expected(what);
    return next();
}

std::string Cursor::expect_ident(std::string_view what)
{
    return expect(Tok::ident, what).text;
}

double Cursor::expect_number(std::string_view what)
{
    return expect(Tok::number, what).number;
}

void Cursor::expect_keyword(std::string_view keyword)
{
    if (!at_ident(keyword))
        fail_expected(fmt::format("'{}'", keyword));
    next();
}

bool Cursor::at_section(std::initializer_list<std::string_view> keywords) const
{
    if (!at(Tok::ident) || peek(1).kind != Tok::colon)
        return false;
    for (auto k : keywords)
        if (peek().text == k)
            return true;
    return false;
}

Atom parse_atom(Cursor& in)
{
    Atom atom;
    atom.variable = in.expect_ident("variable name");
    in.expect(Tok::lparen, "'(' after variable name");
    atom.term = in.expect_ident("term name");
    in.expect(Tok::rparen, "')' closing the atom");
    return atom;
}

namespace {

Conjunction parse_conjunction(Cursor& in)
{
    Conjunction conj;
    const bool grouped = in.accept(Tok::lparen);
    for (;;) {
        if (in.at(Tok::lparen))
            in.fail(in.peek(), "antecedent must be a disjunction of conjunctions (nested group)");
        conj.push_back(parse_atom(in));
        if (!in.accept(Tok::amp))
            break;
    }
    if (grouped) {
        if (in.at(Tok::pipe))
            in.fail(in.peek(), "antecedent must be a disjunction of conjunctions ('|' inside a group)");
        in.expect(Tok::rparen, "'&' or ')'");
    }
    return conj;
}

} // namespace

Dnf parse_dnf(Cursor& in)
{
    Dnf dnf;
    dnf.push_back(parse_conjunction(in));
    while (in.accept(Tok::pipe))
        dnf.push_back(parse_conjunction(in));
    return dnf;
}

std::vector<std::string> parse_ident_list(Cursor& in)
{
    std::vector<std::string> out;
    if (!in.at(Tok::ident))
        return out;
    out.push_back(in.expect_ident("identifier"));
    while (in.accept(Tok::comma))
        out.push_back(in.expect_ident("identifier after ','"));
    return out;
}

LinguisticVariable parse_variable(Cursor& in)
{
    LinguisticVariable v;
    v.name = in.expect_ident("variable name");
    const Token& kind_tok = in.peek();
    const auto kind = parse_variable_kind(in.expect_ident("variable kind (input, internal or output)"));
    if (!kind)
        in.fail(kind_tok, fmt::format("unknown variable kind '{}' (expected input, internal or output)", kind_tok.text));
    v.kind = *kind;

    if (in.accept(Tok::lbracket)) {
        Universe u;
        u.lo = in.expect_number("universe lower bound");
        in.expect(Tok::comma, "','");
        u.hi = in.expect_number("universe upper bound");
        in.expect(Tok::rbracket, "']'");
        v.universe = u;
    }

    in.expect(Tok::lbrace, "'{' opening the term list");
    while (!in.at(Tok::rbrace)) {
        Term t;
        t.name = in.expect_ident("term name");
        if (in.accept(Tok::equals)) {
            in.expect(Tok::lparen, "'(' opening trapezoid breakpoints");
            TrapezoidMF mf;
            mf.a = in.expect_number("breakpoint a");
            in.expect(Tok::comma, "','");
            mf.b = in.expect_number("breakpoint b");
            in.expect(Tok::comma, "','");
            mf.c = in.expect_number("breakpoint c");
            in.expect(Tok::comma, "','");
            mf.d = in.expect_number("breakpoint d");
            in.expect(Tok::rparen, "')'");
            t.mf = mf;
        }
        v.terms.push_back(std::move(t));
        if (!in.accept(Tok::comma))
            break;
    }
    in.expect(Tok::rbrace, "',' or '}'");
    return v;
}

FuzzyRule parse_rule(Cursor& in)
{
    FuzzyRule r;
    r.name = in.expect_ident("rule name");
    const Token& kind_tok = in.peek();
    const auto kind = parse_rule_kind(in.expect_ident("rule kind (FERR or FERD)"));
    if (!kind)
        in.fail(kind_tok, fmt::format("unknown rule kind '{}' (expected FERR or FERD)", kind_tok.text));
    r.kind = *kind;
    in.expect(Tok::colon, "':' after rule kind");
    r.antecedent = parse_dnf(in);
    in.expect(Tok::arrow, "'=>'");
    r.consequents.push_back(parse_atom(in));
    while (in.accept(Tok::comma))
        r.consequents.push_back(parse_atom(in));
    in.expect_keyword("cf");
    in.expect(Tok::equals, "'='");
    r.cf = in.expect_number("certainty factor");
    in.expect_keyword("principles");
    in.expect(Tok::equals, "'='");
    in.expect(Tok::lbracket, "'['");
    r.principles = parse_ident_list(in);
    in.expect(Tok::rbracket, "']'");
    return r;
}

std::string format_number(double value)
{
    return fmt::format("{}", value);
}

std::string render_variable(const LinguisticVariable& v, std::string_view indent)
{
    const bool with_mf = std::any_of(v.terms.begin(), v.terms.end(), [](const Term& t) { return t.mf.has_value(); });
    std::string out = fmt::format("{}{} {}", indent, v.name, to_string(v.kind));
    if (v.universe)
        out += fmt::format(" [{}, {}]", format_number(v.universe->lo), format_number(v.universe->hi));
    if (!with_mf) {
        out += " { ";
        for (std::size_t i = 0; i < v.terms.size(); ++i)
            out += (i ? ", " : "") + v.terms[i].name;
        return out + " }\n";
    }
    out += " {\n";
    for (std::size_t i = 0; i < v.terms.size(); ++i) {
        const auto& t = v.terms[i];
        out += fmt::format("{}  {}", indent, t.name);
        if (t.mf)
            out += fmt::format(" = ({}, {}, {}, {})", format_number(t.mf->a), format_number(t.mf->b),
                format_number(t.mf->c), format_number(t.mf->d));
        out += i + 1 < v.terms.size() ? ",\n" : "\n";
    }
    return out + fmt::format("{}}}\n", indent);
}

std::string render_rule(const FuzzyRule& r)
{
    std::string cons;
    for (std::size_t i = 0; i < r.consequents.size(); ++i)
        cons += (i ? ", " : "") + to_string(r.consequents[i]);
    std::string principles;
    for (std::size_t i = 0; i < r.principles.size(); ++i)
        principles += (i ? ", " : "") + r.principles[i];
    return fmt::format("{} {}: {} => {} cf={} principles=[{}]", r.name, to_string(r.kind), to_string(r.antecedent),
        cons, format_number(r.cf), principles);
}

} // namespace fedm::text
