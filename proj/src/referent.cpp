#include "fedm/referent.hpp"

#include "fedm/error.hpp"
#include "fedm/model_io.hpp"
#include "text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace fedm {

std::string_view to_string(Comparator c) noexcept
{
    switch (c) {
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    }
    return "?";
}

bool compare(double value, Comparator c, double threshold) noexcept
{
    switch (c) {
    case Comparator::gt: return value > threshold;
    case Comparator::ge: return value >= threshold;
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    }
    return false;
}

bool ActionBand::contains(double r) const noexcept
{
    const bool above = lo_closed ? r >= lo : r > lo;
    const bool below = hi_closed ? r <= hi : r < hi;
    return above && below;
}

const std::vector<std::string>& Referent::acceptable_actions(double r) const
{
    r = std::clamp(r, 0.0, 1.0);
    for (const auto& b : bands)
        if (b.contains(r))
            return b.actions;
    throw ValidationError(fmt::format("referent '{}': no action band contains risk {}", name, r));
}

std::vector<PrinciplePair> transitive_closure(
    const std::vector<PrinciplePair>& pairs, const std::vector<std::string>& principles)
{
    const std::size_t n = principles.size();
    auto idx = [&](const std::string& p) {
        auto it = std::find(principles.begin(), principles.end(), p);
        if (it == principles.end())
            throw ValidationError(fmt::format("priority names unknown principle '{}'", p));
        return static_cast<std::size_t>(it - principles.begin());
    };
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (const auto& [u, v] : pairs)
        reach[idx(u)][idx(v)] = 1;
    // Warshall.
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j])
                        reach[i][j] = 1;
    std::vector<PrinciplePair> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (reach[i][i])
            throw ValidationError(fmt::format("priority ordering is cyclic through '{}'", principles[i]));
        for (std::size_t j = 0; j < n; ++j)
            if (reach[i][j])
                out.emplace_back(principles[i], principles[j]);
    }
    return out;
}

namespace {

void check_atom(const Referent& r, const std::string& where, const Atom& a)
{
    auto it = std::find_if(
        r.variables.begin(), r.variables.end(), [&](const LinguisticVariable& v) { return v.name == a.variable; });
    if (it == r.variables.end())
        throw ValidationError(fmt::format("referent '{}': {} uses unknown variable '{}'", r.name, where, a.variable));
    if (!it->has_term(a.term))
        throw ValidationError(
            fmt::format("referent '{}': {} uses unknown term {}", r.name, where, to_string(a)));
}

void check_unit(const Referent& r, const std::string& what, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError(fmt::format("referent '{}': {} = {} outside [0,1]", r.name, what, x));
}

} // namespace

void validate_referent(const Referent& r)
{
    if (r.name.empty())
        throw ValidationError("referent has no name");
    check_unit(r, "rho", r.rho);
    check_unit(r, "tau", r.tau);

    std::set<std::string> seen;
    for (const auto& p : r.principles)
        if (!seen.insert(p).second)
            throw ValidationError(fmt::format("referent '{}': duplicate principle '{}'", r.name, p));

    seen.clear();
    for (const auto& v : r.variables) {
        if (!seen.insert(v.name).second)
            throw ValidationError(fmt::format("referent '{}': duplicate variable '{}'", r.name, v.name));
        try {
            validate_variable(v, false);
        }
        catch (const ModelError& e) {
            throw ValidationError(fmt::format("referent '{}': {}", r.name, e.what()));
        }
    }

    // Must already be closed and acyclic.
    if (transitive_closure(r.priority, r.principles).size() != r.priority.size())
        throw ValidationError(fmt::format("referent '{}': priority pairs are not transitively closed", r.name));

    seen.clear();
    for (const auto& rule : r.rules) {
        if (!seen.insert(rule.name).second)
            throw ValidationError(fmt::format("referent '{}': duplicate rule '{}'", r.name, rule.name));
        for (const auto& conj : rule.antecedent)
            for (const auto& a : conj)
                check_atom(r, "rule " + rule.name, a);
        for (const auto& a : rule.consequents)
            check_atom(r, "rule " + rule.name, a);
        check_unit(r, "cf of " + rule.name, rule.cf);
        if (rule.principles.empty())
            throw ValidationError(fmt::format("referent '{}': rule '{}' has no principle", r.name, rule.name));
        for (const auto& p : rule.principles)
            if (std::find(r.principles.begin(), r.principles.end(), p) == r.principles.end())
                throw ValidationError(
                    fmt::format("referent '{}': rule '{}' names unknown principle '{}'", r.name, rule.name, p));
    }

    if (r.bands.empty())
        throw ValidationError(fmt::format("referent '{}': no action bands", r.name));
    for (std::size_t i = 0; i < r.bands.size(); ++i) {
        const auto& b = r.bands[i];
        if (b.actions.empty())
            throw ValidationError(fmt::format("referent '{}': band {} lists no action", r.name, i + 1));
        if (!(b.lo <= b.hi) || (b.lo == b.hi && !(b.lo_closed && b.hi_closed)))
            throw ValidationError(fmt::format("referent '{}': band {} is empty", r.name, i + 1));
        if (i == 0 && !(b.lo == 0.0 && b.lo_closed))
            throw ValidationError(fmt::format("referent '{}': bands must start at [0", r.name));
        if (i + 1 == r.bands.size() && !(b.hi == 1.0 && b.hi_closed))
            throw ValidationError(fmt::format("referent '{}': bands must end at 1]", r.name));
        if (i + 1 < r.bands.size()) {
            const auto& next = r.bands[i + 1];
            if (b.hi != next.lo || b.hi_closed == next.lo_closed)
                throw ValidationError(fmt::format(
                    "referent '{}': bands {} and {} must meet with exactly one closed endpoint", r.name, i + 1, i + 2));
        }
    }

    seen.clear();
    for (const auto& c : r.checks) {
        if (!seen.insert(c.name).second)
            throw ValidationError(fmt::format("referent '{}': duplicate check '{}'", r.name, c.name));
        if (c.premises.empty())
            throw ValidationError(fmt::format("referent '{}': check '{}' has no premise", r.name, c.name));
        for (const auto& [a, alpha] : c.premises) {
            check_atom(r, "check " + c.name, a);
            check_unit(r, fmt::format("{} premise {}", c.name, to_string(a)), alpha);
        }
        check_atom(r, "check " + c.name, c.conclusion);
        check_unit(r, c.name + " threshold", c.threshold);
    }
}

// Text format

namespace {

using text::Cursor;
using text::Tok;
using text::Token;

bool at_any_section(const Cursor& in)
{
    return in.at_section({"principles", "variables", "rules", "priority", "rho", "tau", "bands", "checks"});
}

ActionBand parse_band(Cursor& in)
{
    ActionBand b;
    if (in.accept(Tok::lbracket))
        b.lo_closed = true;
    else if (in.accept(Tok::lparen))
        b.lo_closed = false;
    else
        in.fail_expected("'[' or '(' opening a risk band");
    b.lo = in.expect_number("band lower bound");
    in.expect(Tok::comma, "','");
    b.hi = in.expect_number("band upper bound");
    if (in.accept(Tok::rbracket))
        b.hi_closed = true;
    else if (in.accept(Tok::rparen))
        b.hi_closed = false;
    else
        in.fail_expected("']' or ')' closing a risk band");
    in.expect(Tok::arrow, "'=>'");
    in.expect(Tok::lbrace, "'{'");
    b.actions = text::parse_ident_list(in);
    in.expect(Tok::rbrace, "'}'");
    return b;
}

ReasoningCheck parse_check(Cursor& in)
{
    ReasoningCheck c;
    c.name = in.expect_ident("check name");
    in.expect(Tok::colon, "':' after check name");
    for (;;) {
        Atom a = text::parse_atom(in);
        in.expect(Tok::equals, "'=' before premise degree");
        c.premises.emplace_back(std::move(a), in.expect_number("premise degree"));
        if (!in.accept(Tok::amp))
            break;
    }
    in.expect(Tok::arrow, "'=>'");
    c.conclusion = text::parse_atom(in);
    const Token& op = in.next();
    switch (op.kind) {
    case Tok::gt: c.comparator = Comparator::gt; break;
    case Tok::ge: c.comparator = Comparator::ge; break;
    case Tok::lt: c.comparator = Comparator::lt; break;
    case Tok::le: c.comparator = Comparator::le; break;
    default: in.fail(op, "expected a comparator (>, >=, <, <=)");
    }
    c.threshold = in.expect_number("threshold");
    return c;
}

} // namespace

Referent parse_referent_text(std::string_view source)
{
    Cursor in(text::tokenize(source));
    Referent r;
    in.expect_keyword("referent");
    r.name = in.expect_ident("referent name");

    std::set<std::string> seen;
    std::vector<PrinciplePair> declared;
    while (!in.at(Tok::end)) {
        if (!at_any_section(in))
            in.fail_expected("a section (principles:, priority:, rho:, tau:, bands:, variables:, rules:, checks:)");
        const Token& head = in.next();
        if (!seen.insert(head.text).second)
            in.fail(head, fmt::format("duplicate section '{}'", head.text));
        in.expect(Tok::colon, "':'");
        auto done = [&] { return in.at(Tok::end) || at_any_section(in); };

        if (head.text == "principles") {
            r.principles = text::parse_ident_list(in);
        }
        else if (head.text == "priority") {
            while (in.at(Tok::ident) && !done()) {
                std::string prev = in.expect_ident("principle");
                in.expect(Tok::gt, "'>'");
                do {
                    std::string next = in.expect_ident("principle after '>'");
                    declared.emplace_back(prev, next);
                    prev = std::move(next);
                } while (in.accept(Tok::gt));
                if (!in.accept(Tok::comma))
                    break;
            }
        }
        else if (head.text == "rho") {
            r.rho = in.expect_number("risk tolerance");
        }
        else if (head.text == "tau") {
            r.tau = in.expect_number("semantic tolerance");
        }
        else if (head.text == "bands") {
            r.bands.push_back(parse_band(in));
            while (in.accept(Tok::comma))
                r.bands.push_back(parse_band(in));
        }
        else if (head.text == "variables") {
            while (!done())
                r.variables.push_back(text::parse_variable(in));
        }
        else if (head.text == "rules") {
            while (!done())
                r.rules.push_back(text::parse_rule(in));
        }
        else {
            while (!done())
                r.checks.push_back(parse_check(in));
        }
    }
    r.priority = transitive_closure(declared, r.principles);
    validate_referent(r);
    return r;
}

std::string render_referent(const Referent& r)
{
    auto join = [](const std::vector<std::string>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i)
            s += (i ? ", " : "") + xs[i];
        return s;
    };
    std::string out = fmt::format("referent {}\n\nprinciples: {}\n", r.name, join(r.principles));
    if (!r.priority.empty()) {
        out += "priority: ";
        for (std::size_t i = 0; i < r.priority.size(); ++i)
            out += fmt::format("{}{} > {}", i ? ", " : "", r.priority[i].first, r.priority[i].second);
        out += "\n";
    }
    out += fmt::format("rho: {}\ntau: {}\nbands: ", text::format_number(r.rho), text::format_number(r.tau));
    for (std::size_t i = 0; i < r.bands.size(); ++i) {
        const auto& b = r.bands[i];
        out += fmt::format("{}{}{}, {}{} => {{{}}}", i ? ",\n  " : "", b.lo_closed ? '[' : '(',
            text::format_number(b.lo), text::format_number(b.hi), b.hi_closed ? ']' : ')', join(b.actions));
    }
    out += "\n\nvariables:\n";
    for (const auto& v : r.variables)
        out += text::render_variable(v, "  ");
    out += "\nrules:\n";
    for (const auto& rule : r.rules)
        out += "  " + text::render_rule(rule) + "\n";
    if (!r.checks.empty()) {
        out += "\nchecks:\n";
        for (const auto& c : r.checks) {
            std::string premises;
            for (const auto& [a, alpha] : c.premises)
                premises += fmt::format("{}{} = {}", premises.empty() ? "" : " & ", to_string(a),
                    text::format_number(alpha));
            out += fmt::format("  {}: {} => {} {} {}\n", c.name, premises, to_string(c.conclusion),
                to_string(c.comparator), text::format_number(c.threshold));
        }
    }
    return out;
}

// JSON mirror

nlohmann::ordered_json referent_to_json(const Referent& r)
{
    using J = nlohmann::ordered_json;
    J j;
    j["referent"] = r.name;
    j["principles"] = r.principles;
    J prio = J::array();
    for (const auto& [u, v] : r.priority)
        prio.push_back({u, v});
    j["priority"] = std::move(prio);
    j["rho"] = r.rho;
    j["tau"] = r.tau;
    J bands = J::array();
    for (const auto& b : r.bands) {
        J bj;
        bj["lo"] = b.lo;
        bj["hi"] = b.hi;
        bj["lo_closed"] = b.lo_closed;
        bj["hi_closed"] = b.hi_closed;
        bj["actions"] = b.actions;
        bands.push_back(std::move(bj));
    }
    j["bands"] = std::move(bands);
    J vars = J::array();
    for (const auto& v : r.variables)
        vars.push_back(to_json(v));
    j["variables"] = std::move(vars);
    J rules = J::array();
    for (const auto& rule : r.rules)
        rules.push_back(to_json(rule));
    j["rules"] = std::move(rules);
    J checks = J::array();
    for (const auto& c : r.checks) {
        J cj;
        cj["name"] = c.name;
        J ps = J::array();
        for (const auto& [a, alpha] : c.premises)
            ps.push_back({{"atom", to_string(a)}, {"degree", alpha}});
        cj["premises"] = std::move(ps);
        cj["conclusion"] = to_string(c.conclusion);
        cj["comparator"] = std::string(to_string(c.comparator));
        cj["threshold"] = c.threshold;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    return j;
}

Referent referent_from_json(const nlohmann::ordered_json& j)
{
    Referent r;
    try {
        r.name = j.at("referent").get<std::string>();
        r.principles = j.at("principles").get<std::vector<std::string>>();
        std::vector<PrinciplePair> declared;
        for (const auto& p : j.at("priority")) {
            const auto pair = p.get<std::vector<std::string>>();
            if (pair.size() != 2)
                throw ValidationError("JSON referent: priority entries are principle pairs");
            declared.emplace_back(pair[0], pair[1]);
        }
        r.priority = transitive_closure(declared, r.principles);
        r.rho = j.at("rho").get<double>();
        r.tau = j.at("tau").get<double>();
        for (const auto& bj : j.at("bands"))
            r.bands.push_back(ActionBand{bj.at("lo").get<double>(), bj.at("hi").get<double>(),
                bj.at("lo_closed").get<bool>(), bj.at("hi_closed").get<bool>(),
                bj.at("actions").get<std::vector<std::string>>()});
        for (const auto& v : j.at("variables"))
            r.variables.push_back(variable_from_json(v));
        for (const auto& rule : j.at("rules"))
            r.rules.push_back(rule_from_json(rule));
        if (j.contains("checks"))
            for (const auto& cj : j.at("checks")) {
                ReasoningCheck c;
                c.name = cj.at("name").get<std::string>();
                for (const auto& p : cj.at("premises"))
                    c.premises.emplace_back(parse_atom(p.at("atom").get<std::string>()), p.at("degree").get<double>());
                c.conclusion = parse_atom(cj.at("conclusion").get<std::string>());
                const auto op = cj.at("comparator").get<std::string>();
                if (op == ">")
                    c.comparator = Comparator::gt;
                else if (op == ">=")
                    c.comparator = Comparator::ge;
                else if (op == "<")
                    c.comparator = Comparator::lt;
                else if (op == "<=")
                    c.comparator = Comparator::le;
                else
                    throw ValidationError(fmt::format("JSON referent: unknown comparator '{}'", op));
                c.threshold = cj.at("threshold").get<double>();
                r.checks.push_back(std::move(c));
            }
    }
    catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("JSON referent: {}", e.what()));
    }
    catch (const ParseError& e) {
        throw ValidationError(fmt::format("JSON referent: bad atom: {}", e.detail()));
    }
    validate_referent(r);
    return r;
}

Referent parse_referent_json(std::string_view source)
{
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(source.begin(), source.end());
    }
    catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("malformed JSON ({})", e.what()), 1, static_cast<int>(e.byte));
    }
    return referent_from_json(doc);
}

Referent parse_referent(std::string_view source)
{
    const auto pos = source.find_first_not_of(" \t\r\n");
    if (pos != std::string_view::npos && source[pos] == '{')
        return parse_referent_json(source);
    return parse_referent_text(source);
}

Referent load_referent(const std::filesystem::path& path)
{
    return parse_referent(read_file(path));
}

} // namespace fedm
