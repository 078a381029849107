#include "fedm/model_io.hpp"

#include "fedm/error.hpp"
#include "text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fedm {

namespace {

using text::Cursor;
using text::Tok;
using text::Token;

bool at_any_section(const Cursor& in)
{
    return in.at_section({"principles", "variables", "rules", "incompatible", "traceability"});
}

void check_traceability(const EdmModel& model, const std::map<std::string, std::vector<std::string>>& declared)
{
    for (const auto& [name, principles] : declared) {
        const auto* rule = model.find_rule(name);
        if (!rule)
            throw ModelError(ModelErrorKind::unresolved_identifier,
                fmt::format("traceability entry for unknown rule '{}'", name));
        const std::set<std::string> a(principles.begin(), principles.end());
        const std::set<std::string> b(rule->principles.begin(), rule->principles.end());
        if (a != b)
            throw ModelError(ModelErrorKind::invalid_structure,
                fmt::format("traceability of rule '{}' differs from its principle tags", name));
    }
}

} // namespace

EdmModel parse_model_text(std::string_view source)
{
    Cursor in(text::tokenize(source));
    EdmModel model;
    in.expect_keyword("model");
    model.name = in.expect_ident("model name");

    std::set<std::string> seen;
    std::map<std::string, std::vector<std::string>> traceability;
    while (!in.at(Tok::end)) {
        if (!at_any_section(in))
            in.fail_expected("a section (principles:, variables:, rules:, incompatible:, traceability:)");
        const Token& head = in.next();
        if (!seen.insert(head.text).second)
            in.fail(head, fmt::format("duplicate section '{}'", head.text));
        in.expect(Tok::colon, "':'");
        auto section_done = [&] { return in.at(Tok::end) || at_any_section(in); };

        if (head.text == "principles") {
            model.principles = text::parse_ident_list(in);
        }
        else if (head.text == "variables") {
            while (!section_done())
                model.variables.push_back(text::parse_variable(in));
        }
        else if (head.text == "rules") {
            while (!section_done())
                model.rules.push_back(text::parse_rule(in));
        }
        else if (head.text == "incompatible") {
            while (in.at(Tok::lparen)) {
                in.next();
                PrinciplePair pair;
                pair.first = in.expect_ident("principle");
                in.expect(Tok::comma, "','");
                pair.second = in.expect_ident("principle");
                in.expect(Tok::rparen, "')'");
                model.incompatible.push_back(std::move(pair));
                if (!in.accept(Tok::comma))
                    break;
            }
        }
        else {
            while (in.at(Tok::ident) && !section_done()) {
                const Token& rule = in.next();
                in.expect(Tok::equals, "'='");
                in.expect(Tok::lbracket, "'['");
                auto list = text::parse_ident_list(in);
                in.expect(Tok::rbracket, "']'");
                if (!traceability.emplace(rule.text, std::move(list)).second)
                    in.fail(rule, fmt::format("duplicate traceability entry '{}'", rule.text));
                if (!in.accept(Tok::comma))
                    break;
            }
        }
    }

    validate_model(model);
    check_traceability(model, traceability);
    return model;
}

std::string render_model(const EdmModel& model)
{
    std::string out = fmt::format("model {}\n\nprinciples: ", model.name);
    for (std::size_t i = 0; i < model.principles.size(); ++i)
        out += (i ? ", " : "") + model.principles[i];
    out += "\n\nvariables:\n";
    for (const auto& v : model.variables)
        out += text::render_variable(v, "  ");
    out += "\nrules:\n";
    for (const auto& r : model.rules)
        out += "  " + text::render_rule(r) + "\n";
    if (!model.incompatible.empty()) {
        out += "\nincompatible: ";
        for (std::size_t i = 0; i < model.incompatible.size(); ++i)
            out += fmt::format("{}({}, {})", i ? ", " : "", model.incompatible[i].first, model.incompatible[i].second);
        out += "\n";
    }
    return out;
}

Atom parse_atom(std::string_view source)
{
    Cursor in(text::tokenize(source));
    Atom atom = text::parse_atom(in);
    if (!in.at(Tok::end))
        in.fail_expected("end of atom");
    return atom;
}

// JSON mirror

namespace {

[[noreturn]] void json_fail(const std::string& what)
{
    throw ModelError(ModelErrorKind::invalid_structure, "JSON model: " + what);
}

const Json& field(const Json& obj, const char* key)
{
    if (!obj.is_object())
        json_fail(fmt::format("expected an object holding '{}'", key));
    auto it = obj.find(key);
    if (it == obj.end())
        json_fail(fmt::format("missing field '{}'", key));
    return *it;
}

std::string str(const Json& j, const char* what)
{
    if (!j.is_string())
        json_fail(fmt::format("'{}' must be a string", what));
    return j.get<std::string>();
}

double num(const Json& j, const char* what)
{
    if (!j.is_number())
        json_fail(fmt::format("'{}' must be a number", what));
    return j.get<double>();
}

const Json& arr(const Json& j, const char* what)
{
    if (!j.is_array())
        json_fail(fmt::format("'{}' must be an array", what));
    return j;
}

std::vector<std::string> str_list(const Json& j, const char* what)
{
    std::vector<std::string> out;
    for (const auto& e : arr(j, what))
        out.push_back(str(e, what));
    return out;
}

Atom atom_from(const Json& j)
{
    try {
        return parse_atom(str(j, "atom"));
    }
    catch (const ParseError& e) {
        json_fail(fmt::format("bad atom '{}': {}", j.get<std::string>(), e.detail()));
    }
}

} // namespace

Json to_json(const LinguisticVariable& v)
{
    Json j;
    j["name"] = v.name;
    j["kind"] = std::string(to_string(v.kind));
    if (v.universe)
        j["universe"] = {v.universe->lo, v.universe->hi};
    Json terms = Json::array();
    for (const auto& t : v.terms) {
        Json tj;
        tj["name"] = t.name;
        if (t.mf)
            tj["mf"] = {t.mf->a, t.mf->b, t.mf->c, t.mf->d};
        terms.push_back(std::move(tj));
    }
    j["terms"] = std::move(terms);
    return j;
}

LinguisticVariable variable_from_json(const Json& j)
{
    LinguisticVariable v;
    v.name = str(field(j, "name"), "name");
    const auto kind = parse_variable_kind(str(field(j, "kind"), "kind"));
    if (!kind)
        json_fail(fmt::format("variable '{}': unknown kind", v.name));
    v.kind = *kind;
    if (j.contains("universe")) {
        const auto& u = arr(j["universe"], "universe");
        if (u.size() != 2)
            json_fail(fmt::format("variable '{}': universe needs two bounds", v.name));
        v.universe = Universe{num(u[0], "universe"), num(u[1], "universe")};
    }
    for (const auto& tj : arr(field(j, "terms"), "terms")) {
        Term t;
        t.name = str(field(tj, "name"), "term name");
        if (tj.contains("mf")) {
            const auto& mf = arr(tj["mf"], "mf");
            if (mf.size() != 4)
                json_fail(fmt::format("term '{}': mf needs four breakpoints", t.name));
            t.mf = TrapezoidMF{num(mf[0], "mf"), num(mf[1], "mf"), num(mf[2], "mf"), num(mf[3], "mf")};
        }
        v.terms.push_back(std::move(t));
    }
    return v;
}

Json to_json(const FuzzyRule& r)
{
    Json j;
    j["name"] = r.name;
    j["kind"] = std::string(to_string(r.kind));
    Json ante = Json::array();
    for (const auto& conj : r.antecedent) {
        Json cj = Json::array();
        for (const auto& a : conj)
            cj.push_back(to_string(a));
        ante.push_back(std::move(cj));
    }
    j["antecedent"] = std::move(ante);
    Json cons = Json::array();
    for (const auto& a : r.consequents)
        cons.push_back(to_string(a));
    j["consequents"] = std::move(cons);
    j["cf"] = r.cf;
    j["principles"] = r.principles;
    return j;
}

FuzzyRule rule_from_json(const Json& j)
{
    FuzzyRule r;
    r.name = str(field(j, "name"), "name");
    const auto kind = parse_rule_kind(str(field(j, "kind"), "kind"));
    if (!kind)
        json_fail(fmt::format("rule '{}': unknown kind", r.name));
    r.kind = *kind;
    for (const auto& cj : arr(field(j, "antecedent"), "antecedent")) {
        Conjunction conj;
        for (const auto& a : arr(cj, "conjunction"))
            conj.push_back(atom_from(a));
        r.antecedent.push_back(std::move(conj));
    }
    for (const auto& a : arr(field(j, "consequents"), "consequents"))
        r.consequents.push_back(atom_from(a));
    r.cf = num(field(j, "cf"), "cf");
    r.principles = str_list(field(j, "principles"), "principles");
    return r;
}

Json model_to_json(const EdmModel& model)
{
    Json j;
    j["model"] = model.name;
    j["principles"] = model.principles;
    Json vars = Json::array();
    for (const auto& v : model.variables)
        vars.push_back(to_json(v));
    j["variables"] = std::move(vars);
    Json rules = Json::array();
    for (const auto& r : model.rules)
        rules.push_back(to_json(r));
    j["rules"] = std::move(rules);
    Json inc = Json::array();
    for (const auto& [a, b] : model.incompatible)
        inc.push_back({a, b});
    j["incompatible"] = std::move(inc);
    Json trace = Json::object();
    for (const auto& r : model.rules)
        trace[r.name] = r.principles;
    j["traceability"] = std::move(trace);
    return j;
}

EdmModel model_from_json(const Json& j)
{
    EdmModel model;
    model.name = str(field(j, "model"), "model");
    model.principles = str_list(field(j, "principles"), "principles");
    for (const auto& v : arr(field(j, "variables"), "variables"))
        model.variables.push_back(variable_from_json(v));
    for (const auto& r : arr(field(j, "rules"), "rules"))
        model.rules.push_back(rule_from_json(r));
    if (j.contains("incompatible"))
        for (const auto& p : arr(j["incompatible"], "incompatible")) {
            const auto pair = str_list(p, "incompatible");
            if (pair.size() != 2)
                json_fail("incompatible entries are principle pairs");
            model.incompatible.emplace_back(pair[0], pair[1]);
        }
    validate_model(model);
    if (j.contains("traceability")) {
        const auto& t = j["traceability"];
        if (!t.is_object())
            json_fail("'traceability' must be an object");
        std::map<std::string, std::vector<std::string>> declared;
        for (const auto& [name, list] : t.items())
            declared[name] = str_list(list, "traceability");
        check_traceability(model, declared);
    }
    return model;
}

EdmModel parse_model_json(std::string_view source)
{
    Json doc;
    try {
        doc = Json::parse(source.begin(), source.end());
    }
    catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into a line/column pair.
        const std::size_t off = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, source.size());
        int line = 1;
        int col = 1;
        for (std::size_t i = 0; i < off; ++i) {
            if (source[i] == '\n') {
                ++line;
                col = 1;
            }
            else {
                ++col;
            }
        }
        throw ParseError("malformed JSON", line, col);
    }
    return model_from_json(doc);
}

EdmModel parse_model(std::string_view source)
{
    const auto pos = source.find_first_not_of(" \t\r\n");
    if (pos != std::string_view::npos && source[pos] == '{')
        return parse_model_json(source);
    return parse_model_text(source);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EdmModel load_model(const std::filesystem::path& path)
{
    return parse_model(read_file(path));
}

} // namespace fedm
