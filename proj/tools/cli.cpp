#include "cli.hpp"

#include "fedm/error.hpp"
#include "fedm/etm.hpp"
#include "fedm/fpn.hpp"
#include "fedm/model_io.hpp"
#include "fedm/referent.hpp"
#include "fedm/validator.hpp"
#include "fedm/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <thread>

namespace fedm::cli {

namespace {

bool is_separator(char c)
{
    return c == ' ' || c == '\t' || c == ',' || c == '\r';
}

} // namespace

std::vector<Scenario> parse_scenarios(std::string_view text)
{
    std::vector<Scenario> records;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);

        Scenario record{line_no, {}};
        std::size_t i = 0;
        while (i < line.size()) {
            if (is_separator(line[i])) {
                ++i;
                continue;
            }
            const std::size_t start = i;
            while (i < line.size() && !is_separator(line[i]))
                ++i;
            const std::string_view pair = line.substr(start, i - start);
            const int column = static_cast<int>(start) + 1;
            const auto eq = pair.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw ParseError(fmt::format("expected name=value, found '{}'", pair), line_no, column);
            const std::string name(pair.substr(0, eq));
            const std::string_view value = pair.substr(eq + 1);
            double x = 0.0;
            const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
            if (ec != std::errc{} || end != value.data() + value.size())
                throw ParseError(fmt::format("invalid number '{}' for {}", value, name), line_no,
                    column + static_cast<int>(eq) + 1);
            if (!record.input.emplace(name, x).second)
                throw ParseError(fmt::format("duplicate value for {}", name), line_no, column);
        }
        if (!record.input.empty())
            records.push_back(std::move(record));
    }
    return records;
}

std::vector<Scenario> grid_scenarios(const EdmModel& model, int steps)
{
    if (steps < 2)
        throw Error("grid sweep needs at least 2 points per input");
    const auto inputs = model.variables_of(VariableKind::input);
    for (const auto* v : inputs) {
        if (!v->universe)
            throw Error(fmt::format("input '{}' has no universe to sweep", v->name));
    }
    std::vector<Scenario> out;
    std::vector<int> idx(inputs.size(), 0);
    while (true) {
        Scenario s;
        for (std::size_t v = 0; v < inputs.size(); ++v) {
            const Universe& u = *inputs[v]->universe;
            s.input[inputs[v]->name] = u.lo + u.width() * idx[v] / (steps - 1);
        }
        out.push_back(std::move(s));
        std::size_t v = inputs.size();
        while (v > 0 && ++idx[v - 1] == steps)
            idx[--v] = 0;
        if (v == 0)
            break;
    }
    return out;
}

namespace {

struct Config {
    std::string model;
    std::vector<std::string> referents;
    std::string scenarios;
    std::vector<std::string> incompatible;
    double epsilon = kDefaultEpsilon;
    std::size_t resolution = 1001;
    std::string format = "text";
    std::string export_dot;
    std::size_t state_cap = kDefaultStateCap;
    bool strict = false;
    std::string cf_mode = "risk_rules";
    int sweep = 0;
    int repair_grid = 20;
};

/// Failure carrying its exit code, reported as "error: <message>".
struct Failure {
    int code;
    std::string message;
};

std::string describe_input(const EdmModel& model, const CrispInput& input)
{
    std::string out;
    for (const auto* v : model.variables_of(VariableKind::input)) {
        const auto it = input.find(v->name);
        if (it == input.end())
            continue;
        if (!out.empty())
            out += ' ';
        out += fmt::format("{}={}", v->name, it->second);
    }
    return out;
}

std::string render_degrees(const TermDegrees& d)
{
    std::string out;
    for (const auto& [term, mu] : d.entries)
        out += fmt::format("{}{} {:.3f}", out.empty() ? "" : ", ", term, mu);
    return out;
}

std::string render_inference(const InferenceResult& r)
{
    std::string out;
    out += fmt::format("  crisp risk: {:.1f}% ({:.4g})\n", r.crisp_risk * 100.0, r.risk_value);
    out += fmt::format("  risk memberships: {}\n", render_degrees(r.risk_memberships));
    out += fmt::format("  action distribution: {}\n", render_degrees(r.action_distribution));
    out += fmt::format("  recommended action: {}\n", r.recommended_action);
    out += "  fired rules:";
    for (const auto& f : r.fired_rules)
        out += fmt::format(" {} {:.3f}", f.name, f.activation * f.cf);
    out += '\n';
    return out;
}

EdmModel load_model_file(const std::string& path)
{
    try {
        return load_model(path);
    } catch (const Error& e) {
        throw Failure{kUsage, fmt::format("{}: {}", path, e.what())};
    }
}

std::vector<Scenario> load_scenarios(const Config& cfg, const EdmModel& model)
{
    std::vector<Scenario> records;
    if (cfg.sweep > 0) {
        try {
            records = grid_scenarios(model, cfg.sweep);
        } catch (const Error& e) {
            throw Failure{kUsage, e.what()};
        }
    }
    if (!cfg.scenarios.empty()) {
        try {
            auto parsed = parse_scenarios(read_file(cfg.scenarios));
            records.insert(records.end(), parsed.begin(), parsed.end());
        } catch (const Error& e) {
            throw Failure{kUsage, fmt::format("{}: {}", cfg.scenarios, e.what())};
        }
    }
    // Reject records the engine cannot take before any output is produced.
    for (const auto& s : records) {
        try {
            fuzzify_input(model, s.input);
        } catch (const InferenceError& e) {
            if (s.line > 0)
                throw Failure{kUsage, fmt::format("{}: line {}: {}", cfg.scenarios, s.line, e.what())};
            throw Failure{kUsage, e.what()};
        }
    }
    return records;
}

struct Outcome {
    int code = kOk;
    std::string text;
    std::string error;
    std::optional<SemanticResult> semantic;
};

/// Runs `work` on every record concurrently and hands the outcomes to `emit`
/// in input order, as soon as each one and all its predecessors are done.
template <class Work, class Emit>
void run_ordered(const std::vector<Scenario>& records, Work work, Emit emit)
{
    const std::size_t window = std::max(2u, std::thread::hardware_concurrency()) * 2;
    std::deque<std::future<Outcome>> pending;
    std::size_t next = 0;
    while (next < records.size() || !pending.empty()) {
        while (next < records.size() && pending.size() < window) {
            pending.push_back(std::async(std::launch::async, work, std::cref(records[next])));
            ++next;
        }
        Outcome o = pending.front().get();
        emit(o);
        pending.pop_front();
    }
}

std::string record_label(const Scenario& s, std::size_t index)
{
    return s.line > 0 ? fmt::format("line {}", s.line) : fmt::format("sweep point {}", index + 1);
}

void check_format(const Config& cfg, bool allow_dot)
{
    if (cfg.format == "dot" && !allow_dot)
        throw Failure{kUsage, "dot format is only available for verify"};
}

int cmd_infer(const Config& cfg, std::ostream& out, std::ostream& err, bool explain)
{
    check_format(cfg, false);
    if (cfg.scenarios.empty() && cfg.sweep == 0)
        throw Failure{kUsage, "no scenarios: give --scenarios or --sweep"};
    const EdmModel model = load_model_file(cfg.model);
    const auto records = load_scenarios(cfg, model);
    const bool json = cfg.format == "json";
    const InferenceOptions options{cfg.resolution, true};

    int code = kOk;
    std::size_t index = 0;
    auto work = [&](const Scenario& s) {
        Outcome o;
        try {
            const InferenceResult r = infer(model, s.input, options);
            if (explain) {
                const ExplanationTrace trace = build_trace(model, r);
                o.text = json ? to_json(trace).dump() + "\n" : render_explanation(trace);
            } else {
                o.text = json ? to_json(r).dump() + "\n" : render_inference(r);
            }
        } catch (const InferenceError& e) {
            if (!e.is_coverage_gap())
                throw;
            o.code = kInferenceGap;
            o.error = explain ? fmt::format("unexplainable decision: {}", e.what()) : e.what();
        } catch (const ExplanationError& e) {
            o.code = kInferenceGap;
            o.error = e.what();
        }
        return o;
    };
    run_ordered(records, work, [&](Outcome& o) {
        const Scenario& s = records[index];
        if (!json)
            out << fmt::format("[{}] {}\n", index + 1, describe_input(model, s.input));
        out << o.text;
        if (!json && index + 1 < records.size())
            out << '\n';
        if (o.code != kOk) {
            err << fmt::format("error: {}: {}\n", record_label(s, index), o.error);
            code = std::max(code, o.code);
        }
        out.flush();
        ++index;
    });
    return code;
}

std::vector<PrinciplePair> parse_incompatible(const std::vector<std::string>& specs, const EdmModel& model)
{
    std::vector<PrinciplePair> pairs;
    for (const auto& spec : specs) {
        const auto comma = spec.find(',');
        if (comma == std::string::npos || spec.find(',', comma + 1) != std::string::npos)
            throw Failure{kUsage, fmt::format("--incompatible expects A,B, got '{}'", spec)};
        PrinciplePair p{spec.substr(0, comma), spec.substr(comma + 1)};
        for (const auto* name : {&p.first, &p.second}) {
            if (std::find(model.principles.begin(), model.principles.end(), *name) == model.principles.end())
                throw Failure{kUsage, fmt::format("unknown principle '{}' in --incompatible", *name)};
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

int cmd_verify(const Config& cfg, std::ostream& out, std::ostream& err)
{
    const EdmModel model = load_model_file(cfg.model);
    VerifyOptions options;
    if (!cfg.incompatible.empty())
        options.incompatible = parse_incompatible(cfg.incompatible, model);
    options.strict = cfg.strict;
    options.state_cap = cfg.state_cap;

    VerificationReport report;
    try {
        report = verify(model, options);
    } catch (const VerificationError& e) {
        err << fmt::format("error: {}\n", e.what());
        return kFindings;
    }

    const std::string dot = net_to_dot(report.net) + graph_to_dot(report.graph, report.net);
    if (!cfg.export_dot.empty()) {
        std::ofstream file(cfg.export_dot, std::ios::binary);
        if (!file || !(file << dot))
            throw Failure{kUsage, fmt::format("cannot write '{}'", cfg.export_dot)};
    }
    if (cfg.format == "json")
        out << to_json(report).dump(2) << '\n';
    else if (cfg.format == "dot")
        out << dot;
    else
        out << render_report(report);
    return report.empty() ? kOk : kFindings;
}

int cmd_validate(const Config& cfg, std::ostream& out, std::ostream& err)
{
    check_format(cfg, false);
    if (cfg.referents.empty())
        throw Failure{kUsage, "validation requires ≥1 referent"};
    const EdmModel model = load_model_file(cfg.model);

    std::vector<std::future<Referent>> loading;
    for (const auto& path : cfg.referents)
        loading.push_back(std::async(std::launch::async, [&path] { return load_referent(path); }));
    std::vector<Referent> referents;
    for (std::size_t i = 0; i < loading.size(); ++i) {
        try {
            referents.push_back(loading[i].get());
        } catch (const Error& e) {
            throw Failure{kUsage, fmt::format("{}: {}", cfg.referents[i], e.what())};
        }
    }
    const auto records = load_scenarios(cfg, model);
    const bool json = cfg.format == "json";

    ValidationReport report;
    report.static_findings = static_validation(build_fpn(model), referents);
    if (!json)
        out << render_static(report.static_findings) << std::flush;

    const InferenceOptions options{cfg.resolution, true};
    int code = kOk;
    std::size_t index = 0;
    auto work = [&](const Scenario& s) {
        Outcome o;
        try {
            o.semantic = semantic_validity(model, s.input, referents, cfg.epsilon, options);
        } catch (const InferenceError& e) {
            if (!e.is_coverage_gap())
                throw;
            o.code = kInferenceGap;
            o.error = e.what();
        }
        return o;
    };
    run_ordered(records, work, [&](Outcome& o) {
        if (o.semantic) {
            if (!json)
                out << render_semantic(*o.semantic, index) << std::flush;
            report.scenarios.push_back(std::move(*o.semantic));
        } else {
            err << fmt::format("error: {}: {}\n", record_label(records[index], index), o.error);
            code = std::max(code, o.code);
        }
        ++index;
    });

    DynamicOptions dyn;
    dyn.mode = cfg.cf_mode == "all_rules" ? CfMode::all_rules : CfMode::risk_rules;
    dyn.grid = cfg.repair_grid;
    report.checks = dynamic_validation(model, referents, dyn);

    if (json) {
        out << to_json(report).dump(2) << '\n';
    } else {
        out << render_checks(report.checks);
        out << fmt::format("Verdict: {}\n", report.ok() && code == kOk ? "valid" : "not valid");
    }
    if (code != kOk)
        return code;
    return report.ok() ? kOk : kInvalid;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fuzzy ethical decision models: inference, explanation, verification and validation.", "fedm"};
    app.require_subcommand(1);
    Config cfg;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "Model file (text or JSON)")->required()->check(CLI::ExistingFile);
    };
    auto add_format = [&](CLI::App* sub, std::vector<std::string> allowed) {
        sub->add_option("--format", cfg.format, "Output format")
            ->envname("FEDM_FORMAT")
            ->check(CLI::IsMember(std::move(allowed)));
    };
    auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--scenarios", cfg.scenarios, "Scenario file, one name=value record per line")
            ->check(CLI::ExistingFile);
        sub->add_option("--resolution", cfg.resolution, "Centroid samples")->check(CLI::Range(11, 10'000'000));
        sub->add_option("--sweep", cfg.sweep, "Grid sweep with N points per input universe")
            ->check(CLI::Range(2, 1000));
    };

    auto* infer_cmd = app.add_subcommand("infer", "Risk and action for each scenario");
    add_model(infer_cmd);
    add_inputs(infer_cmd);
    add_format(infer_cmd, {"text", "json", "dot"});

    auto* explain_cmd = app.add_subcommand("explain", "Principle-level explanation for each scenario");
    add_model(explain_cmd);
    add_inputs(explain_cmd);
    add_format(explain_cmd, {"text", "json", "dot"});

    auto* verify_cmd = app.add_subcommand("verify", "Petri-net verification of the rule base");
    add_model(verify_cmd);
    verify_cmd->add_option("--incompatible", cfg.incompatible, "Incompatible principle pair A,B (repeatable)")
        ->allow_extra_args(false);
    verify_cmd->add_option("--export-dot", cfg.export_dot, "Write the net and reachability graph as DOT");
    verify_cmd->add_option("--state-cap", cfg.state_cap, "Maximum reachable markings")->check(CLI::PositiveNumber);
    verify_cmd->add_flag("--strict", cfg.strict, "Report every co-enabled incompatible pair");
    add_format(verify_cmd, {"text", "json", "dot"});

    auto* validate_cmd = app.add_subcommand("validate", "Static, semantic and dynamic validation against referents");
    add_model(validate_cmd);
    validate_cmd->add_option("--referent", cfg.referents, "Referent file (repeatable)")
        ->check(CLI::ExistingFile)
        ->allow_extra_args(false);
    add_inputs(validate_cmd);
    validate_cmd->add_option("--epsilon", cfg.epsilon, "Tolerance of the principle order test")
        ->check(CLI::NonNegativeNumber);
    validate_cmd->add_option("--cf-mode", cfg.cf_mode, "Where certainty factors apply during propagation")
        ->check(CLI::IsMember({"risk_rules", "all_rules"}));
    validate_cmd->add_option("--repair-grid", cfg.repair_grid, "Candidate cf values k/N for repair suggestions")
        ->check(CLI::Range(1, 10000));
    add_format(validate_cmd, {"text", "json", "dot"});

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (infer_cmd->parsed())
            return cmd_infer(cfg, out, err, false);
        if (explain_cmd->parsed())
            return cmd_infer(cfg, out, err, true);
        if (verify_cmd->parsed())
            return cmd_verify(cfg, out, err);
        return cmd_validate(cfg, out, err);
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

} // namespace fedm::cli
