#pragma once

#include "fedm/inference.hpp"
#include "fedm/model.hpp"
#include "fedm/model_io.hpp"
#include "fedm/referent.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fedm::test {

inline std::filesystem::path data_path(const std::string& name)
{
    return std::filesystem::path(FEDM_DATA_DIR) / name;
}

inline std::filesystem::path golden_path(const std::string& name)
{
    return std::filesystem::path(FEDM_GOLDEN_DIR) / name;
}

inline std::string golden(const std::string& name)
{
    return read_file(golden_path(name));
}

inline EdmModel original_model()
{
    return load_model(data_path("patient_edm.fedm"));
}

inline EdmModel repaired_model()
{
    return load_model(data_path("patient_edm_repaired.fedm"));
}

inline EdmModel revised_model()
{
    return load_model(data_path("patient_edm_revised.fedm"));
}

inline std::vector<std::string> referent_files()
{
    return {
        data_path("referents/patient_advocate.ref").string(),
        data_path("referents/clinician.ref").string(),
        data_path("referents/hospital_board.ref").string(),
    };
}

inline std::vector<Referent> referents()
{
    std::vector<Referent> out;
    for (const auto& f : referent_files())
        out.push_back(load_referent(f));
    return out;
}

inline CrispInput case_study_input()
{
    return {{"Severity", 7.3}, {"Mental", 6.4}};
}

/// Copy of `rule` under a new name, appended to the model.
inline EdmModel with_rule(EdmModel model, FuzzyRule rule)
{
    model.rules.push_back(std::move(rule));
    return model;
}

inline EdmModel without_rule(EdmModel model, const std::string& name)
{
    std::erase_if(model.rules, [&](const FuzzyRule& r) { return r.name == name; });
    return model;
}

inline FuzzyRule rule_from_text(const std::string& name, RuleKind kind, const std::string& antecedent,
    const std::string& consequent, double cf, std::vector<std::string> principles)
{
    FuzzyRule r;
    r.name = name;
    r.kind = kind;
    // Conjunctions separated by '|', atoms by '&'; no parentheses.
    std::string rest = antecedent;
    while (true) {
        const auto bar = rest.find('|');
        std::string part = rest.substr(0, bar);
        Conjunction conj;
        std::size_t start = 0;
        while (true) {
            const auto amp = part.find('&', start);
            std::string atom = part.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
            atom.erase(0, atom.find_first_not_of(' '));
            atom.erase(atom.find_last_not_of(' ') + 1);
            conj.push_back(parse_atom(atom));
            if (amp == std::string::npos)
                break;
            start = amp + 1;
        }
        r.antecedent.push_back(std::move(conj));
        if (bar == std::string::npos)
            break;
        rest = rest.substr(bar + 1);
    }
    r.consequents.push_back(parse_atom(consequent));
    r.cf = cf;
    r.principles = std::move(principles);
    return r;
}

} // namespace fedm::test
