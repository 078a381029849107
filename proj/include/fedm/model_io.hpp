#pragma once

#include "fedm/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace fedm {

using Json = nlohmann::ordered_json;

/// Parses either representation; a document whose first non-blank character is
/// '{' is read as JSON, anything else as the text format. The result is validated.
EdmModel parse_model(std::string_view source);
EdmModel parse_model_text(std::string_view source);
EdmModel parse_model_json(std::string_view source);

EdmModel load_model(const std::filesystem::path& path);

/// Canonical text form. parse_model(render_model(m)) == m for any valid model
/// whose rule names are plain identifiers.
std::string render_model(const EdmModel& model);

Json model_to_json(const EdmModel& model);
EdmModel model_from_json(const Json& doc);

Json to_json(const LinguisticVariable& variable);
Json to_json(const FuzzyRule& rule);
LinguisticVariable variable_from_json(const Json& doc);
FuzzyRule rule_from_json(const Json& doc);

/// Parses `Var(term)`.
Atom parse_atom(std::string_view text);

std::string read_file(const std::filesystem::path& path);

} // namespace fedm
