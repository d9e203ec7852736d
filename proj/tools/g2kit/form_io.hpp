#pragma once

#include <string>

#include <json.hpp>

#include "g2/algebra.hpp"

namespace g2kit {

// Parsed 3-form file. Rational entries are kept exactly; `exact` is false when
// some coefficient was a non-rational float.
struct FormFile {
  g2::QForm rational{3};
  g2::KForm value{3};
  bool exact = true;
};

// Reads {"coeffs": {"123": 1.0, ...}}. Keys are ascending digits 1..7; values
// are numbers, or "p/q" strings. Throws g2::Error on malformed input.
FormFile parse_form(const nlohmann::json& doc);
FormFile load_form(const std::string& path);

nlohmann::ordered_json form_to_json(const g2::KForm& phi);

}  // namespace g2kit
