#include "form_io.hpp"

#include <cmath>
#include <fstream>

namespace g2kit {

using g2::Error;
using g2::Mask;
using g2::Rational;

namespace {

Mask parse_key(const std::string& key) {
  if (key.size() != 3) throw Error("3-form key '" + key + "' must have three digits");
  Mask m = 0;
  char prev = '0';
  for (char c : key) {
    if (c < '1' || c > '7' || c <= prev) throw Error("3-form key '" + key + "' must be ascending digits 1..7");
    m |= static_cast<Mask>(1u << (c - '1'));
    prev = c;
  }
  return m;
}

Rational parse_rational(const std::string& text) {
  try {
    return Rational(text);
  } catch (const std::exception&) {
    throw Error("cannot parse rational '" + text + "'");
  }
}

}  // namespace

FormFile parse_form(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("coeffs") || !doc["coeffs"].is_object())
    throw Error("3-form file needs an object field \"coeffs\"");
  FormFile out;
  for (const auto& [key, v] : doc["coeffs"].items()) {
    Mask m = parse_key(key);
    if (v.is_string()) {
      Rational q = parse_rational(v.get<std::string>());
      out.rational.at(m) = q;
      out.value.at(m) = g2::to_double(q);
    } else if (v.is_number()) {
      double x = v.get<double>();
      if (!std::isfinite(x)) throw Error("non-finite coefficient for " + key);
      out.value.at(m) = x;
      out.rational.at(m) = Rational(x);
      if (x != std::round(x)) out.exact = false;
    } else {
      throw Error("coefficient for " + key + " must be a number or a \"p/q\" string");
    }
  }
  return out;
}

FormFile load_form(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return parse_form(doc);
}

nlohmann::ordered_json form_to_json(const g2::KForm& phi) {
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (int i = 0; i < phi.size(); ++i)
    if (phi[i] != 0.0) coeffs[g2::index_string(phi.mask(i))] = phi[i];
  return coeffs;
}

}  // namespace g2kit
