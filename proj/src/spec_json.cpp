#include "copulalab/spec_json.hpp"

#include <array>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"
#include "json.hpp"

namespace copulalab {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 8> kTypes{
    "independence", "w", "m", "frechet", "mardia", "marshall-olkin", "mixture", "grid"};

void expect_fields(const json& j, std::string_view type,
                   std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (key == "type") continue;
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(fmt::format("{}: unknown field '{}'", type, key));
  }
  for (auto a : allowed) {
    if (!j.contains(std::string(a))) {
      throw ValidationError(fmt::format("{}: missing field '{}'", type, a));
    }
  }
}

double number_field(const json& j, std::string_view type, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number()) throw ValidationError(fmt::format("{}: field '{}' must be a number", type, name));
  return v.get<double>();
}

CopulaSpec from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("spec: expected a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw ValidationError("spec: missing string field 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "independence" || type == "w" || type == "m") {
    expect_fields(j, type, {});
    if (type == "independence") return CopulaSpec::independence();
    return type == "w" ? CopulaSpec::lower_bound() : CopulaSpec::upper_bound();
  }
  if (type == "frechet") {
    expect_fields(j, type, {"a", "b"});
    return CopulaSpec::frechet(number_field(j, type, "a"), number_field(j, type, "b"));
  }
  if (type == "mardia") {
    expect_fields(j, type, {"theta"});
    return CopulaSpec::mardia(number_field(j, type, "theta"));
  }
  if (type == "marshall-olkin") {
    expect_fields(j, type, {"a", "b"});
    return CopulaSpec::marshall_olkin(number_field(j, type, "a"), number_field(j, type, "b"));
  }
  if (type == "mixture") {
    expect_fields(j, type, {"weights", "components"});
    const auto& w = j.at("weights");
    const auto& c = j.at("components");
    if (!w.is_array() || !c.is_array()) {
      throw ValidationError("mixture: 'weights' and 'components' must be arrays");
    }
    std::vector<double> weights;
    for (const auto& v : w) {
      if (!v.is_number()) throw ValidationError("mixture: weights must be numbers");
      weights.push_back(v.get<double>());
    }
    std::vector<CopulaSpec> components;
    for (const auto& v : c) components.push_back(from_json(v, base_dir));
    return CopulaSpec::mixture(std::move(weights), std::move(components));
  }
  if (type == "grid") {
    expect_fields(j, type, {"path"});
    if (!j.at("path").is_string()) throw ValidationError("grid: field 'path' must be a string");
    const std::string path = j.at("path").get<std::string>();
    const std::filesystem::path resolved =
        std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;
    auto grid = std::make_shared<const GridCopula>(load_grid_csv(resolved));
    return CopulaSpec::grid(std::move(grid), path);
  }
  std::string options;
  for (auto t : kTypes) options += fmt::format("{}{}", options.empty() ? "" : ", ", t);
  throw ValidationError(fmt::format("spec: unknown type '{}' (expected one of {})", type, options));
}

json to_json(const CopulaSpec& spec) {
  json j;
  j["type"] = std::string(spec.type_name());
  if (const auto* f = spec.get_if<family::Frechet>()) {
    j["a"] = f->a;
    j["b"] = f->b;
  } else if (const auto* m = spec.get_if<family::Mardia>()) {
    j["theta"] = m->theta;
  } else if (const auto* mo = spec.get_if<family::MarshallOlkin>()) {
    j["a"] = mo->a;
    j["b"] = mo->b;
  } else if (const auto* mix = spec.get_if<family::Mixture>()) {
    j["weights"] = mix->weights;
    json components = json::array();
    for (const auto& c : mix->components) components.push_back(to_json(c));
    j["components"] = std::move(components);
  } else if (const auto* g = spec.get_if<family::GridRef>()) {
    j["path"] = g->path;
  }
  return j;
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("malformed JSON at byte {}: {}", e.byte, e.what()));
  }
}

}  // namespace

CopulaSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir) {
  try {
    return from_json(parse_document(text), base_dir);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("spec: {}", e.what()));
  }
}

CopulaSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read spec file '{}'", path.string()));
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_spec(text, path.parent_path());
}

std::string serialize_spec(const CopulaSpec& spec) { return to_json(spec).dump(); }

std::string canonical_json(std::string_view text) { return parse_document(text).dump(); }

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256: digest computation failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < length; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

std::string spec_digest(std::string_view json_text) { return sha256_hex(canonical_json(json_text)); }

}  // namespace copulalab
