#pragma once

// JSON encoding of CopulaSpec:
//   {"type": "independence" | "w" | "m"}
//   {"type": "frechet", "a": .., "b": ..}
//   {"type": "mardia", "theta": ..}
//   {"type": "marshall-olkin", "a": .., "b": ..}
//   {"type": "mixture", "weights": [..], "components": [spec, ..]}
//   {"type": "grid", "path": "file.csv"}
// Unknown fields are rejected.

#include <filesystem>
#include <string>
#include <string_view>

#include "copulalab/copula.hpp"

namespace copulalab {

/// Grid paths are resolved against base_dir. Throws ValidationError on
/// malformed JSON (with byte position), schema violations and invalid parameters.
CopulaSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads and parses a spec file; grid paths resolve relative to its directory.
CopulaSpec load_spec(const std::filesystem::path& path);

/// Canonical JSON: sorted keys, no insignificant whitespace.
std::string serialize_spec(const CopulaSpec& spec);

/// Canonical re-serialization of an arbitrary JSON document.
std::string canonical_json(std::string_view text);

std::string sha256_hex(std::string_view data);

/// sha256 of the canonical form of a JSON document.
std::string spec_digest(std::string_view json_text);

}  // namespace copulalab
