#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vservo/sim.hpp"

// Scenario files are line-oriented "key = value" text. Keys are dotted
// (camera.width); a "[camera]" header prefixes the keys that follow it.
// '#' starts a comment. Unknown or repeated keys are errors.

namespace vservo::config {

inline constexpr std::string_view kEnvPrefix = "VSERVO_";

/// Every recognized key, in dump order.
std::vector<std::string> known_keys();

/// Sets one key from its textual value. line is used only in error messages.
void set_value(sim::ScenarioConfig& cfg, std::string_view key, std::string_view value,
               std::size_t line = 0);

/// Applies the assignments in a config stream on top of base.
sim::ScenarioConfig parse(std::istream& is, sim::ScenarioConfig base = {});

/// Throws IoError when the file cannot be read.
sim::ScenarioConfig load(const std::filesystem::path& path, sim::ScenarioConfig base = {});

/// "key=value", as given to --set.
void apply_override(sim::ScenarioConfig& cfg, std::string_view assignment);

/// Maps VSERVO_CAMERA__WIDTH=320 to camera.width = 320: the prefix is dropped,
/// "__" becomes '.', and the rest is lowercased. Entries without the prefix
/// are ignored.
void apply_environment(sim::ScenarioConfig& cfg, std::span<const std::string> entries);

/// Collects the current process environment as NAME=VALUE strings.
std::vector<std::string> process_environment();

/// Complete resolved configuration in the file format; parse(dump(c)) == c.
std::string dump(const sim::ScenarioConfig& cfg);

}  // namespace vservo::config
