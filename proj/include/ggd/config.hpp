#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ggd/discriminate.hpp"
#include "ggd/probe.hpp"
#include "ggd/sampler.hpp"

namespace ggd {

/// Every tunable of a run with defaults materialised.
struct RunConfig {
    TrainConfig train;
    ProbeConfig probe;
    std::size_t power = 5;
    bool minibatch = false;
    MinibatchConfig mb;
    std::size_t workers = 1;

    /// Sets one key from its text form. Unknown keys and malformed values
    /// throw ConfigError naming the key.
    void set(std::string_view key, std::string_view value);
    void validate() const;
    /// "key = value" for every key, sorted by key.
    std::vector<std::string> resolved_lines() const;
    /// FNV-1a over resolved_lines(); independent of input key order.
    std::uint64_t hash() const;
};

/// Parses "key = value" lines; '#' starts a comment. Duplicate keys keep the
/// last value. Throws ParseError on lines without '='.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

/// Applies file values, then overrides, onto a default RunConfig.
RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides);

std::string hex64(std::uint64_t v);

struct RunManifest {
    std::string command;
    RunConfig config;
    std::map<std::string, std::string> input_checksums;  // path -> hex checksum
    std::vector<std::string> artifacts;
    double wall_seconds = 0.0;
    /// Informational only; 0 where the platform does not report it.
    std::uint64_t peak_rss_bytes = 0;

    std::string to_json() const;
    /// Writes to a temporary sibling then renames it into place.
    void write(const std::filesystem::path& path) const;
};

/// Peak resident set size of this process, or 0 if unavailable.
std::uint64_t peak_rss_bytes();

/// Writes `bytes` to path via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ggd
