#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace leakaudit {

// Provenance sidecar written by every CLI command: what ran, over which
// inputs, producing which outputs, all content-addressed. Timestamps live
// only here, so re-running with identical inputs and seeds reproduces
// identical output digests.
struct RunManifest {
    std::string tool_version;
    std::string command_line;
    std::string config_digest;
    struct FileRef {
        std::string path;
        std::string digest;
    };
    std::vector<FileRef> inputs;
    std::vector<FileRef> outputs;
    std::string started_at;
    std::string finished_at;
    double wall_seconds = 0.0;
    std::string compressor_version;

    void add_input(const std::string& path);
    void add_output(const std::string& path);

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
};

} // namespace leakaudit
