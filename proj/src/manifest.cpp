#include "leakaudit/manifest.hpp"

#include <nlohmann/json.hpp>

#include "leakaudit/digest.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

using nlohmann::json;

void RunManifest::add_input(const std::string& path) {
    inputs.push_back({path, sha256_file_hex(path)});
}

void RunManifest::add_output(const std::string& path) {
    outputs.push_back({path, sha256_file_hex(path)});
}

json RunManifest::to_json() const {
    auto files = [](const std::vector<FileRef>& refs) {
        json out = json::array();
        for (const auto& f : refs) out.push_back({{"path", f.path}, {"digest", f.digest}});
        return out;
    };
    return {
        {"schema", "run_manifest/v1"},
        {"tool_version", tool_version},
        {"command_line", command_line},
        {"config_digest", config_digest},
        {"inputs", files(inputs)},
        {"outputs", files(outputs)},
        {"started_at", started_at},
        {"finished_at", finished_at},
        {"wall_seconds", wall_seconds},
        {"compressor_version", compressor_version},
    };
}

void RunManifest::save(const std::string& path) const {
    write_file(path, to_json().dump(2) + "\n");
}

} // namespace leakaudit
