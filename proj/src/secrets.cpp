#include "leakaudit/secrets.hpp"

#include <unordered_set>

#include <nlohmann/json.hpp>

#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

std::vector<SecretRecord> read_secrets_jsonl(const std::string& path) {
    std::vector<SecretRecord> out;
    std::unordered_set<std::string> ids;
    for (const auto& row : read_jsonl(path)) {
        SecretRecord s;
        s.id = row.at("id").get<std::string>();
        s.value = row.at("value").get<std::string>();
        s.kind = row.value("kind", std::string{});
        s.duplication = row.value("duplication", 1);
        if (s.value.empty()) throw Error("secret with empty value: " + s.id);
        if (s.value.find('\0') != std::string::npos) {
            throw Error("secret value contains NUL byte: " + s.id);
        }
        if (s.duplication < 1) throw Error("secret duplication must be >= 1: " + s.id);
        if (!ids.insert(s.id).second) throw Error("duplicate secret id: " + s.id);
        out.push_back(std::move(s));
    }
    return out;
}

void write_secrets_jsonl(const std::string& path, const std::vector<SecretRecord>& secrets) {
    std::vector<nlohmann::json> rows;
    rows.reserve(secrets.size());
    for (const auto& s : secrets) {
        nlohmann::json row = {
            {"schema", "secrets/v1"}, {"id", s.id},
            {"value", s.value},       {"kind", s.kind},
            {"duplication", s.duplication},
        };
        if (!s.placements.empty()) {
            nlohmann::json p = nlohmann::json::array();
            for (const auto& [doc, off] : s.placements) p.push_back({{"doc_id", doc}, {"offset", off}});
            row["placements"] = p;
        }
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

} // namespace leakaudit
