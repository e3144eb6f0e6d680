#include "leakaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"

namespace fs = std::filesystem;

namespace leakaudit {

void Corpus::validate(const std::vector<Document>& docs) {
    std::unordered_set<std::string> ids;
    for (const auto& doc : docs) {
        if (doc.id.empty()) throw Error("corpus document with empty id");
        if (!ids.insert(doc.id).second) throw Error("duplicate doc_id: " + doc.id);
        if (doc.text.find('\0') != std::string::npos) {
            throw Error("document contains NUL byte: " + doc.id);
        }
    }
}

Corpus Corpus::from_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
    std::vector<std::string> rel_paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            rel_paths.push_back(fs::relative(entry.path(), dir).generic_string());
        }
    }
    std::sort(rel_paths.begin(), rel_paths.end());
    std::vector<Document> docs;
    docs.reserve(rel_paths.size());
    for (const auto& rel : rel_paths) {
        docs.push_back({rel, read_file((fs::path(dir) / rel).string())});
    }
    return from_documents(std::move(docs));
}

Corpus Corpus::from_jsonl(const std::string& path) {
    std::vector<Document> docs;
    for (const auto& row : read_jsonl(path)) {
        if (!row.contains("id") || !row.contains("text")) {
            throw Error("corpus JSONL row missing id/text: " + path);
        }
        docs.push_back({row.at("id").get<std::string>(), row.at("text").get<std::string>()});
    }
    return from_documents(std::move(docs));
}

Corpus Corpus::from_documents(std::vector<Document> docs) {
    validate(docs);
    Corpus c;
    c.docs_ = std::move(docs);
    return c;
}

void Corpus::save_jsonl(const std::string& path) const {
    std::vector<nlohmann::json> rows;
    rows.reserve(docs_.size());
    for (const auto& doc : docs_) {
        rows.push_back({{"id", doc.id}, {"text", doc.text}});
    }
    write_jsonl(path, rows);
}

std::vector<std::string> Corpus::texts() const {
    std::vector<std::string> out;
    out.reserve(docs_.size());
    for (const auto& doc : docs_) out.push_back(doc.text);
    return out;
}

std::string Corpus::content_digest() const {
    Sha256 h;
    for (const auto& doc : docs_) {
        h.update_u64_le(doc.id.size());
        h.update(doc.id);
        h.update_u64_le(doc.text.size());
        h.update(doc.text);
    }
    return h.hex();
}

size_t Corpus::total_bytes() const {
    size_t n = 0;
    for (const auto& doc : docs_) n += doc.text.size();
    return n;
}

size_t Corpus::word_count() const {
    size_t n = 0;
    for (const auto& doc : docs_) {
        bool in_word = false;
        for (unsigned char c : doc.text) {
            const bool space = std::isspace(c) != 0;
            if (!space && !in_word) ++n;
            in_word = !space;
        }
    }
    return n;
}

} // namespace leakaudit
