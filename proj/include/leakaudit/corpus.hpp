#pragma once

#include <string>
#include <vector>

namespace leakaudit {

struct Document {
    std::string id;
    std::string text;
};

// An ordered set of text documents. Document text must not contain NUL
// (0x00): that byte is reserved as the suffix-index sentinel and is rejected
// when a corpus is loaded or constructed.
class Corpus {
public:
    Corpus() = default;

    // doc_id = path relative to `dir`, for every *.txt file, sorted.
    static Corpus from_directory(const std::string& dir);
    // JSONL rows {"id": str, "text": str}.
    static Corpus from_jsonl(const std::string& path);
    static Corpus from_documents(std::vector<Document> docs);

    void save_jsonl(const std::string& path) const;

    const std::vector<Document>& documents() const { return docs_; }
    std::vector<Document>& documents() { return docs_; }
    std::vector<std::string> texts() const;

    // SHA-256 over the length-prefixed (id, text) sequence; identifies the
    // corpus content independent of storage layout.
    std::string content_digest() const;

    size_t total_bytes() const;
    size_t word_count() const; // whitespace-delimited words over all documents
    bool empty() const { return docs_.empty(); }

private:
    static void validate(const std::vector<Document>& docs);
    std::vector<Document> docs_;
};

} // namespace leakaudit
