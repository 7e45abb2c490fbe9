#pragma once

// Local best-practice corpus with BM25 retrieval. An index is immutable once
// built, so concurrent searches need no locking.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace mlfix::kb {

enum class DocumentSource { curated, web };

struct KBDocument {
    std::string doc_id;
    std::string title;
    std::string body;
    std::vector<std::string> tags;
    DocumentSource source = DocumentSource::curated;

    bool operator==(const KBDocument&) const = default;
};

struct SearchHit {
    std::string doc_id;
    double score = 0.0;
    std::string snippet;
};

class IndexError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercase, split on anything that is not an ASCII letter or digit, drop
/// tokens shorter than two characters.
std::vector<std::string> tokenize(std::string_view text);

KBDocument document_from_json(const nlohmann::json& json, const std::string& where);
nlohmann::json to_json(const KBDocument& doc);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;
    /// Throws IndexError on a duplicate doc_id or an empty body.
    explicit KnowledgeBase(std::vector<KBDocument> documents, Bm25Params params = {});

    std::size_t size() const { return docs_.size(); }
    const std::vector<KBDocument>& documents() const { return docs_; }
    const KBDocument* find(std::string_view doc_id) const;

    /// Top-k hits with positive score, score descending then doc_id.
    std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

    /// A new index holding this corpus plus `extra`. Documents whose id is
    /// already present are ignored, so web results never shadow curated ones.
    KnowledgeBase merged_with(const std::vector<KBDocument>& extra) const;

private:
    struct Posting {
        std::size_t doc;
        std::size_t tf;
    };

    std::vector<KBDocument> docs_;
    Bm25Params params_;
    std::vector<std::size_t> lengths_;
    double mean_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

/// Every *.json file under `dir` (sorted by name); each holds one document
/// object or an array of them.
std::vector<KBDocument> load_corpus_dir(const std::filesystem::path& dir);
/// The curated corpus compiled into the binary.
std::vector<KBDocument> seed_corpus();
/// MLFIX_KB_PATH when set, otherwise the seed corpus.
std::vector<KBDocument> default_corpus();

class WebSearchClient {
public:
    virtual ~WebSearchClient() = default;
    virtual std::vector<KBDocument> search(std::string_view query) const = 0;
};

/// Offline stand-in for a live search connector: replays documents from a
/// fixture mapping query text to document arrays. Unknown queries yield
/// nothing. Returned documents are always tagged source=web.
class StubWebSearch : public WebSearchClient {
public:
    StubWebSearch() = default;
    explicit StubWebSearch(std::map<std::string, std::vector<KBDocument>> fixtures);
    static StubWebSearch from_file(const std::filesystem::path& path);

    std::vector<KBDocument> search(std::string_view query) const override;

private:
    std::map<std::string, std::vector<KBDocument>> fixtures_;
};

}  // namespace mlfix::kb
