#include "mlfix/kb/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mlfix/embedded.hpp"

namespace mlfix::kb {

namespace resources {
std::span<const EmbeddedFile> files();
}

namespace {

using Json = nlohmann::json;

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::vector<std::string_view> passages(std::string_view body) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < body.size()) {
        auto end = body.find("\n\n", start);
        if (end == std::string_view::npos) end = body.size();
        auto p = body.substr(start, end - start);
        while (!p.empty() && (p.front() == '\n' || p.front() == ' ')) p.remove_prefix(1);
        while (!p.empty() && (p.back() == '\n' || p.back() == ' ')) p.remove_suffix(1);
        if (!p.empty()) out.push_back(p);
        start = end + 2;
    }
    return out;
}

std::string snippet_for(const KBDocument& doc, const std::set<std::string>& terms) {
    const auto parts = passages(doc.body);
    if (parts.empty()) return {};
    for (auto p : parts) {
        for (const auto& t : tokenize(p)) {
            if (terms.count(t)) return std::string(p);
        }
    }
    // The match was in the title or tags only.
    return std::string(parts.front());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<KBDocument> documents_from(const Json& json, const std::string& where) {
    std::vector<KBDocument> out;
    if (json.is_array()) {
        for (std::size_t i = 0; i < json.size(); ++i) {
            out.push_back(document_from_json(json[i], where + "[" + std::to_string(i) + "]"));
        }
    } else {
        out.push_back(document_from_json(json, where));
    }
    return out;
}

Json parse(std::string_view text, const std::string& where) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw IndexError(where + ": " + e.what());
    }
}

std::string query_key(std::string_view query) {
    std::string key;
    for (const auto& t : tokenize(query)) {
        if (!key.empty()) key += ' ';
        key += t;
    }
    return key;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        if (is_alnum(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

KBDocument document_from_json(const Json& json, const std::string& where) {
    if (!json.is_object()) throw IndexError(where + ": document must be an object");
    auto str = [&](const char* key) {
        const auto it = json.find(key);
        if (it == json.end() || !it->is_string()) throw IndexError(where + "." + key + ": expected a string");
        return it->get<std::string>();
    };
    KBDocument doc;
    doc.doc_id = str("doc_id");
    doc.title = str("title");
    doc.body = str("body");
    if (const auto it = json.find("tags"); it != json.end()) {
        if (!it->is_array()) throw IndexError(where + ".tags: expected an array");
        for (const auto& t : *it) {
            if (!t.is_string()) throw IndexError(where + ".tags: expected strings");
            doc.tags.push_back(t.get<std::string>());
        }
    }
    const auto source = json.contains("source") ? str("source") : std::string("curated");
    if (source == "curated") {
        doc.source = DocumentSource::curated;
    } else if (source == "web") {
        doc.source = DocumentSource::web;
    } else {
        throw IndexError(where + ".source: expected curated or web");
    }
    return doc;
}

Json to_json(const KBDocument& doc) {
    return {{"doc_id", doc.doc_id},
            {"title", doc.title},
            {"body", doc.body},
            {"tags", doc.tags},
            {"source", doc.source == DocumentSource::web ? "web" : "curated"}};
}

KnowledgeBase::KnowledgeBase(std::vector<KBDocument> documents, Bm25Params params)
    : docs_(std::move(documents)), params_(params) {
    std::set<std::string> ids;
    lengths_.reserve(docs_.size());
    std::size_t total = 0;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        const auto& doc = docs_[d];
        if (doc.doc_id.empty()) throw IndexError("document with empty doc_id");
        if (!ids.insert(doc.doc_id).second) throw IndexError("duplicate doc_id: " + doc.doc_id);
        if (doc.body.empty()) throw IndexError("empty body in document " + doc.doc_id);
        std::string text = doc.title + "\n" + doc.body;
        for (const auto& t : doc.tags) text += "\n" + t;
        const auto tokens = tokenize(text);
        std::map<std::string, std::size_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, n] : tf) postings_[term].push_back({d, n});
        lengths_.push_back(tokens.size());
        total += tokens.size();
    }
    if (!docs_.empty()) mean_length_ = static_cast<double>(total) / static_cast<double>(docs_.size());
}

const KBDocument* KnowledgeBase::find(std::string_view doc_id) const {
    for (const auto& d : docs_) {
        if (d.doc_id == doc_id) return &d;
    }
    return nullptr;
}

std::vector<SearchHit> KnowledgeBase::search(std::string_view query, std::size_t k) const {
    const auto tokens = tokenize(query);
    const std::set<std::string> terms(tokens.begin(), tokens.end());
    if (terms.empty() || docs_.empty() || k == 0) return {};
    const double n = static_cast<double>(docs_.size());
    std::vector<double> scores(docs_.size(), 0.0);
    for (const auto& term : terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const double tf = static_cast<double>(p.tf);
            const double norm = 1.0 - params_.b + params_.b * static_cast<double>(lengths_[p.doc]) / mean_length_;
            scores[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
        }
    }
    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (scores[d] > 0.0) order.push_back(d);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs_[a].doc_id < docs_[b].doc_id;
    });
    if (order.size() > k) order.resize(k);
    std::vector<SearchHit> hits;
    for (auto d : order) hits.push_back({docs_[d].doc_id, scores[d], snippet_for(docs_[d], terms)});
    return hits;
}

KnowledgeBase KnowledgeBase::merged_with(const std::vector<KBDocument>& extra) const {
    auto docs = docs_;
    std::set<std::string> ids;
    for (const auto& d : docs) ids.insert(d.doc_id);
    for (const auto& d : extra) {
        if (ids.insert(d.doc_id).second) docs.push_back(d);
    }
    return KnowledgeBase(std::move(docs), params_);
}

std::vector<KBDocument> load_corpus_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IndexError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<KBDocument> out;
    for (const auto& f : files) {
        const auto where = f.filename().string();
        for (auto& d : documents_from(parse(read_text(f), where), where)) out.push_back(std::move(d));
    }
    return out;
}

std::vector<KBDocument> seed_corpus() {
    std::vector<KBDocument> out;
    for (const auto& f : resources::files()) {
        const std::string where(f.path);
        for (auto& d : documents_from(parse(f.content, where), where)) out.push_back(std::move(d));
    }
    return out;
}

std::vector<KBDocument> default_corpus() {
    if (const char* path = std::getenv("MLFIX_KB_PATH"); path != nullptr && *path != '\0') {
        return load_corpus_dir(path);
    }
    return seed_corpus();
}

StubWebSearch::StubWebSearch(std::map<std::string, std::vector<KBDocument>> fixtures) {
    for (auto& [query, docs] : fixtures) {
        for (auto& d : docs) d.source = DocumentSource::web;
        fixtures_[query_key(query)] = std::move(docs);
    }
}

StubWebSearch StubWebSearch::from_file(const std::filesystem::path& path) {
    const auto where = path.filename().string();
    const auto json = parse(read_text(path), where);
    if (!json.is_object()) throw IndexError(where + ": expected an object mapping query to documents");
    std::map<std::string, std::vector<KBDocument>> fixtures;
    for (const auto& [query, docs] : json.items()) {
        fixtures[query] = documents_from(docs, where + "." + query);
    }
    return StubWebSearch(std::move(fixtures));
}

std::vector<KBDocument> StubWebSearch::search(std::string_view query) const {
    const auto it = fixtures_.find(query_key(query));
    return it == fixtures_.end() ? std::vector<KBDocument>{} : it->second;
}

}  // namespace mlfix::kb
