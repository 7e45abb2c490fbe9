#include "mlfix/ingest/report.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

#include "mlfix/artifact/catalog.hpp"
#include "mlfix/artifact/codec.hpp"

namespace mlfix::ingest {

using artifact::Action;
using artifact::Diagnosis;
using artifact::Finding;

std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "markdown") return ReportFormat::markdown;
    if (name == "plain") return ReportFormat::plain;
    return std::nullopt;
}

std::string finding_title(std::string_view finding_id) {
    const auto dot = finding_id.find('.');
    const auto tail = dot == std::string_view::npos ? finding_id : finding_id.substr(dot + 1);
    if (finding_id.substr(0, dot) == "checks") {
        if (const auto entry = artifact::find_check(tail)) return std::string(entry->display_name);
    }
    std::string out(tail);
    for (auto& c : out) {
        if (c == '_') c = ' ';
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

namespace {

// Scores are products of weights and confidences; two decimals is plenty.
std::string score_text(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", score);
    return buf;
}


std::string evidence_line(const Finding& f) {
    std::string out;
    for (const auto& e : f.evidence) {
        if (!out.empty()) out += "; ";
        const auto check = artifact::find_check(e.check_id);
        out += check ? std::string(check->display_name) : e.check_id;
        out += ": ";
        out += artifact::metric_display_name(e.metric);
        out += " ";
        out += artifact::format_double(e.value);
    }
    return out;
}

const Action* action_for(const Diagnosis& d, const std::string& finding_id) {
    for (const auto& a : d.actions) {
        for (const auto& id : a.linked_findings) {
            if (id == finding_id) return &a;
        }
    }
    return nullptr;
}

bool linked_to_any(const Diagnosis& d, const Action& a) {
    for (const auto& id : a.linked_findings) {
        for (const auto& rf : d.ranked_findings) {
            if (rf.finding.finding_id == id) return true;
        }
    }
    return false;
}

std::string cell(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

void markdown(std::ostringstream& out, const Diagnosis& d) {
    out << "# Diagnosis\n\n";
    if (d.degraded) out << "> Degraded mode: language model unavailable, rule-based analysis only.\n\n";
    if (!d.summary.empty()) out << cell(d.summary) << "\n\n";
    if (d.ranked_findings.empty()) {
        out << "No significant issues detected.\n";
        return;
    }
    out << "| Finding | Action |\n|---|---|\n";
    for (const auto& rf : d.ranked_findings) {
        const auto& f = rf.finding;
        out << "| **" << cell(finding_title(f.finding_id)) << "** (" << artifact::to_string(f.severity)
            << ", score " << score_text(rf.rank_score) << ")";
        if (!f.description.empty()) out << "<br>" << cell(f.description);
        if (!f.evidence.empty()) out << "<br>*" << cell(evidence_line(f)) << "*";
        out << " | ";
        if (const auto* a = action_for(d, f.finding_id)) {
            out << "**" << cell(a->action) << "**";
            if (!a->rationale.empty()) out << "<br>" << cell(a->rationale);
        }
        out << " |\n";
    }
    for (const auto& a : d.actions) {
        if (linked_to_any(d, a)) continue;
        out << " | **" << cell(a.action) << "**<br>" << cell(a.rationale) << " |\n";
    }
    if (!d.hypotheses.empty()) {
        out << "\n## Hypotheses\n\n";
        for (const auto& h : d.hypotheses) {
            out << "- " << cell(h.statement) << " (plausibility " << artifact::format_double(h.plausibility) << ")";
            if (!h.kb_citations.empty()) {
                out << " [";
                for (std::size_t i = 0; i < h.kb_citations.size(); ++i) out << (i ? ", " : "") << h.kb_citations[i];
                out << "]";
            }
            out << "\n";
        }
    }
    out << "\nConsensus: " << d.consensus.samples << " samples, agreement "
        << artifact::format_double(d.consensus.agreement) << "\n";
}

void plain(std::ostringstream& out, const Diagnosis& d) {
    out << "DIAGNOSIS\n";
    if (d.degraded) out << "(degraded mode: language model unavailable, rule-based analysis only)\n";
    if (!d.summary.empty()) out << d.summary << "\n";
    out << "\n";
    if (d.ranked_findings.empty()) {
        out << "No significant issues detected.\n";
        return;
    }
    std::size_t rank = 1;
    for (const auto& rf : d.ranked_findings) {
        const auto& f = rf.finding;
        out << rank++ << ". " << finding_title(f.finding_id) << " [" << artifact::to_string(f.severity) << ", score "
            << score_text(rf.rank_score) << "]\n";
        if (!f.description.empty()) out << "   " << f.description << "\n";
        if (!f.evidence.empty()) out << "   Evidence: " << evidence_line(f) << "\n";
        if (const auto* a = action_for(d, f.finding_id)) {
            out << "   Action: " << a->action << "\n";
            if (!a->rationale.empty()) out << "   Rationale: " << a->rationale << "\n";
        }
    }
    for (const auto& a : d.actions) {
        if (linked_to_any(d, a)) continue;
        out << "-  Action: " << a.action << "\n   Rationale: " << a.rationale << "\n";
    }
    if (!d.hypotheses.empty()) {
        out << "\nHypotheses:\n";
        for (const auto& h : d.hypotheses) {
            out << "  - " << h.statement << " (plausibility " << artifact::format_double(h.plausibility) << ")\n";
        }
    }
    out << "\nConsensus: " << d.consensus.samples << " samples, agreement "
        << artifact::format_double(d.consensus.agreement) << "\n";
}

}  // namespace

std::string render_report(const Diagnosis& diagnosis, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::markdown) {
        markdown(out, diagnosis);
    } else {
        plain(out, diagnosis);
    }
    return out.str();
}

}  // namespace mlfix::ingest
