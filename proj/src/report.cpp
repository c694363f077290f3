// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/report.hpp"

#include <sstream>

#include "vtprompt/util.hpp"

namespace vtp {

namespace {

std::string cell(const std::string& key, double value, const std::map<std::string, double>& base) {
    std::string out = format_metric(key, value);
    if (auto it = base.find(key); it != base.end())
        out += "(" + format_delta(key, value - it->second) + ")";
    return out;
}

std::string metric_cell(const std::string& key, const MetricValue& v,
                        const std::map<std::string, double>& base) {
    if (!v.value) return "n/a (" + v.note + ")";
    return cell(key, *v.value, base);
}

} // namespace

std::string render_markdown_report(const MetricsReport& report,
                                   const std::optional<MetricsReport>& baseline) {
    std::map<std::string, double> base;
    if (baseline) base = baseline->flat();
    std::ostringstream out;

    if (!report.mme_subtasks.empty()) {
        out << "## MME\n\n";
        out << "| Subtask | Acc | Acc+ | Score |\n";
        out << "|---|---|---|---|\n";
        for (const auto& [name, s] : report.mme_subtasks) {
            out << "| " << name << " | " << cell("mme." + name + ".acc", s.acc, base) << " | "
                << cell("mme." + name + ".acc_plus", s.acc_plus, base) << " | "
                << cell("mme." + name + ".points", s.points, base) << " |\n";
        }
        if (report.mme_total)
            out << "| **total** |  |  | " << cell("mme.total", *report.mme_total, base) << " |\n";
        out << "\n";
    }

    if (report.mmb_overall) {
        out << "## MMB\n\n";
        out << "| Ability | Acc |\n";
        out << "|---|---|\n";
        for (const auto& [name, acc] : report.mmb_abilities)
            out << "| " << name << " | " << cell("mmb." + name, acc, base) << " |\n";
        out << "| **overall** | " << cell("mmb.overall", *report.mmb_overall, base) << " |\n\n";
    }

    if (!report.pope_settings.empty()) {
        out << "## POPE\n\n";
        out << "| Setting | Accuracy | Precision | Recall | F1 |\n";
        out << "|---|---|---|---|---|\n";
        for (const auto& [setting, m] : report.pope_settings) {
            const std::string p = "pope." + setting + ".";
            out << "| " << setting << " | " << metric_cell(p + "accuracy", m.accuracy, base)
                << " | " << metric_cell(p + "precision", m.precision, base) << " | "
                << metric_cell(p + "recall", m.recall, base) << " | "
                << metric_cell(p + "f1", m.f1, base) << " |\n";
        }
        out << "\nUnparsable answers are scored as negative predictions.\n\n";
    }

    if (!report.error_distribution.empty()) {
        out << "## Error categories\n\n";
        out << "| Category | Share |\n";
        out << "|---|---|\n";
        for (const auto& [name, pct] : report.error_distribution)
            out << "| " << name << " | " << format_fixed(pct, 1) << "% |\n";
        out << "\n";
    }

    return out.str();
}

std::string render_csv_report(const MetricsReport& report,
                              const std::optional<MetricsReport>& baseline) {
    auto flat = report.flat();
    std::map<std::string, double> base;
    if (baseline) base = baseline->flat();
    std::ostringstream out;
    out << (baseline ? "key,value,baseline,delta\n" : "key,value\n");
    for (const auto& [key, value] : flat) {
        out << key << "," << format_metric(key, value);
        if (auto it = base.find(key); baseline && it != base.end())
            out << "," << format_metric(key, it->second) << ","
                << format_delta(key, value - it->second);
        else if (baseline)
            out << ",,";
        out << "\n";
    }
    return out.str();
}

} // namespace vtp
