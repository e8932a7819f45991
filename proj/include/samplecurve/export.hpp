#pragma once

// Result serialization: the result JSON, the two CSV schemas, a learning-curve
// SVG, and atomic file writing (temp file + rename).

#include "samplecurve/config.hpp"
#include "samplecurve/search.hpp"
#include "samplecurve/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace samplecurve {

inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write file: " + tmp.string());
        }
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline Json json_real(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

} // namespace detail

/// Per-n summary export: one row per (n, metric). The q20/q20_se columns hold
/// the failure-adjusted assurance quantile at the configured level.
inline std::string summaries_to_csv(const std::vector<PerformanceSummary>& summaries) {
    std::ostringstream out;
    out << "n,metric,R,failures,mean,sd,q20,q20_se\n";
    for (const auto& summary : summaries) {
        for (const auto& ms : summary.per_metric) {
            out << summary.n << ',' << ms.metric << ',' << summary.replicates << ','
                << ms.failures << ',' << detail::csv_number(ms.mean) << ','
                << detail::csv_number(ms.sd) << ',' << detail::csv_number(ms.quantile)
                << ',' << detail::csv_number(ms.quantile_se) << '\n';
        }
    }
    return out.str();
}

/// Learning-curve export for one metric.
inline std::string metric_curve_to_csv(const MetricResult& mr) {
    std::ostringstream out;
    out << "n,y,se,gp_mean,gp_sd\n";
    for (const auto& row : mr.observations) {
        out << row.n << ',' << detail::csv_number(row.stat) << ','
            << detail::csv_number(row.stat_se) << ','
            << detail::csv_number(row.gp_mean) << ','
            << detail::csv_number(row.gp_sd) << '\n';
    }
    return out.str();
}

inline Json result_to_json(const SampleSizeResult& result, const RunConfig& cfg) {
    Json j;
    if (result.criterion.type == CriterionType::assurance) {
        j["criterion"] = Json{{"type", "assurance"}, {"delta", result.criterion.delta}};
    } else {
        j["criterion"] = Json{{"type", "mean"}};
    }
    j["combined"] = Json{
        {"n_required", result.combined_n.has_value() ? Json(*result.combined_n) : Json(nullptr)},
        {"not_confirmed", result.not_confirmed},
        {"budget_exhausted", result.budget_exhausted},
    };

    Json metrics = Json::array();
    for (const auto& mr : result.metrics) {
        Json m;
        m["metric"] = mr.metric;
        m["orientation"] = mr.orientation == Orientation::maximize ? "maximize" : "minimize";
        m["threshold"] = mr.threshold;
        m["status"] = metric_solve_status_name(mr.status);
        m["n_required"] = mr.n_required.has_value() ? Json(*mr.n_required) : Json(nullptr);
        m["ci_low"] = mr.ci_low;
        m["ci_high"] = mr.ci_high;
        Json obs = Json::array();
        for (const auto& row : mr.observations) {
            obs.push_back(Json{
                {"n", row.n},
                {"replicates", row.replicates},
                {"failures", row.failures},
                {"mean", detail::json_real(row.mean)},
                {"sd", detail::json_real(row.sd)},
                {"stat", detail::json_real(row.stat)},
                {"stat_se", detail::json_real(row.stat_se)},
                {"gp_mean", detail::json_real(row.gp_mean)},
                {"gp_sd", detail::json_real(row.gp_sd)},
            });
        }
        m["observations"] = obs;
        if (mr.gp.has_value()) {
            m["gp"] = Json{
                {"sigma_f", mr.gp->sigma_f},
                {"length_scale", mr.gp->length_scale},
                {"log_marginal_likelihood", mr.gp->log_marginal_likelihood},
                {"jitter", mr.gp->jitter},
                {"mean_non_monotone", mr.gp->mean_non_monotone},
            };
        } else {
            m["gp"] = nullptr;
        }
        if (mr.power_law.has_value()) {
            m["power_law"] = Json{
                {"a", mr.power_law->a},
                {"b", mr.power_law->b},
                {"alpha", mr.power_law->alpha},
                {"sse", mr.power_law->sse},
            };
        } else {
            m["power_law"] = nullptr;
        }
        metrics.push_back(m);
    }
    j["metrics"] = metrics;
    j["tuned_generator"] = tuned_generator_to_json(result.generator);

    Json baselines;
    if (result.epv_baseline.has_value()) {
        baselines["epv"] = *result.epv_baseline;
    }
    j["baselines"] = baselines;

    if (result.confirmation.has_value()) {
        Json conf;
        conf["n"] = result.confirmation->n;
        conf["replicates"] = result.confirmation->replicates;
        Json per = Json::array();
        for (const auto& ms : result.confirmation->per_metric) {
            per.push_back(Json{
                {"metric", ms.metric},
                {"successes", ms.successes},
                {"failures", ms.failures},
                {"mean", detail::json_real(ms.mean)},
                {"sd", detail::json_real(ms.sd)},
                {"quantile", detail::json_real(ms.quantile)},
                {"quantile_se", detail::json_real(ms.quantile_se)},
            });
        }
        conf["per_metric"] = per;
        Json checks = Json::array();
        for (const auto& c : result.confirmation_checks) {
            checks.push_back(Json{
                {"metric", c.metric},
                {"threshold", c.threshold},
                {"stat", detail::json_real(c.stat)},
                {"stat_se", detail::json_real(c.stat_se)},
                {"passed", c.passed},
            });
        }
        conf["checks"] = checks;
        j["confirmation"] = conf;
    } else {
        j["confirmation"] = nullptr;
    }

    j["total_replicate_fits"] = result.total_replicate_fits;
    j["evaluated_n"] = result.evaluated_n;
    j["config"] = run_config_to_json(cfg);
    return j;
}

/// Plain-text report for humans; the JSON stays the machine interface.
inline std::string result_to_text(const SampleSizeResult& result) {
    std::ostringstream out;
    out << "sample size result ("
        << (result.criterion.type == CriterionType::assurance
                ? "assurance " + detail::csv_number(result.criterion.delta)
                : std::string("mean criterion"))
        << ")\n";
    out << "  tuned generator: intercept=" << detail::csv_number(result.generator.intercept)
        << " scale=" << detail::csv_number(result.generator.coefficient_scale)
        << " achieved_performance="
        << detail::csv_number(result.generator.achieved_performance) << "\n";
    for (const auto& mr : result.metrics) {
        out << "  " << mr.metric << ": status=" << metric_solve_status_name(mr.status);
        if (mr.n_required.has_value()) {
            out << " n_required=" << *mr.n_required << " (ci " << mr.ci_low << ".."
                << mr.ci_high << ")";
        }
        out << " threshold=" << detail::csv_number(mr.threshold) << "\n";
    }
    if (result.combined_n.has_value()) {
        out << "  combined n_required=" << *result.combined_n
            << (result.not_confirmed ? " NOT CONFIRMED" : " confirmed") << "\n";
    } else {
        out << "  no metric reachable\n";
    }
    if (result.epv_baseline.has_value()) {
        out << "  epv baseline: " << *result.epv_baseline << "\n";
    }
    out << "  total replicate fits: " << result.total_replicate_fits << "\n";
    return out.str();
}

/// Single-file SVG of the learning curve: observations, GP mean, 80% band,
/// threshold, and the recommended n.
inline std::string metric_curve_to_svg(const MetricResult& mr) {
    constexpr int width = 760, height = 480;
    constexpr int ml = 70, mr_ = 20, mt = 30, mb = 50;
    const double plot_w = width - ml - mr_;
    const double plot_h = height - mt - mb;

    std::vector<const ObservationRow*> rows;
    for (const auto& r : mr.observations) {
        if (r.stat_valid) rows.push_back(&r);
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (rows.empty()) {
        svg << "<text x=\"30\" y=\"40\">no valid observations for " << mr.metric
            << "</text>\n</svg>\n";
        return svg.str();
    }

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto* r : rows) {
        x_lo = std::min(x_lo, std::log10(static_cast<double>(r->n)));
        x_hi = std::max(x_hi, std::log10(static_cast<double>(r->n)));
        const double band = std::isnan(r->gp_sd) ? 0.0 : 1.28 * r->gp_sd;
        y_lo = std::min({y_lo, r->stat - 2.0 * r->stat_se, r->stat - band});
        y_hi = std::max({y_hi, r->stat + 2.0 * r->stat_se, r->stat + band});
    }
    y_lo = std::min(y_lo, mr.threshold);
    y_hi = std::max(y_hi, mr.threshold);
    const double y_pad = 0.08 * (y_hi - y_lo + 1e-12);
    y_lo -= y_pad;
    y_hi += y_pad;
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;

    auto px = [&](double log10n) {
        return ml + plot_w * (log10n - x_lo) / (x_hi - x_lo);
    };
    auto py = [&](double y) { return mt + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    // x ticks at decades and half-decades inside range
    for (double d = std::floor(x_lo); d <= std::ceil(x_hi); d += 0.5) {
        if (d < x_lo || d > x_hi) continue;
        const double x = px(d);
        svg << "<line x1=\"" << x << "\" y1=\"" << mt + plot_h << "\" x2=\"" << x
            << "\" y2=\"" << mt + plot_h + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << mt + plot_h + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">"
            << detail::csv_number(std::pow(10.0, d)) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / 5.0;
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << ml
            << "\" y2=\"" << py(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << detail::csv_number(y)
            << "</text>\n";
    }

    // GP band and mean along the observed rows
    bool have_gp = true;
    for (const auto* r : rows) have_gp = have_gp && !std::isnan(r->gp_mean);
    if (have_gp && rows.size() > 1) {
        std::ostringstream band, mean;
        band << "<polygon fill=\"#c6dbef\" stroke=\"none\" points=\"";
        for (const auto* r : rows) {
            band << px(std::log10(static_cast<double>(r->n))) << ','
                 << py(r->gp_mean + 1.28 * r->gp_sd) << ' ';
        }
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            band << px(std::log10(static_cast<double>((*it)->n))) << ','
                 << py((*it)->gp_mean - 1.28 * (*it)->gp_sd) << ' ';
        }
        band << "\"/>\n";
        mean << "<polyline fill=\"none\" stroke=\"#2171b5\" stroke-width=\"2\" points=\"";
        for (const auto* r : rows) {
            mean << px(std::log10(static_cast<double>(r->n))) << ','
                 << py(r->gp_mean) << ' ';
        }
        mean << "\"/>\n";
        svg << band.str() << mean.str();
    }

    svg << "<line x1=\"" << ml << "\" y1=\"" << py(mr.threshold) << "\" x2=\""
        << ml + plot_w << "\" y2=\"" << py(mr.threshold)
        << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    if (mr.n_required.has_value()) {
        const double x = px(std::log10(static_cast<double>(*mr.n_required)));
        svg << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
            << mt + plot_h << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4,4\"/>\n";
    }
    for (const auto* r : rows) {
        const double x = px(std::log10(static_cast<double>(r->n)));
        svg << "<line x1=\"" << x << "\" y1=\"" << py(r->stat - r->stat_se) << "\" x2=\""
            << x << "\" y2=\"" << py(r->stat + r->stat_se) << "\" stroke=\"#444\"/>\n";
        svg << "<circle cx=\"" << x << "\" cy=\"" << py(r->stat)
            << "\" r=\"3.5\" fill=\"#333\"/>\n";
    }
    svg << "<text x=\"" << ml << "\" y=\"" << mt - 10 << "\" font-size=\"13\">"
        << mr.metric << " vs development sample size (threshold "
        << detail::csv_number(mr.threshold) << ")</text>\n";
    svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">n (log scale)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace samplecurve
