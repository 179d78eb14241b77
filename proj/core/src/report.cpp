#include "lnn/report.hpp"

#include "lnn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

namespace lnn {

using nlohmann::json;

namespace {

json config_json(const TrainConfig& c) {
    return json{{"latent", c.latent_count},
                {"hidden", c.hidden_sizes},
                {"lambda", c.lambda},
                {"eta_initial", c.eta_initial},
                {"eta_final", c.eta_final},
                {"gamma", c.gamma},
                {"init_deviation", c.init_deviation},
                {"three_phase", c.three_phase},
                {"hidden_activation", to_string(c.hidden_activation)},
                {"seed", c.seed}};
}

json row_json(const MetricRow& r, bool include_timing) {
    json j{{"variant", r.variant}, {"split", r.split},       {"mae", r.mae},
           {"rmse", r.rmse},       {"count", r.count},       {"seed", r.seed},
           {"config", config_json(r.config)}};
    if (include_timing)
        j["seconds"] = r.seconds;
    if (r.failed) {
        j["failed"] = true;
        j["error"] = r.error;
    }
    return j;
}

std::string fixed(double x, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

/// Renders a grid of strings with the first column left-aligned and a
/// vertical bar after it.
std::string render(const std::vector<std::vector<std::string>>& cells) {
    if (cells.empty())
        return {};
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    std::ostringstream os;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const auto& row = cells[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0)
                os << std::left << std::setw(static_cast<int>(width[0])) << row[0] << " |";
            else
                os << ' ' << std::right << std::setw(static_cast<int>(width[i])) << row[i];
        }
        os << '\n';
        if (r == 0) {
            std::size_t total = width[0] + 2;
            for (std::size_t i = 1; i < width.size(); ++i)
                total += width[i] + 1;
            os << std::string(total, '-') << '\n';
        }
    }
    return os.str();
}

template <typename T>
std::vector<std::string> ordered_unique(const std::vector<T>& items) {
    std::vector<std::string> out;
    for (const auto& x : items)
        if (std::find(out.begin(), out.end(), x) == out.end())
            out.push_back(x);
    return out;
}

} // namespace

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "text" || name == "table")
        return ReportFormat::text;
    if (name == "json")
        return ReportFormat::json;
    throw ConfigError("unknown report format '" + name + "' (expected text or json)");
}

std::string config_summary(const TrainConfig& c) {
    std::ostringstream os;
    os << "t=" << c.latent_count << " hidden=";
    if (c.hidden_sizes.empty())
        os << 0;
    for (std::size_t i = 0; i < c.hidden_sizes.size(); ++i)
        os << (i ? "," : "") << c.hidden_sizes[i];
    os << " lambda=" << c.lambda;
    return os.str();
}

std::string metrics_json(std::span<const MetricRow> rows, bool include_timing) {
    json arr = json::array();
    for (const MetricRow& r : rows)
        arr.push_back(row_json(r, include_timing));
    return json{{"metrics", arr}}.dump(2) + "\n";
}

std::string metrics_table(std::span<const MetricRow> rows) {
    std::vector<std::string> variants;
    std::vector<std::string> splits;
    for (const MetricRow& r : rows) {
        variants.push_back(r.variant);
        splits.push_back(r.split);
    }
    variants = ordered_unique(variants);
    splits = ordered_unique(splits);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{""};
    header.insert(header.end(), variants.begin(), variants.end());
    cells.push_back(header);
    for (const std::string& split : splits) {
        std::vector<std::string> line{split};
        for (const std::string& v : variants) {
            std::string cell = "-";
            for (const MetricRow& r : rows)
                if (r.variant == v && r.split == split)
                    cell = r.failed ? "failed" : fixed(r.mae, 4);
            line.push_back(cell);
        }
        cells.push_back(line);
    }
    return render(cells);
}

std::string timing_table(std::span<const MetricRow> rows) {
    std::vector<std::string> variants;
    for (const MetricRow& r : rows)
        variants.push_back(r.variant);
    variants = ordered_unique(variants);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{""};
    header.insert(header.end(), variants.begin(), variants.end());
    cells.push_back(header);
    std::vector<std::string> train_row{"train"};
    std::vector<std::string> cv_row{"Ave CV"};
    bool any_cv = false;
    for (const std::string& v : variants) {
        std::string train_cell = "-";
        std::string cv_cell = "-";
        for (const MetricRow& r : rows) {
            if (r.variant != v)
                continue;
            if (r.split == "test")
                train_cell = fixed(r.seconds, 1);
            if (r.split.size() > 2 && r.split.ends_with("CV")) {
                cv_row[0] = "Ave " + r.split;
                any_cv = true;
                int k = std::stoi(r.split.substr(0, r.split.size() - 2));
                cv_cell = fixed(r.seconds / k, 1);
            }
        }
        train_row.push_back(train_cell);
        cv_row.push_back(cv_cell);
    }
    cells.push_back(train_row);
    if (any_cv)
        cells.push_back(cv_row);
    return render(cells);
}

std::string grid_json(const GridResult& result) {
    json points = json::array();
    for (const GridPoint& p : result.points) {
        json j{{"config", config_json(p.config)}, {"seconds", p.seconds}};
        if (p.diverged)
            j["error"] = p.error;
        else
            j["validation_mae"] = p.validation_mae;
        points.push_back(j);
    }
    return json{{"variant", to_string(result.kind)},
                {"best", config_json(result.best)},
                {"best_validation_mae", result.best_mae},
                {"points", points}}
               .dump(2) +
           "\n";
}

std::string grid_table(const GridResult& result) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"config", "validation MAE", "seconds"});
    for (const GridPoint& p : result.points)
        cells.push_back({config_summary(p.config),
                         p.diverged ? std::string("diverged") : fixed(p.validation_mae, 4),
                         fixed(p.seconds, 1)});
    std::string out = render(cells);
    out += "best (" + to_string(result.kind) + "): " + config_summary(result.best) +
           "  validation MAE " + fixed(result.best_mae, 4) + "\n";
    return out;
}

std::string cv_json(const CvReport& report) {
    json folds = json::array();
    for (const MetricRow& r : report.folds)
        folds.push_back(row_json(r, true));
    return json{{"summary", row_json(report.summary, true)},
                {"failed_folds", report.failed_folds},
                {"folds", folds}}
               .dump(2) +
           "\n";
}

std::string coldstart_json(std::span<const ColdStartReport> reports) {
    json arr = json::array();
    for (const ColdStartReport& rep : reports) {
        json conds = json::array();
        for (const ColdStartCondition& c : rep.conditions) {
            json j{{"label", c.label},         {"items", c.items},
                   {"held", c.held_count},     {"empty", c.empty},
                   {"fallbacks", c.fallback_count}, {"seconds", c.seconds}};
            if (!c.empty) {
                j["mae"] = c.mae;
                j["rmse"] = c.rmse;
                j["genre_mean_mae"] = c.baseline_mae;
            }
            conds.push_back(j);
        }
        arr.push_back(json{{"variant", rep.variant}, {"conditions", conds}});
    }
    return json{{"coldstart", arr}}.dump(2) + "\n";
}

std::string coldstart_table(std::span<const ColdStartReport> reports) {
    if (reports.empty())
        return {};
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"alg"};
    for (const ColdStartCondition& c : reports.front().conditions)
        header.push_back(c.label);
    cells.push_back(header);
    for (const ColdStartReport& rep : reports) {
        std::vector<std::string> line{rep.variant};
        for (const ColdStartCondition& c : rep.conditions)
            line.push_back(c.empty ? "-" : fixed(c.mae, 3));
        cells.push_back(line);
    }
    std::vector<std::string> base{"genre-mean"};
    for (const ColdStartCondition& c : reports.front().conditions)
        base.push_back(c.empty ? "-" : fixed(c.baseline_mae, 3));
    cells.push_back(base);
    return render(cells);
}

} // namespace lnn
