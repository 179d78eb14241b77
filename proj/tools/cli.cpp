#include "cli.hpp"

#include "lnn/coldstart.hpp"
#include "lnn/data.hpp"
#include "lnn/errors.hpp"
#include "lnn/eval.hpp"
#include "lnn/model_io.hpp"
#include "lnn/report.hpp"
#include "lnn/trainer.hpp"
#include "lnn/variants.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace lnn::cli {

namespace {

struct RunConfig {
    std::string data_dir;
    std::string ratings_csv;
    std::string variant = "lnn3pt";

    std::size_t latent = 8;
    std::vector<std::size_t> hidden{0};
    double lambda = 0.01;
    double eta_initial = 0.1;
    double eta_final = 1e-4;
    double gamma = 1e-4;
    double init_deviation = 0.01;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    std::size_t workers = 1;
    std::string activation = "tanh";

    std::size_t num_neighbors = 100;
    double dist_thresh = 0.0;
    std::size_t min_ratings = 50;

    std::string out_path;
    std::string log_path;
    std::string report_path;
    std::string format = "text";

    int cv = 0;
    std::vector<std::size_t> grid_latent{2, 4, 8, 16, 32};
    std::vector<double> grid_lambda{0.001, 0.01, 0.1};
    std::vector<std::size_t> grid_hidden{0, 8, 16, 32};
    bool evaluate_best = false;

    std::string holdout = "top10";
    bool combined_only = false;

    std::string model_path;
    long long item = -1;
    long long user = -1;
    bool by_id = false;
    std::vector<std::string> genres;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

TrainConfig train_config(const RunConfig& rc) {
    TrainConfig c;
    c.latent_count = rc.latent;
    c.hidden_sizes.clear();
    for (std::size_t h : rc.hidden)
        if (h != 0)
            c.hidden_sizes.push_back(h);
    c.lambda = rc.lambda;
    c.eta_initial = rc.eta_initial;
    c.eta_final = rc.eta_final;
    c.gamma = rc.gamma;
    c.init_deviation = rc.init_deviation;
    c.seed = rc.seed;
    c.hidden_activation = activation_from_string(rc.activation);
    return c;
}

ModelSpec model_spec(const RunConfig& rc) {
    return make_variant(variant_from_string(rc.variant), train_config(rc));
}

ColdStartConfig coldstart_config(const RunConfig& rc) {
    ColdStartConfig c;
    c.num_neighbors = rc.num_neighbors;
    c.dist_thresh = rc.dist_thresh;
    c.min_ratings = rc.min_ratings;
    c.validate();
    return c;
}

Dataset load_data(const RunConfig& rc) {
    if (!rc.ratings_csv.empty())
        return load_triples_csv(rc.ratings_csv, RatingScale::movielens());
    if (rc.data_dir.empty())
        throw UsageError("no dataset given: pass --data <dir> or set LNN_DATA_DIR");
    return load_movielens_dir(rc.data_dir);
}

/// Writes to --report when given, otherwise to out.
void emit(const RunConfig& rc, std::ostream& out, const std::string& text) {
    if (rc.report_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(rc.report_path);
    if (!f)
        throw DataError("cannot write " + rc.report_path);
    f << text;
}

std::string shortest(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

// ------------------------------------------------------------------- commands

int cmd_train(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    if (rc.out_path.empty())
        throw UsageError("train needs --out <model file>");
    const ModelSpec spec = model_spec(rc);
    const Dataset data = load_data(rc);

    std::ofstream log_file;
    std::ostream* log = &err;
    if (!rc.log_path.empty()) {
        log_file.open(rc.log_path);
        if (!log_file)
            throw DataError("cannot write " + rc.log_path);
        log = &log_file;
    }
    TrainHooks hooks;
    hooks.on_epoch = [log](const EpochRecord& r) {
        *log << "phase=" << r.phase << " epoch=" << r.epoch << " eta=" << shortest(r.eta)
             << " rmse=" << shortest(r.rmse) << '\n';
    };

    ModelFile file;
    file.variant = to_string(spec.kind);
    file.model = train_variant(spec, data.ratings, data.profiles, hooks);
    file.item_rating_counts = data.ratings.item_rating_counts();
    file.item_ids = data.item_ids;
    file.user_ids = data.user_ids;
    save_model(rc.out_path, file);
    out << "wrote " << rc.out_path << " (" << to_string(spec.kind) << ", "
        << config_summary(spec.config) << ", " << file.model.log.size() << " epochs)\n";
    return kExitOk;
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
    const ModelSpec spec = model_spec(rc);
    const Dataset data = load_data(rc);
    const ReportFormat fmt = report_format_from_string(rc.format);
    if (rc.cv > 0) {
        CvReport rep = evaluate_cv(spec, data, rc.cv, rc.split_seed, rc.workers);
        if (fmt == ReportFormat::json) {
            emit(rc, out, cv_json(rep));
        } else {
            std::vector<MetricRow> rows = rep.folds;
            rows.push_back(rep.summary);
            emit(rc, out, metrics_table(rows) + "\n" + timing_table(std::span(&rep.summary, 1)));
        }
        return rep.failed_folds == 0 ? kExitOk : kExitFailure;
    }
    const SplitAssignment split = split_holdout(data.ratings, rc.split_seed);
    MetricRow row = evaluate_holdout(spec, data, split);
    std::vector<MetricRow> rows{row};
    emit(rc, out, fmt == ReportFormat::json ? metrics_json(rows)
                                            : metrics_table(rows) + "\n" + timing_table(rows));
    return kExitOk;
}

int cmd_gridsearch(const RunConfig& rc, std::ostream& out) {
    const VariantKind kind = variant_from_string(rc.variant);
    const TrainConfig base = train_config(rc);
    const Dataset data = load_data(rc);
    const ReportFormat fmt = report_format_from_string(rc.format);
    const SplitAssignment split = split_holdout(data.ratings, rc.split_seed);

    GridSpec grid;
    grid.latent_counts = rc.grid_latent;
    grid.lambdas = rc.grid_lambda;
    grid.hidden_sizes = rc.grid_hidden;
    GridResult result = grid_search(kind, grid, base, data, split, rc.workers);

    std::string text = fmt == ReportFormat::json ? grid_json(result) : grid_table(result);
    if (rc.evaluate_best) {
        MetricRow validation;
        validation.variant = to_string(kind);
        validation.split = "validation";
        validation.mae = result.best_mae;
        validation.config = result.best;
        MetricRow test = evaluate_holdout(make_variant(kind, result.best), data, split);
        std::vector<MetricRow> rows{validation, test};
        text += fmt == ReportFormat::json ? metrics_json(rows) : "\n" + metrics_table(rows);
    }
    emit(rc, out, text);
    return kExitOk;
}

std::vector<HoldOutCondition> holdout_conditions(const RunConfig& rc, const Dataset& data) {
    if (rc.holdout.rfind("top", 0) == 0) {
        std::size_t k = 10;
        const std::string digits = rc.holdout.substr(3);
        if (!digits.empty()) {
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc() || p != digits.data() + digits.size() || k == 0)
                throw UsageError("bad --holdout value '" + rc.holdout + "'");
        }
        return top_k_conditions(data, k, !rc.combined_only);
    }
    std::vector<HoldOutCondition> out;
    std::vector<std::size_t> all;
    std::stringstream ss(rc.holdout);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::int64_t id = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw UsageError("bad movie id '" + tok + "' in --holdout");
        auto idx = data.item_ids.index(id);
        if (!idx)
            throw UsageError("movie id " + tok + " not in dataset");
        if (!rc.combined_only)
            out.push_back({tok, {*idx}});
        all.push_back(*idx);
    }
    if (all.size() > 1 || rc.combined_only)
        out.push_back({"combined", all});
    return out;
}

int cmd_coldstart(const RunConfig& rc, std::ostream& out) {
    const ModelSpec spec = model_spec(rc);
    const Dataset data = load_data(rc);
    const ReportFormat fmt = report_format_from_string(rc.format);
    auto conditions = holdout_conditions(rc, data);
    ColdStartReport rep =
        coldstart_experiment(spec, data, conditions, coldstart_config(rc), rc.workers);
    std::vector<ColdStartReport> reps{rep};
    emit(rc, out, fmt == ReportFormat::json ? coldstart_json(reps) : coldstart_table(reps));
    return kExitOk;
}

std::size_t resolve_index(const IdMap& ids, long long value, bool by_id, std::size_t limit,
                          const char* what) {
    if (value < 0)
        throw UsageError(std::string("predict needs --") + what);
    if (by_id) {
        auto idx = ids.index(value);
        if (!idx)
            throw UsageError(std::string("unknown ") + what + " id " + std::to_string(value));
        return *idx;
    }
    if (static_cast<std::size_t>(value) >= limit)
        throw UsageError(std::string(what) + " index " + std::to_string(value) + " out of range");
    return static_cast<std::size_t>(value);
}

int cmd_predict(const RunConfig& rc, std::ostream& out) {
    if (rc.model_path.empty())
        throw UsageError("predict needs --model <file>");
    const ModelFile file = load_model(rc.model_path);
    const TrainedModel& model = file.model;
    const std::size_t user = resolve_index(file.user_ids, rc.user, rc.by_id,
                                           model.topology.output_count, "user");
    double rating = 0.0;
    if (!rc.genres.empty()) {
        const std::vector<double> profile = model.profiles.encode(rc.genres);
        ColdStartPredictor predictor(model, file.item_rating_counts, coldstart_config(rc));
        rating = predictor.predict(profile, user);
    } else {
        const std::size_t item =
            resolve_index(file.item_ids, rc.item, rc.by_id, model.latents.rows(), "item");
        rating = predict(model, item, user);
    }
    out << shortest(rating) << '\n';
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Latent neural network recommender: training, evaluation, cold-start prediction",
                 "lnn"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_config("--config", "", "key=value configuration file (flags take precedence)");
    app.require_subcommand(1);

    app.add_option("--data", rc.data_dir, "HetRec2011 MovieLens directory")->envname("LNN_DATA_DIR");
    app.add_option("--ratings-csv", rc.ratings_csv, "generic item,user,rating file (0.5..5 scale)");
    app.add_option("--variant", rc.variant, "mf | nlpca | ubp | lnn | lnn3pt");
    app.add_option("--latent", rc.latent, "latent input count t");
    app.add_option("--hidden", rc.hidden, "hidden layer sizes (0 = none)")->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--lambda", rc.lambda, "regularization strength");
    app.add_option("--eta-initial", rc.eta_initial, "initial learning rate");
    app.add_option("--eta-final", rc.eta_final, "learning rate that ends a phase");
    app.add_option("--gamma", rc.gamma, "expected relative improvement per epoch");
    app.add_option("--init-deviation", rc.init_deviation, "initialization standard deviation");
    app.add_option("--activation", rc.activation, "hidden activation: tanh | logistic | identity");
    app.add_option("--seed", rc.seed, "training seed");
    app.add_option("--split-seed", rc.split_seed, "seed for test/validation/fold assignment");
    app.add_option("--workers", rc.workers, "concurrent training jobs");
    app.add_option("--num-neighbors", rc.num_neighbors, "cold-start neighbor count");
    app.add_option("--dist-thresh", rc.dist_thresh, "cold-start distance threshold");
    app.add_option("--min-ratings", rc.min_ratings, "cold-start minimum neighbor rating count");
    app.add_option("--format", rc.format, "report format: text | json");
    app.add_option("--report", rc.report_path, "write the report here instead of stdout");

    auto* train_cmd = app.add_subcommand("train", "train a model and write it to --out");
    train_cmd->add_option("--out", rc.out_path, "model file");
    train_cmd->add_option("--log", rc.log_path, "per-epoch log (default stderr)");

    auto* eval_cmd = app.add_subcommand("evaluate", "hold-out test or k-fold evaluation");
    eval_cmd->add_option("--cv", rc.cv, "k for k-fold cross-validation (0 = hold-out test)");

    auto* grid_cmd = app.add_subcommand("gridsearch", "validation-driven parameter search");
    grid_cmd->add_option("--grid-latent", rc.grid_latent)->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    grid_cmd->add_option("--grid-lambda", rc.grid_lambda)->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    grid_cmd->add_option("--grid-hidden", rc.grid_hidden)->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    grid_cmd->add_flag("--evaluate", rc.evaluate_best, "also score the best point on the test set");

    auto* cold_cmd = app.add_subcommand("coldstart", "held-out item (new item) experiment");
    cold_cmd->add_option("--holdout", rc.holdout, "topK or comma-separated movie ids");
    cold_cmd->add_flag("--combined-only", rc.combined_only, "skip the per-item conditions");

    auto* pred_cmd = app.add_subcommand("predict", "predict one rating from a model file");
    pred_cmd->add_option("--model", rc.model_path, "model file");
    pred_cmd->add_option("--item", rc.item, "item index (or id with --by-id)");
    pred_cmd->add_option("--user", rc.user, "user index (or id with --by-id)");
    pred_cmd->add_flag("--by-id", rc.by_id, "interpret --item/--user as dataset ids");
    pred_cmd->add_option("--genres", rc.genres, "new item's genres (cold-start prediction)")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    for (auto* sub : {train_cmd, eval_cmd, grid_cmd, cold_cmd, pred_cmd})
        sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train_cmd)
            return cmd_train(rc, out, err);
        if (*eval_cmd)
            return cmd_evaluate(rc, out);
        if (*grid_cmd)
            return cmd_gridsearch(rc, out);
        if (*cold_cmd)
            return cmd_coldstart(rc, out);
        if (*pred_cmd)
            return cmd_predict(rc, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace lnn::cli
