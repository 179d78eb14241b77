// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   lnn_acceptance --group synthetic     criteria 1-4, 7, 8
//   lnn_acceptance --group movielens     criteria 5, 6, 9 (needs the HetRec
//                                        MovieLens files; exits 77 when absent)
//
// The MovieLens directory is taken from --data, then LNN_DATA_DIR, then
// ./data/hetrec2011-movielens-2k-v2.

#include "lnn/coldstart.hpp"
#include "lnn/errors.hpp"
#include "lnn/eval.hpp"
#include "lnn/model_io.hpp"
#include "lnn/trainer.hpp"
#include "lnn/variants.hpp"

#include "oracles.hpp"
#include "synthetic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>

using namespace lnn;
using namespace lnn::testing;

namespace {

// Tolerances and budgets.
constexpr double kGradientRelTol = 1e-5;
constexpr double kGradientTimeBudget = 10.0;
constexpr double kPathAgreementTol = 1e-12;
constexpr double kReductionTol = 1e-9;
constexpr double kRecoveryRmse = 1e-2;
constexpr double kRecoveryTimeBudget = 30.0;
constexpr std::uint64_t kMaxHistogramWeight = 10000;
constexpr double kTable1MaxMae = 0.62;
constexpr double kTable1MaxGap = 0.04;
constexpr double kColdStartMaxMae = 0.95;
constexpr double kThreePhaseSlack = 0.005;
constexpr int kSkipCode = 77;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(const char* id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass)
        ++failures;
    std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ------------------------------------------------------------------ criterion 1

Outcome gradient_oracle() {
    std::mt19937_64 rng(20240601);
    const auto start = Clock::now();
    double worst = 0.0;
    std::size_t checked = 0;
    for (int net = 0; net < 200; ++net) {
        Topology topo;
        topo.latent_count = 1 + rng() % 4;
        topo.attribute_count = rng() % 5;
        for (std::size_t l = rng() % 3; l > 0; --l)
            topo.hidden_sizes.push_back(1 + rng() % 5);
        topo.output_count = 1 + rng() % 5;
        WeightSet w = random_network(topo, rng);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> q;
        for (std::size_t i = 0; i < topo.latent_count; ++i)
            q.push_back(u(rng));
        for (std::size_t i = 0; i < topo.attribute_count; ++i)
            q.push_back(rng() % 2 ? 1.0 : 0.0);
        const std::size_t c = rng() % topo.output_count;
        const double x = 0.5 * (u(rng) + 1.0);

        ActivationTrace tr;
        forward_single(q, w, c, tr);
        error_terms(x, tr, w);
        const WeightGradient g = weight_gradient(tr, w);
        const std::vector<double> h = latent_gradient(tr, w);
        auto e = [&] { return half_error(q, w, c, x); };

        for (std::size_t L = 0; L < w.layers().size(); ++L) {
            Layer& layer = w.layers()[L];
            for (std::size_t j = 0; j < layer.outputs(); ++j) {
                for (std::size_t i = 0; i < layer.inputs(); ++i) {
                    worst = std::max(worst, relative_error(g.weight(L, j, i),
                                                           central_difference(e, layer.weight(j, i))));
                    ++checked;
                }
                worst = std::max(worst, relative_error(g.bias(L, j), central_difference(e, layer.bias(j))));
                ++checked;
            }
        }
        for (std::size_t i = 0; i < topo.latent_count; ++i) {
            worst = std::max(worst, relative_error(h[i], central_difference(e, q[i])));
            ++checked;
        }
    }
    const double secs = since(start);
    return {worst <= kGradientRelTol && secs < kGradientTimeBudget,
            fmt("max relative error %.3g over %zu components (tol %.0e), %.2f s (budget %.0f s)", worst,
                checked, kGradientRelTol, secs, kGradientTimeBudget)};
}

// ------------------------------------------------------------------ criterion 2

Outcome path_agreement() {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Topology topo;
        topo.latent_count = 1 + rng() % 6;
        topo.attribute_count = rng() % 5;
        topo.output_count = 1 + rng() % 6;
        WeightSet w = random_network(topo, rng);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> q(topo.input_width());
        for (double& v : q)
            v = u(rng);
        ActivationTrace tr;
        forward_single(q, w, rng() % topo.output_count, tr);
        error_terms(0.5 * (u(rng) + 1.0), tr, w);
        std::vector<double> a(topo.latent_count), b(topo.latent_count);
        latent_gradient_single_layer(tr, w, a);
        latent_gradient_multilayer(tr, w, b);
        for (std::size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return {worst <= kPathAgreementTol,
            fmt("max |difference| %.3g on 100 cases (tol %.0e)", worst, kPathAgreementTol)};
}

// ------------------------------------------------------------------ criterion 3

double max_gap(const TrainedModel& a, const TrainedModel& b, std::size_t m, std::size_t n) {
    double gap = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gap = std::max(gap, std::abs(predict_normalized(a, i, j) - predict_normalized(b, i, j)));
    return gap;
}

Outcome reduction_identities() {
    const auto m = rank_k_matrix(50, 50, 3, 11, 0.1, 0.55);
    const SparseRatings r = dense_ratings(m, 0.0, 1.0);
    const ItemProfiles none(50, 0);
    TrainConfig cfg;
    cfg.latent_count = 3;
    cfg.hidden_sizes = {4};
    cfg.eta_final = 1e-3;
    cfg.seed = 2024;

    const auto train_as = [&](VariantKind k, const TrainConfig& c) {
        return train_variant(make_variant(k, c), r, none);
    };
    const double nlpca = max_gap(train_as(VariantKind::lnn, cfg), train_as(VariantKind::nlpca, cfg), 50, 50);
    const double ubp = max_gap(train_as(VariantKind::lnn_3pt, cfg), train_as(VariantKind::ubp, cfg), 50, 50);
    TrainConfig linear = cfg;
    linear.hidden_sizes.clear();
    linear.hidden_activation = Activation::identity;
    const double mf = max_gap(train_as(VariantKind::lnn, linear), train_as(VariantKind::mf, linear), 50, 50);
    const double worst = std::max({nlpca, ubp, mf});
    return {worst <= kReductionTol,
            fmt("max prediction gap: LNN/NLPCA %.3g, LNN_3PT/UBP %.3g, linear LNN/MF %.3g (tol %.0e)", nlpca,
                ubp, mf, kReductionTol)};
}

// ------------------------------------------------------------------ criterion 4

Outcome synthetic_recovery() {
    // Zero-mean factors: both singular values carry weight. The rating scale
    // spans the matrix range; its affine offset is absorbed by output biases.
    const auto m = rank_k_matrix(30, 30, 2, 5, -1.0, 1.0);
    double lo = m[0][0], hi = m[0][0];
    for (const auto& row : m)
        for (double x : row) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    Eigen::MatrixXd a(30, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j)
            a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd best = svd.matrixU().leftCols(2) * svd.singularValues().head(2).asDiagonal() *
                                 svd.matrixV().leftCols(2).transpose();
    const double oracle = std::sqrt((a - best).squaredNorm() / 900.0);

    const SparseRatings r = dense_ratings(m, lo, hi);
    TrainConfig cfg;
    cfg.latent_count = 2;
    cfg.lambda = 0.0;
    cfg.seed = 1;
    const auto start = Clock::now();
    const TrainedModel model = train_variant(make_variant(VariantKind::ubp, cfg), r, ItemProfiles(30, 0));
    const double secs = since(start);
    double sse = 0.0;
    for (const Rating& x : r.triples()) {
        const double d = predict(model, x.item, x.user) - x.value;
        sse += d * d;
    }
    const double fit = std::sqrt(sse / static_cast<double>(r.size()));
    return {fit < kRecoveryRmse && secs < kRecoveryTimeBudget,
            fmt("reconstruction RMSE %.3g on range %.2f (least-squares oracle %.3g, threshold %.0e), %zu epochs, %.2f s "
                "(budget %.0f s)",
                fit, hi - lo, oracle, kRecoveryRmse, model.log.size(), secs, kRecoveryTimeBudget)};
}

// ------------------------------------------------------------------ criterion 7

Outcome weighted_mode_equivalence() {
    std::mt19937_64 rng(77);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::pair<double, std::uint64_t>> entries;
        RatingHistogram h;
        std::uint64_t budget = 1 + rng() % kMaxHistogramWeight;
        const std::size_t k = 1 + rng() % 20;
        for (std::size_t i = 0; i < k && budget > 0; ++i) {
            const double r = 0.5 * static_cast<double>(1 + rng() % 10);
            const std::uint64_t w = 1 + rng() % budget;
            budget -= w;
            entries.emplace_back(r, w);
            h.add(r, w);
        }
        if (weighted_mode(h) != brute_force_mode(entries))
            ++mismatches;
    }
    return {mismatches == 0, fmt("%d mismatches on 1000 histograms (total weight <= %llu)", mismatches,
                                 static_cast<unsigned long long>(kMaxHistogramWeight))};
}

// ------------------------------------------------------------------ criterion 8

Outcome termination_and_determinism() {
    SyntheticSpec spec;
    spec.items = 40;
    spec.users = 30;
    const SyntheticData raw = make_synthetic(spec);
    TempDir dir("accept");
    write_hetrec(dir.path(), raw);
    const Dataset data = load_movielens_dir(dir.path());

    TrainConfig cfg;
    cfg.latent_count = 3;
    cfg.hidden_sizes = {4};
    cfg.eta_final = 1e-3;
    cfg.seed = 99;
    const std::size_t bound = max_consecutive_halvings(cfg.eta_initial, cfg.eta_final);

    std::size_t worst_halvings = 0;
    bool all_stopped = true;
    for (VariantKind kind : {VariantKind::lnn_3pt, VariantKind::lnn, VariantKind::mf}) {
        TrainConfig c = cfg;
        if (kind == VariantKind::mf)
            c.hidden_sizes.clear();
        const ModelSpec ms = make_variant(kind, c);
        const TrainedModel model = train_variant(ms, data.ratings, data.profiles);
        for (int phase = 0; phase <= 3; ++phase) {
            std::size_t halvings = 0;
            double last = -1.0;
            for (const EpochRecord& e : model.log) {
                if (e.phase != phase)
                    continue;
                if (last > 0.0 && e.eta < last)
                    ++halvings;
                last = e.eta;
            }
            if (last < 0.0)
                continue;
            ++halvings;
            worst_halvings = std::max(worst_halvings, halvings);
            all_stopped = all_stopped && last / 2.0 <= cfg.eta_final;
        }
    }

    const ModelSpec ms = make_variant(VariantKind::lnn_3pt, cfg);
    for (int run = 0; run < 2; ++run) {
        ModelFile f{"lnn3pt", train_variant(ms, data.ratings, data.profiles), data.ratings.item_rating_counts(),
                    data.item_ids, data.user_ids};
        save_model(dir / ("run" + std::to_string(run) + ".lnn"), f);
    }
    const auto read = [&](const char* name) {
        std::ifstream in(dir / name, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string a = read("run0.lnn");
    const bool identical = !a.empty() && a == read("run1.lnn");
    return {worst_halvings <= bound && all_stopped && identical,
            fmt("max halvings per phase %zu (bound %zu), every phase reached eta_final: %s, model files "
                "byte-identical: %s (%zu bytes)",
                worst_halvings, bound, all_stopped ? "yes" : "no", identical ? "yes" : "no", a.size())};
}

// ------------------------------------------------------------- MovieLens group

std::filesystem::path data_dir(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--data") == 0)
            return argv[i + 1];
    if (const char* env = std::getenv("LNN_DATA_DIR"))
        return env;
    return "data/hetrec2011-movielens-2k-v2";
}

TrainConfig movielens_config(VariantKind kind, std::uint64_t seed) {
    TrainConfig c;
    c.latent_count = 8;
    c.lambda = 0.01;
    c.seed = seed;
    if (kind != VariantKind::mf)
        c.hidden_sizes = {16};
    return c;
}

int run_movielens(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "user_ratedmovies.dat") ||
        !std::filesystem::exists(dir / "movie_genres.dat")) {
        for (const char* id : {"C5", "C6", "C9"})
            std::printf("BLOCKED %s: HetRec2011 MovieLens files not found in '%s' "
                        "(set LNN_DATA_DIR or pass --data)\n",
                        id, dir.string().c_str());
        return kSkipCode;
    }
    const Dataset data = load_movielens_dir(dir);
    std::printf("loaded %zu ratings, %zu movies, %zu users, %zu genres\n", data.ratings.size(),
                data.ratings.num_items(), data.ratings.num_users(), data.profiles.num_attributes());
    const SplitAssignment split = split_holdout(data.ratings, 0);

    report("C5", "MovieLens hold-out MAE", [&]() -> Outcome {
        const MetricRow lnn3 =
            evaluate_holdout(make_variant(VariantKind::lnn_3pt, movielens_config(VariantKind::lnn_3pt, 0)), data,
                             split);
        const MetricRow mf =
            evaluate_holdout(make_variant(VariantKind::mf, movielens_config(VariantKind::mf, 0)), data, split);
        const bool ok = lnn3.mae <= kTable1MaxMae && mf.mae <= kTable1MaxMae &&
                        std::abs(lnn3.mae - mf.mae) <= kTable1MaxGap;
        return {ok, fmt("LNN_3PT %.4f, MF %.4f (max %.2f, gap <= %.2f; published 0.5810 / 0.5779)", lnn3.mae,
                        mf.mae, kTable1MaxMae, kTable1MaxGap)};
    });

    report("C6", "MovieLens cold start, top-10 held out", [&]() -> Outcome {
        const auto conds = top_k_conditions(data, 10, false);
        const ColdStartReport rep = coldstart_experiment(
            make_variant(VariantKind::lnn_3pt, movielens_config(VariantKind::lnn_3pt, 0)), data, conds);
        const ColdStartCondition& c = rep.conditions.front();
        const bool ok = !c.empty && c.mae <= kColdStartMaxMae && c.mae < c.baseline_mae;
        return {ok, fmt("%zu held ratings, MAE %.4f (max %.2f; published 0.847), genre-mean %.4f, %zu fallbacks",
                        c.held_count, c.mae, kColdStartMaxMae, c.baseline_mae, c.fallback_count)};
    });

    report("C9", "three-phase benefit", [&]() -> Outcome {
        const SparseRatings training = data.ratings.subset(split.training());
        double three = 0.0, single = 0.0;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            for (VariantKind k : {VariantKind::lnn_3pt, VariantKind::lnn}) {
                const TrainedModel m = train_variant(make_variant(k, movielens_config(k, seed)), training,
                                                     data.profiles);
                const double v = mae(score(m, data.ratings, split.validation)) / 3.0;
                (k == VariantKind::lnn_3pt ? three : single) += v;
            }
        }
        return {three <= single + kThreePhaseSlack,
                fmt("mean validation MAE over 3 seeds: LNN_3PT %.4f, LNN %.4f (slack %.3f)", three, single,
                    kThreePhaseSlack)};
    });
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    std::string group = "synthetic";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--group") == 0)
            group = argv[i + 1];

    if (group == "movielens")
        return run_movielens(data_dir(argc, argv));
    if (group != "synthetic") {
        std::fprintf(stderr, "unknown group '%s' (synthetic | movielens)\n", group.c_str());
        return 2;
    }
    report("C1", "gradient oracle", gradient_oracle);
    report("C2", "single-layer vs general latent gradient", path_agreement);
    report("C3", "reduction identities", reduction_identities);
    report("C4", "synthetic rank-2 recovery", synthetic_recovery);
    report("C7", "weighted mode vs brute force", weighted_mode_equivalence);
    report("C8", "termination and determinism", termination_and_determinism);
    std::printf("%s: %d failure(s)\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
