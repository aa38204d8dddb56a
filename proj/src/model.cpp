#include "ez/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ez/error.hpp"
#include "ez/parallel.hpp"

namespace ez {

using Json = nlohmann::ordered_json;

std::string_view to_string(Method m) {
    switch (m) {
    case Method::PR: return "PR";
    case Method::ANN: return "ANN";
    case Method::RFR: return "RFR";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    std::string upper(s);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "PR") return Method::PR;
    if (upper == "ANN") return Method::ANN;
    if (upper == "RFR") return Method::RFR;
    throw ValidationError("unknown method '" + std::string(s) + "' (expected PR, ANN or RFR)");
}

namespace {

std::vector<Point3> scaled_points(std::span<const Sample> rows, const FeatureScaler& sc) {
    std::vector<Point3> out;
    out.reserve(rows.size());
    for (const Sample& s : rows) out.push_back(sc.apply(features_of(s)));
    return out;
}

std::vector<double> targets(std::span<const Sample> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const Sample& s : rows) out.push_back(s.max_range_nm);
    return out;
}

} // namespace

double TrainedModel::predict(const EngagementQuery& q) const {
    const Point3 z = scaler.apply(features_of(q));
    return std::visit([&](const auto& p) { return p.eval(z); }, parameters);
}

std::vector<double> TrainedModel::predict_batch(std::span<const EngagementQuery> queries) const {
    if (const auto* mlp = std::get_if<MlpModel>(&parameters)) {
        std::vector<Point3> z;
        z.reserve(queries.size());
        for (const EngagementQuery& q : queries) z.push_back(scaler.apply(features_of(q)));
        return mlp->eval_batch(z);
    }
    std::vector<double> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = predict(queries[i]);
    return out;
}

std::vector<double> TrainedModel::predict_batch_parallel(std::span<const EngagementQuery> queries, int workers) const {
    std::vector<double> out(queries.size());
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (queries.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t start = c * kChunk;
        const std::size_t len = std::min(kChunk, queries.size() - start);
        const std::vector<double> part = predict_batch(queries.subspan(start, len));
        std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
    });
    return out;
}

std::string TrainedModel::hyper_summary() const {
    std::ostringstream os;
    if (const auto* p = std::get_if<PolyModel>(&parameters))
        os << "degree=" << p->hyper.max_degree << " interact=" << p->hyper.max_interact_degree;
    else if (const auto* m = std::get_if<MlpModel>(&parameters))
        os << m->hyper.hidden_layers << "x" << m->hyper.units;
    else if (const auto* f = std::get_if<ForestModel>(&parameters))
        os << "trees=" << f->hyper.n_estimators << " max_features=" << f->hyper.max_features;
    return os.str();
}

TrainedModel fit_pr(std::span<const Sample> train, const PrHyper& hyper) {
    TrainedModel m;
    m.method = Method::PR;
    m.scaler = FeatureScaler::fit(train, ScalerMode::MinMaxSymmetric);
    const auto x = scaled_points(train, m.scaler);
    const auto y = targets(train);
    m.parameters = fit_poly_scaled(x, y, hyper);
    m.meta.n_train = train.size();
    return m;
}

TrainedModel fit_rfr(std::span<const Sample> train, const RfrHyper& hyper, std::uint64_t seed, int workers) {
    if (train.empty()) throw ValidationError("fit_rfr: no training rows");
    TrainedModel m;
    m.method = Method::RFR;
    m.scaler = FeatureScaler::fit(train, ScalerMode::Identity);
    const auto x = scaled_points(train, m.scaler);
    const auto y = targets(train);
    m.parameters = fit_forest(x, y, hyper, seed, workers);
    m.meta.seed = seed;
    m.meta.n_train = train.size();
    return m;
}

TrainedModel fit_mlp(std::span<const Sample> train, std::span<const Sample> val, const MlpHyper& hyper,
                     std::uint64_t seed) {
    if (train.empty() || val.empty()) throw ValidationError("fit_mlp: train and validation sets must be non-empty");
    TrainedModel m;
    m.method = Method::ANN;
    m.scaler = FeatureScaler::fit(train, ScalerMode::ZScore);
    const auto x = scaled_points(train, m.scaler);
    const auto y = targets(train);
    const auto xv = scaled_points(val, m.scaler);
    const auto yv = targets(val);
    MlpModel mlp = train_mlp_scaled(x, y, xv, yv, hyper, seed);
    m.meta.seed = seed;
    m.meta.n_train = train.size();
    m.meta.epochs_run = mlp.epochs_run;
    m.meta.best_epoch = mlp.best_epoch;
    m.parameters = std::move(mlp);
    return m;
}

// ---- serialization -------------------------------------------------------------------------

namespace {

template <typename M>
Json matrix_json(const M& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const Json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ArtifactError("model JSON: ragged matrix");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

Json mean_std_json(const MeanStd& ms) { return {{"mean", ms.mean}, {"std", ms.std}}; }
MeanStd mean_std_from(const Json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

} // namespace

std::string model_to_json(const TrainedModel& m) {
    Json j;
    j["format_version"] = 1;
    j["method"] = std::string(to_string(m.method));
    j["sam_id"] = m.sam_id;
    j["sector"] = sector_token(m.sector);
    j["scaler"] = {{"mode", std::string(to_string(m.scaler.mode))},
                   {"center", m.scaler.center},
                   {"half_width", m.scaler.half_width}};
    if (const auto* p = std::get_if<PolyModel>(&m.parameters)) {
        j["hyper"] = {{"max_degree", p->hyper.max_degree}, {"max_interact_degree", p->hyper.max_interact_degree}};
        Json exps = Json::array();
        for (const Exponent& e : p->exponents) exps.push_back(e);
        std::vector<double> coef(p->coefficients.data(), p->coefficients.data() + p->coefficients.size());
        j["parameters"] = {{"exponents", exps}, {"coefficients", coef}};
    } else if (const auto* a = std::get_if<MlpModel>(&m.parameters)) {
        const MlpHyper& h = a->hyper;
        j["hyper"] = {{"hidden_layers", h.hidden_layers}, {"units", h.units},        {"batch_size", h.batch_size},
                      {"patience", h.patience},           {"max_epochs", h.max_epochs}, {"learning_rate", h.learning_rate},
                      {"beta1", h.beta1},                 {"beta2", h.beta2},        {"epsilon", h.epsilon},
                      {"activation", "relu"}};
        Json layers = Json::array();
        for (std::size_t l = 0; l < a->net.layer_count(); ++l) {
            const auto& b = a->net.biases[l];
            layers.push_back({{"weights", matrix_json(a->net.weights[l])},
                              {"biases", std::vector<double>(b.data(), b.data() + b.size())}});
        }
        j["parameters"] = {{"target_mean", a->target_mean}, {"target_std", a->target_std}, {"layers", layers}};
    } else if (const auto* f = std::get_if<ForestModel>(&m.parameters)) {
        const RfrHyper& h = f->hyper;
        j["hyper"] = {{"n_estimators", h.n_estimators},         {"max_depth", h.max_depth},
                      {"min_samples_split", h.min_samples_split}, {"min_samples_leaf", h.min_samples_leaf},
                      {"max_features", h.max_features},           {"bootstrap", h.bootstrap}};
        Json trees = Json::array();
        for (const RegressionTree& t : f->trees) {
            trees.push_back({{"feature", t.feature},
                             {"threshold", t.threshold},
                             {"left", t.left},
                             {"right", t.right},
                             {"value", t.value}});
        }
        j["parameters"] = {{"trees", trees}};
    }
    const TrainingMeta& t = m.meta;
    j["training"] = {{"seed", t.seed},
                     {"n_train", t.n_train},
                     {"cv_rmse_nm", mean_std_json(t.cv_rmse_nm)},
                     {"cv_mape_pct", mean_std_json(t.cv_mape_pct)},
                     {"cv_r2", mean_std_json(t.cv_r2)},
                     {"epochs_run", t.epochs_run},
                     {"best_epoch", t.best_epoch},
                     {"train_sha256", t.train_sha256},
                     {"test_sha256", t.test_sha256},
                     {"test_path", t.test_path}};
    return j.dump() + "\n";
}

TrainedModel model_from_json(std::string_view text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("format_version").get<int>() != 1) throw ArtifactError("model JSON: unsupported format_version");
        TrainedModel m;
        m.method = parse_method(j.at("method").get<std::string>());
        m.sam_id = j.at("sam_id").get<std::string>();
        m.sector = parse_sector(j.at("sector").get<std::string>());
        const Json& sc = j.at("scaler");
        m.scaler.mode = parse_scaler_mode(sc.at("mode").get<std::string>());
        m.scaler.center = sc.at("center").get<Point3>();
        m.scaler.half_width = sc.at("half_width").get<Point3>();
        const Json& h = j.at("hyper");
        const Json& p = j.at("parameters");
        switch (m.method) {
        case Method::PR: {
            PolyModel pm;
            pm.hyper = {h.at("max_degree").get<int>(), h.at("max_interact_degree").get<int>()};
            pm.exponents = p.at("exponents").get<std::vector<Exponent>>();
            const auto coef = p.at("coefficients").get<std::vector<double>>();
            if (coef.size() != pm.exponents.size()) throw ArtifactError("model JSON: coefficient count mismatch");
            pm.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
            m.parameters = std::move(pm);
            break;
        }
        case Method::ANN: {
            MlpModel mm;
            mm.hyper.hidden_layers = h.at("hidden_layers").get<int>();
            mm.hyper.units = h.at("units").get<int>();
            mm.hyper.batch_size = h.at("batch_size").get<int>();
            mm.hyper.patience = h.at("patience").get<int>();
            mm.hyper.max_epochs = h.at("max_epochs").get<int>();
            mm.hyper.learning_rate = h.at("learning_rate").get<double>();
            mm.hyper.beta1 = h.at("beta1").get<double>();
            mm.hyper.beta2 = h.at("beta2").get<double>();
            mm.hyper.epsilon = h.at("epsilon").get<double>();
            mm.target_mean = p.at("target_mean").get<double>();
            mm.target_std = p.at("target_std").get<double>();
            for (const Json& layer : p.at("layers")) {
                mm.net.weights.push_back(matrix_from(layer.at("weights")));
                const auto b = layer.at("biases").get<std::vector<double>>();
                mm.net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
                if (mm.net.weights.back().rows() != mm.net.biases.back().size())
                    throw ArtifactError("model JSON: bias size mismatch");
            }
            m.parameters = std::move(mm);
            break;
        }
        case Method::RFR: {
            ForestModel fm;
            fm.hyper.n_estimators = h.at("n_estimators").get<int>();
            fm.hyper.max_depth = h.at("max_depth").get<int>();
            fm.hyper.min_samples_split = h.at("min_samples_split").get<int>();
            fm.hyper.min_samples_leaf = h.at("min_samples_leaf").get<int>();
            fm.hyper.max_features = h.at("max_features").get<int>();
            fm.hyper.bootstrap = h.at("bootstrap").get<bool>();
            for (const Json& t : p.at("trees")) {
                RegressionTree tree;
                tree.feature = t.at("feature").get<std::vector<int>>();
                tree.threshold = t.at("threshold").get<std::vector<double>>();
                tree.left = t.at("left").get<std::vector<int>>();
                tree.right = t.at("right").get<std::vector<int>>();
                tree.value = t.at("value").get<std::vector<double>>();
                const std::size_t n = tree.feature.size();
                if (n == 0 || tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
                    tree.value.size() != n)
                    throw ArtifactError("model JSON: malformed tree arrays");
                for (std::size_t i = 0; i < n; ++i) {
                    if (tree.feature[i] >= 3 ||
                        (tree.feature[i] >= 0 && (tree.left[i] <= static_cast<int>(i) || tree.right[i] <= static_cast<int>(i) ||
                                                  tree.left[i] >= static_cast<int>(n) || tree.right[i] >= static_cast<int>(n))))
                        throw ArtifactError("model JSON: invalid tree node links");
                }
                fm.trees.push_back(std::move(tree));
            }
            if (fm.trees.empty()) throw ArtifactError("model JSON: forest has no trees");
            m.parameters = std::move(fm);
            break;
        }
        }
        const Json& t = j.at("training");
        m.meta.seed = t.at("seed").get<std::uint64_t>();
        m.meta.n_train = t.at("n_train").get<std::size_t>();
        m.meta.cv_rmse_nm = mean_std_from(t.at("cv_rmse_nm"));
        m.meta.cv_mape_pct = mean_std_from(t.at("cv_mape_pct"));
        m.meta.cv_r2 = mean_std_from(t.at("cv_r2"));
        m.meta.epochs_run = t.at("epochs_run").get<int>();
        m.meta.best_epoch = t.at("best_epoch").get<int>();
        m.meta.train_sha256 = t.at("train_sha256").get<std::string>();
        m.meta.test_sha256 = t.at("test_sha256").get<std::string>();
        m.meta.test_path = t.at("test_path").get<std::string>();
        return m;
    } catch (const Json::exception& e) {
        throw ArtifactError(std::string("model JSON: ") + e.what());
    } catch (const ValidationError& e) {
        throw ArtifactError(std::string("model JSON: ") + e.what());
    }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot write model " + path.string());
    out << model_to_json(m);
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open model " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

} // namespace ez
