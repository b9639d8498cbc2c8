#include "beamprint/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "beamprint/errors.hpp"
#include "beamprint/learn/kmeans.hpp"
#include "beamprint/learn/metrics.hpp"
#include "beamprint/learn/model_io.hpp"
#include "beamprint/learn/pca.hpp"
#include "beamprint/learn/tsne.hpp"
#include "beamprint/report_io.hpp"
#include "beamprint/rng.hpp"

namespace beamprint::app {

namespace fs = std::filesystem;
using learn::Labels;
using learn::Matrix;

void init_logging(bool verbose) {
  auto logger = spdlog::get("beamprint");
  if (!logger) logger = spdlog::stderr_logger_mt("beamprint");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed(double v, int decimals) { return io::format_fixed(v, decimals); }

struct World {
  scene::Site site;
  link::RadioContext ctx;
};

World build_world(const AppConfig& c) {
  World w{scene::build_site(c.site),
          {c.array, paam::synthesize_gob(c.array, c.gob), c.link, {}}};
  w.ctx.bs_position = w.site.bs_position;
  return w;
}

// Reports of the UEs a recipe labels, plus the label of every kept UE.
struct Labelled {
  std::vector<beam_mgmt::MeasurementReport> reports;
  std::map<int, int> ue_label;
  std::vector<int> ue_count;  // per label
};

Labelled label_dataset(const Dataset& d, const std::vector<LabelGroup>& groups) {
  ExperimentRecipe probe;
  probe.labels = groups;
  Labelled out;
  out.ue_count.assign(groups.size(), 0);
  for (const auto& t : d.manifest) {
    if (const auto label = probe.label_of(t.cls)) {
      out.ue_label[t.ue_id] = *label;
      ++out.ue_count[static_cast<std::size_t>(*label)];
    }
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (out.ue_count[i] == 0) {
      throw DataError("dataset " + d.dir.string() + " has no UEs for label '" + groups[i].name + "'");
    }
  }
  for (const auto& r : d.reports) {
    if (out.ue_label.contains(r.ue_id)) out.reports.push_back(r);
  }
  return out;
}

Json label_counts(const std::vector<LabelGroup>& groups, const std::vector<int>& counts) {
  Json j = Json::object();
  for (std::size_t i = 0; i < groups.size(); ++i) j[groups[i].name] = counts[i];
  return j;
}

Json fingerprint_json(const learn::FingerprintOptions& o) {
  return {{"window", o.window},
          {"stride", o.stride},
          {"nb_encoding", learn::to_string(o.nb_encoding)},
          {"scaling", learn::to_string(o.scaling)}};
}

Labels row_labels(const learn::FingerprintSet& fs, const std::map<int, int>& ue_label) {
  Labels y;
  y.reserve(fs.ue_id.size());
  for (int ue : fs.ue_id) y.push_back(ue_label.at(ue));
  return y;
}

std::vector<int> rows_in(const learn::FingerprintSet& fs, const std::set<int>& ues) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < fs.ue_id.size(); ++i) {
    if (ues.contains(fs.ue_id[i])) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

Labels pick(const Labels& v, const std::vector<int>& rows) {
  Labels out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(v[static_cast<std::size_t>(r)]);
  return out;
}

std::vector<int> pick_ids(const std::vector<int>& v, const std::vector<int>& rows) { return pick(v, rows); }

// Each UE votes with its majority cluster (ties to the lower id).
double ue_level_purity(const std::vector<int>& ue_ids, const Labels& clusters,
                       const std::map<int, int>& ue_label) {
  std::map<int, std::map<int, int>> votes;
  for (std::size_t i = 0; i < ue_ids.size(); ++i) ++votes[ue_ids[i]][clusters[i]];
  Labels ue_cluster, ue_truth;
  for (const auto& [ue, v] : votes) {
    int best = v.begin()->first;
    for (const auto& [c, n] : v) {
      if (n > v.at(best)) best = c;
    }
    ue_cluster.push_back(best);
    ue_truth.push_back(ue_label.at(ue));
  }
  return learn::cluster_purity(ue_cluster, ue_truth);
}

std::vector<std::vector<int>> contingency(const Labels& clusters, const Labels& truth, int k,
                                          int n_labels) {
  std::vector<std::vector<int>> m(static_cast<std::size_t>(k),
                                  std::vector<int>(static_cast<std::size_t>(n_labels), 0));
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    ++m[static_cast<std::size_t>(clusters[i])][static_cast<std::size_t>(truth[i])];
  }
  return m;
}

Json evaluation_block(const Labels& predicted, const Labels& truth,
                      const std::vector<std::string>& classes) {
  const int k = static_cast<int>(classes.size());
  const auto cm = learn::confusion_matrix(predicted, truth, k);
  Json per_class = Json::object();
  for (int c = 0; c < k; ++c) {
    const auto& row = cm[static_cast<std::size_t>(c)];
    const int total = std::accumulate(row.begin(), row.end(), 0);
    per_class[classes[static_cast<std::size_t>(c)]] = {
        {"rows", total},
        {"error", total > 0 ? 1.0 - static_cast<double>(row[static_cast<std::size_t>(c)]) / total
                            : 0.0}};
  }
  return {{"n_rows", truth.size()},
          {"misclassification_rate", learn::misclassification_rate(predicted, truth)},
          {"classes", classes},
          {"confusion_matrix", cm},
          {"per_class", per_class}};
}

void write_csv(const fs::path& path, const std::string& text) { io::write_text_file(path, text); }

// Canonical fingerprints of the labelled UEs; the dataset config supplies the
// grid of beams for azimuth encoding.
learn::FingerprintSet fingerprints_for(const Dataset& d, const Labelled& l,
                                       const learn::FingerprintOptions& opts) {
  const paam::GridOfBeams gob = paam::synthesize_gob(d.config.array, d.config.gob);
  learn::FingerprintSet fs = learn::stack_fingerprints(l.reports, opts, &gob);
  if (fs.skipped_ues > 0) {
    spdlog::info("{} UEs have fewer than {} reports and yield no fingerprint", fs.skipped_ues,
                 opts.window);
  }
  if (fs.rows() == 0) throw DataError("no fingerprints could be built from " + d.dir.string());
  return fs;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.dir = dir;
  const fs::path reports = dir / "reports.csv";
  if (!fs::exists(reports)) {
    bool has_seeds = false;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        has_seeds = has_seeds || e.path().filename().string().rfind("seed_", 0) == 0;
      }
    }
    throw DataError(has_seeds ? dir.string() + " holds several seeds; point at one seed_<n> directory"
                              : "no reports.csv in " + dir.string());
  }
  try {
    std::ifstream in(reports);
    d.reports = io::read_reports_csv(in);
    d.manifest = scene::parse_manifest_jsonl(io::read_text_file(dir / "manifest.jsonl"));
    const auto meta = nlohmann::json::parse(io::read_text_file(dir / "run_meta.json"));
    d.config = config_from_json(meta.at("config"));
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError("cannot load dataset " + dir.string() + ": " + e.what());
  }
  std::set<int> known;
  for (const auto& t : d.manifest) known.insert(t.ue_id);
  for (const auto& r : d.reports) {
    if (!known.contains(r.ue_id)) {
      throw DataError("report for UE " + std::to_string(r.ue_id) + " has no manifest entry");
    }
  }
  return d;
}

UeSplit split_by_ue(const std::map<int, int>& ue_label, double test_fraction, std::uint64_t seed) {
  std::map<int, std::vector<int>> by_label;
  for (const auto& [ue, label] : ue_label) by_label[label].push_back(ue);
  UeSplit s;
  for (auto& [label, ues] : by_label) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    std::shuffle(ues.begin(), ues.end(), rng);
    const auto n = static_cast<long>(ues.size());
    long n_test = std::lround(test_fraction * static_cast<double>(n));
    if (n >= 2) n_test = std::clamp(n_test, 1L, n - 1);
    for (long i = 0; i < n; ++i) {
      (i < n_test ? s.test : s.train).insert(ues[static_cast<std::size_t>(i)]);
    }
  }
  return s;
}

Json cmd_simulate(const AppConfig& config_in, const fs::path& out_dir,
                  const ExperimentRecipe* recipe, bool write_jsonl) {
  AppConfig config = config_in;
  if (recipe) {
    config.population.counts = recipe->population;
    config.crossing_pedestrians = recipe->crossing_count;
    config.validate();
  }
  const World world = build_world(config);
  scene::PopulationConfig population = config.population;
  population.crossing_fraction = config.crossing_fraction();
  const nlohmann::json resolved = config_to_json(config);
  const std::string hash = config_hash(resolved);

  Json summary = {{"config_hash", hash}, {"datasets", Json::array()}};
  const bool several = config.simulation.seeds.size() > 1;
  for (std::uint64_t seed : config.simulation.seeds) {
    const fs::path dir = several ? out_dir / ("seed_" + std::to_string(seed)) : out_dir;
    fs::create_directories(dir);
    auto tracks = scene::spawn_population(world.site, population, seed);
    const auto out = beam_mgmt::run_simulation(world.site, world.ctx, tracks, config.simulation, seed);

    {
      std::ofstream f(dir / "reports.csv");
      io::write_reports_csv(f, out.reports);
      if (!f) throw DataError("failed writing " + (dir / "reports.csv").string());
    }
    if (write_jsonl) {
      std::ofstream f(dir / "reports.jsonl");
      io::write_reports_jsonl(f, out.reports);
    }
    io::write_text_file(dir / "manifest.jsonl", scene::manifest_jsonl(out.manifest));
    io::write_text_file(dir / "gob.csv", world.ctx.gob.to_csv());

    std::set<int> reporting;
    for (const auto& r : out.reports) reporting.insert(r.ue_id);
    Json meta = {{"tool", "beamprint"},
                 {"version", kVersion},
                 {"config_hash", hash},
                 {"seed", seed},
                 {"seeds", config.simulation.seeds},
                 {"recipe", recipe ? recipe->name : ""},
                 {"n_ues", out.manifest.size()},
                 {"n_reporting_ues", reporting.size()},
                 {"n_reports", out.reports.size()},
                 {"report_width", config.simulation.report_width},
                 {"created_utc", utc_timestamp()},
                 {"config", resolved}};
    io::write_text_file(dir / "run_meta.json", dump_json(meta));
    spdlog::info("seed {}: {} UEs, {} reports -> {}", seed, out.manifest.size(), out.reports.size(),
                 dir.string());
    if (reporting.size() < out.manifest.size()) {
      spdlog::warn("{} UEs never reported within the simulated duration",
                   out.manifest.size() - reporting.size());
    }
    summary["datasets"].push_back(
        {{"dir", dir.string()}, {"n_ues", out.manifest.size()}, {"n_reports", out.reports.size()}});
  }
  return summary;
}

Json cmd_cluster(const AppConfig& config, const fs::path& dataset_dir,
                 const ExperimentRecipe& recipe, const fs::path& out_dir) {
  if (recipe.method != Method::Kmeans) {
    throw ConfigError("recipe '" + recipe.name + "' is not a K-means recipe");
  }
  const Dataset d = load_dataset(dataset_dir);
  const Labelled l = label_dataset(d, recipe.labels);
  const auto opts = recipe.fingerprint.value_or(config.learn.fingerprint);
  const learn::FingerprintSet fs = fingerprints_for(d, l, opts);
  const Labels y = row_labels(fs, l.ue_label);
  const UeSplit split = split_by_ue(l.ue_label, config.learn.test_fraction, config.learn.seed);
  const auto train = rows_in(fs, split.train);
  const auto test = rows_in(fs, split.test);
  if (train.empty() || test.empty()) throw DataError("split left no rows on one side");

  const auto scaler = learn::ScalingModel::fit(learn::select_rows(fs.values, train), opts.scaling);
  const Matrix all = scaler.apply(fs.values);
  const Matrix x_train = learn::select_rows(all, train);
  const int n_comp = static_cast<int>(std::min<Eigen::Index>(
      {config.learn.pca_components, x_train.cols(), x_train.rows()}));
  const auto pca = learn::pca_fit(x_train, n_comp);
  const Matrix projected = pca.transform(all);
  const Matrix p_train = learn::select_rows(projected, train);
  const Matrix p_test = learn::select_rows(projected, test);

  learn::KMeansOptions km_opts;
  km_opts.seed = config.learn.seed;
  km_opts.max_iter = config.learn.kmeans_max_iter;
  km_opts.n_restarts = config.learn.kmeans_restarts;

  Json elbow_json = nullptr;
  int k = recipe.k;
  if (recipe.elbow) {
    const int k_max = static_cast<int>(std::min<Eigen::Index>(recipe.k_max, p_train.rows()));
    const auto e = learn::elbow_select(p_train, recipe.k_min, k_max, km_opts);
    std::string csv = "k,inertia\n";
    for (std::size_t i = 0; i < e.inertia.size(); ++i) {
      csv += std::to_string(e.k_min + static_cast<int>(i)) + "," + fixed(e.inertia[i], 6) + "\n";
    }
    write_csv(out_dir / "inertia_curve.csv", csv);
    elbow_json = {{"k_range", {e.k_min, k_max}},
                  {"knee", e.k},
                  {"knee_strength", e.knee_strength},
                  {"degenerate", e.degenerate},
                  {"inertia", e.inertia}};
    if (e.degenerate) spdlog::warn("elbow curve has no pronounced knee; knee reported as k_min");
    if (k <= 0) k = e.k;
  }
  if (k < 1) throw ConfigError("recipe '" + recipe.name + "' needs k >= 1 or elbow selection");
  km_opts.k = k;
  const auto km = learn::kmeans_fit(p_train, km_opts);
  const Labels c_train = learn::kmeans_assign(km, p_train);
  const Labels c_test = learn::kmeans_assign(km, p_test);
  const Labels y_train = pick(y, train);
  const Labels y_test = pick(y, test);

  const int n_labels = static_cast<int>(recipe.labels.size());
  Json metrics = {
      {"recipe", recipe.name},
      {"method", to_string(recipe.method)},
      {"grouping", to_string(recipe.grouping)},
      {"classes", recipe.class_names()},
      {"ue_counts", label_counts(recipe.labels, l.ue_count)},
      {"fingerprint", fingerprint_json(opts)},
      {"split",
       {{"test_fraction", config.learn.test_fraction},
        {"seed", config.learn.seed},
        {"train_ues", split.train.size()},
        {"test_ues", split.test.size()}}},
      {"rows", {{"train", train.size()}, {"test", test.size()}, {"skipped_ues", fs.skipped_ues}}},
      {"pca",
       {{"n_components", n_comp},
        {"cumulative_explained_variance", pca.cumulative_ratio()},
        {"explained_variance_ratio",
         std::vector<double>(pca.explained_variance_ratio.data(),
                             pca.explained_variance_ratio.data() + n_comp)}}},
      {"kmeans", {{"k", k}, {"inertia", km.inertia}, {"n_iter", km.n_iter}}},
      {"purity",
       {{"test_rows", learn::cluster_purity(c_test, y_test)},
        {"test_ues", ue_level_purity(pick_ids(fs.ue_id, test), c_test, l.ue_label)},
        {"train_rows", learn::cluster_purity(c_train, y_train)},
        {"train_ues", ue_level_purity(pick_ids(fs.ue_id, train), c_train, l.ue_label)}}},
      {"contingency_test", contingency(c_test, y_test, k, n_labels)},
      {"elbow", elbow_json},
  };

  std::ostringstream scatter;
  scatter << "ue_id,t_s,split,label,cluster,pc1,pc2\n";
  const auto names = recipe.class_names();
  std::vector<int> cluster_of(static_cast<std::size_t>(fs.rows()));
  for (std::size_t i = 0; i < train.size(); ++i) cluster_of[static_cast<std::size_t>(train[i])] = c_train[i];
  for (std::size_t i = 0; i < test.size(); ++i) cluster_of[static_cast<std::size_t>(test[i])] = c_test[i];
  for (Eigen::Index i = 0; i < fs.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    scatter << fs.ue_id[u] << ',' << fixed(fs.t_s[u], 6) << ','
            << (split.test.contains(fs.ue_id[u]) ? "test" : "train") << ','
            << names[static_cast<std::size_t>(y[u])] << ',' << cluster_of[u] << ','
            << fixed(projected(i, 0), 6) << ',' << fixed(n_comp > 1 ? projected(i, 1) : 0.0, 6)
            << '\n';
  }
  write_csv(out_dir / "scatter.csv", scatter.str());
  io::write_text_file(out_dir / "cluster_metrics.json", dump_json(metrics));
  spdlog::info("{}: k={} purity test rows {:.4f}, test UEs {:.4f}", recipe.name, k,
               metrics["purity"]["test_rows"].get<double>(),
               metrics["purity"]["test_ues"].get<double>());
  return metrics;
}

Json cmd_embed(const AppConfig& config, const fs::path& dataset_dir,
               const ExperimentRecipe& recipe, const fs::path& out_dir) {
  if (recipe.method != Method::Tsne) {
    throw ConfigError("recipe '" + recipe.name + "' is not a t-SNE recipe");
  }
  const Dataset d = load_dataset(dataset_dir);
  const Labelled l = label_dataset(d, recipe.labels);
  const auto opts = recipe.fingerprint.value_or(config.learn.fingerprint);
  const learn::FingerprintSet fs = fingerprints_for(d, l, opts);
  const Labels y = row_labels(fs, l.ue_label);

  // Seeded subsample, kept in canonical row order.
  std::vector<int> rows(static_cast<std::size_t>(fs.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  if (recipe.max_rows > 0 && rows.size() > static_cast<std::size_t>(recipe.max_rows)) {
    std::mt19937_64 rng(derive_seed(config.learn.seed, 0x7453));
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(recipe.max_rows));
    std::sort(rows.begin(), rows.end());
  }
  const Matrix sub = learn::select_rows(fs.values, rows);
  const auto scaler = learn::ScalingModel::fit(sub, opts.scaling);
  const Matrix scaled = scaler.apply(sub);
  const int n_comp = static_cast<int>(
      std::min<Eigen::Index>({config.learn.pca_components, scaled.cols(), scaled.rows()}));
  const Matrix reduced = learn::pca_fit(scaled, n_comp).transform(scaled);

  learn::TsneOptions t;
  t.perplexity = recipe.perplexity;
  t.n_iter = recipe.n_iter;
  t.seed = config.learn.seed;
  learn::TsneEmbedding emb;
  try {
    emb = learn::tsne_embed(reduced, t);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("cannot embed this dataset: ") + e.what());
  }

  double worst_rise = 0.0;
  for (std::size_t i = 1; i < emb.kl_history.size(); ++i) {
    worst_rise = std::max(worst_rise, emb.kl_history[i] - emb.kl_history[i - 1]);
  }
  const Labels y_sub = pick(y, rows);
  learn::KMeansOptions km;
  km.k = static_cast<int>(recipe.labels.size());
  km.seed = config.learn.seed;
  km.n_restarts = config.learn.kmeans_restarts;
  const Labels clusters = learn::kmeans_assign(learn::kmeans_fit(emb.points, km), emb.points);

  Json metrics = {{"recipe", recipe.name},
                  {"method", to_string(recipe.method)},
                  {"classes", recipe.class_names()},
                  {"ue_counts", label_counts(recipe.labels, l.ue_count)},
                  {"fingerprint", fingerprint_json(opts)},
                  {"rows", rows.size()},
                  {"pca_components", n_comp},
                  {"perplexity", emb.perplexity},
                  {"n_iter", t.n_iter},
                  {"kl_after_exaggeration", emb.kl_after_exaggeration},
                  {"final_kl", emb.final_kl},
                  {"max_kl_rise", worst_rise},
                  {"embedding_kmeans_purity", learn::cluster_purity(clusters, y_sub)}};

  const auto names = recipe.class_names();
  std::ostringstream csv;
  csv << "ue_id,t_s,label,x,y\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<std::size_t>(rows[i]);
    csv << fs.ue_id[r] << ',' << fixed(fs.t_s[r], 6) << ',' << names[static_cast<std::size_t>(y[r])]
        << ',' << fixed(emb.points(static_cast<Eigen::Index>(i), 0), 6) << ','
        << fixed(emb.points(static_cast<Eigen::Index>(i), 1), 6) << '\n';
  }
  write_csv(out_dir / "embedding.csv", csv.str());
  std::string kl = "iteration,kl\n";
  const int first = t.n_iter - static_cast<int>(emb.kl_history.size()) + 1;
  for (std::size_t i = 0; i < emb.kl_history.size(); ++i) {
    kl += std::to_string(first + static_cast<int>(i)) + "," + fixed(emb.kl_history[i], 8) + "\n";
  }
  write_csv(out_dir / "kl_history.csv", kl);
  io::write_text_file(out_dir / "embed_metrics.json", dump_json(metrics));
  spdlog::info("{}: {} rows, KL {:.4f} -> {:.4f}", recipe.name, rows.size(),
               emb.kl_after_exaggeration, emb.final_kl);
  return metrics;
}

Json cmd_train(const AppConfig& config, const fs::path& dataset_dir,
               const ExperimentRecipe& recipe, const fs::path& out_dir) {
  if (recipe.method != Method::ExtraTrees && recipe.method != Method::AdaBoost) {
    throw ConfigError("recipe '" + recipe.name + "' is not a supervised recipe");
  }
  const Dataset d = load_dataset(dataset_dir);
  const Labelled l = label_dataset(d, recipe.labels);
  const auto opts = recipe.fingerprint.value_or(config.learn.fingerprint);
  const learn::FingerprintSet fs = fingerprints_for(d, l, opts);
  const Labels y = row_labels(fs, l.ue_label);
  const UeSplit split = split_by_ue(l.ue_label, config.learn.test_fraction, config.learn.seed);
  const auto train = rows_in(fs, split.train);
  const auto test = rows_in(fs, split.test);
  const auto names = recipe.class_names();
  const int n_classes = static_cast<int>(names.size());
  const Labels y_train = pick(y, train);
  const Labels y_test = pick(y, test);
  for (int c = 0; c < n_classes; ++c) {
    const bool in_train = std::find(y_train.begin(), y_train.end(), c) != y_train.end();
    const bool in_test = std::find(y_test.begin(), y_test.end(), c) != y_test.end();
    if (!in_train || !in_test) {
      throw DataError("label '" + names[static_cast<std::size_t>(c)] +
                      "' has no fingerprints in the " + (in_train ? "test" : "training") +
                      " split; simulate a larger population or a longer duration");
    }
  }

  learn::ModelBundle bundle;
  bundle.recipe = recipe.name;
  bundle.class_names = names;
  bundle.report_width = static_cast<int>(fs.values.cols()) / (2 * opts.window);
  bundle.fingerprint = opts;
  bundle.scaler = learn::ScalingModel::fit(learn::select_rows(fs.values, train), opts.scaling);
  Matrix x_train = bundle.scaler.apply(learn::select_rows(fs.values, train));
  if (recipe.pca_components > 0) {
    const int n = static_cast<int>(
        std::min<Eigen::Index>({recipe.pca_components, x_train.cols(), x_train.rows()}));
    bundle.pca = learn::pca_fit(x_train, n);
    x_train = bundle.pca->transform(x_train);
  }
  const Matrix x_test = learn::select_rows(fs.values, test);

  std::vector<std::uint64_t> seeds = recipe.seeds;
  if (seeds.empty()) seeds = {config.learn.seed};
  Json per_seed = Json::array();
  Json held_out;
  double mean_rate = 0.0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    learn::TreeEnsemble e;
    if (recipe.method == Method::ExtraTrees) {
      auto o = recipe.extra_trees;
      o.seed = seeds[s];
      e = learn::extra_trees_fit(x_train, y_train, o, n_classes);
    } else {
      auto o = recipe.adaboost;
      o.seed = seeds[s];
      e = learn::adaboost_fit(x_train, y_train, o, n_classes);
    }
    learn::ModelBundle candidate = bundle;
    candidate.ensemble = std::move(e);
    const Labels pred_test = candidate.predict(x_test);
    const Labels pred_train = candidate.ensemble.predict(x_train);
    const double rate = learn::misclassification_rate(pred_test, y_test);
    mean_rate += rate / static_cast<double>(seeds.size());
    per_seed.push_back({{"seed", seeds[s]},
                        {"trees", candidate.ensemble.trees.size()},
                        {"train_error", learn::misclassification_rate(pred_train, y_train)},
                        {"test_error", rate}});
    if (s == 0) {
      held_out = evaluation_block(pred_test, y_test, names);
      bundle.ensemble = std::move(candidate.ensemble);
    }
  }

  nlohmann::json label_json = nlohmann::json::array();
  for (const auto& g : recipe.labels) label_json.push_back({{"name", g.name}, {"members", g.members}});
  bundle.settings_json = nlohmann::json{{"labels", label_json},
                                        {"model_seed", seeds.front()},
                                        {"split_seed", config.learn.seed},
                                        {"test_fraction", config.learn.test_fraction},
                                        {"train_ues", split.train},
                                        {"test_ues", split.test}}
                             .dump();
  learn::save_model(out_dir / "model.cbor", bundle);

  Json metrics = {
      {"recipe", recipe.name},
      {"method", to_string(recipe.method)},
      {"target", learn::to_string(bundle.ensemble.target)},
      {"classes", names},
      {"ue_counts", label_counts(recipe.labels, l.ue_count)},
      {"fingerprint", fingerprint_json(opts)},
      {"pca_components", bundle.pca ? bundle.pca->n_components() : 0},
      {"split",
       {{"test_fraction", config.learn.test_fraction},
        {"seed", config.learn.seed},
        {"train_ues", split.train},
        {"test_ues", split.test}}},
      {"rows", {{"train", train.size()}, {"test", test.size()}, {"skipped_ues", fs.skipped_ues}}},
      {"per_seed", per_seed},
      {"mean_test_error", mean_rate},
      {"held_out", held_out},
      {"reference_rate", recipe.reference_rate ? Json(*recipe.reference_rate) : Json(nullptr)},
      {"max_rate", recipe.max_rate ? Json(*recipe.max_rate) : Json(nullptr)},
      {"within_max_rate", recipe.max_rate ? Json(mean_rate <= *recipe.max_rate) : Json(nullptr)},
  };
  io::write_text_file(out_dir / "train_metrics.json", dump_json(metrics));
  spdlog::info("{}: held-out misclassification {:.4f} over {} rows", recipe.name, mean_rate,
               test.size());
  return metrics;
}

EvalSplit eval_split_from_string(const std::string& s) {
  if (s == "all") return EvalSplit::All;
  if (s == "train") return EvalSplit::Train;
  if (s == "test") return EvalSplit::Test;
  throw ConfigError("unknown split '" + s + "' (all|train|test)");
}

Json cmd_eval(const fs::path& model_path, const fs::path& dataset_dir, EvalSplit split,
              const fs::path& out_dir) {
  const learn::ModelBundle bundle = learn::load_model(model_path);
  const Dataset d = load_dataset(dataset_dir);

  std::vector<LabelGroup> groups;
  std::set<int> train_ues, test_ues;
  try {
    const auto settings = nlohmann::json::parse(bundle.settings_json);
    for (const auto& g : settings.at("labels")) {
      groups.push_back({g.at("name").get<std::string>(), g.at("members").get<std::vector<std::string>>()});
      for (const auto& t : groups.back().members) check_token(t);
    }
    train_ues = settings.at("train_ues").get<std::set<int>>();
    test_ues = settings.at("test_ues").get<std::set<int>>();
  } catch (const std::exception& e) {
    throw ModelError(std::string("model settings are unusable: ") + e.what());
  }
  if (groups.size() != bundle.class_names.size()) throw ModelError("model label table is inconsistent");

  const int width = d.reports.empty() ? 0 : static_cast<int>(d.reports.front().entries.size());
  if (width != bundle.report_width) {
    throw ModelError("model expects " + std::to_string(bundle.input_dim()) +
                     " fingerprint features (report width " + std::to_string(bundle.report_width) +
                     "), dataset yields " + std::to_string(2 * width * bundle.fingerprint.window) +
                     " (report width " + std::to_string(width) + ")");
  }
  Labelled l = label_dataset(d, groups);
  if (split != EvalSplit::All) {
    const auto& keep = split == EvalSplit::Test ? test_ues : train_ues;
    std::erase_if(l.reports, [&](const auto& r) { return !keep.contains(r.ue_id); });
  }
  const learn::FingerprintSet fs = fingerprints_for(d, l, bundle.fingerprint);
  const Labels y = row_labels(fs, l.ue_label);
  const Labels pred = bundle.predict(fs.values);

  const char* split_name = split == EvalSplit::All ? "all" : split == EvalSplit::Test ? "test" : "train";
  Json metrics = {{"model", model_path.filename().string()},
                  {"recipe", bundle.recipe},
                  {"split", split_name},
                  {"evaluation", evaluation_block(pred, y, bundle.class_names)}};
  io::write_text_file(out_dir / "eval_metrics.json", dump_json(metrics));
  spdlog::info("eval on {} split: misclassification {:.4f} over {} rows", split_name,
               metrics["evaluation"]["misclassification_rate"].get<double>(), y.size());
  return metrics;
}

std::string recipes_listing() {
  std::ostringstream os;
  for (const auto& r : builtin_recipes()) {
    os << r.name << "  [" << to_string(r.method) << ", " << to_string(r.grouping) << "]  "
       << r.description;
    if (r.reference_rate) os << " (published " << fixed(100.0 * *r.reference_rate, 1) << "%)";
    os << '\n';
  }
  return os.str();
}

}  // namespace beamprint::app
