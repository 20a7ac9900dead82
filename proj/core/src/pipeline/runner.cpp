#include "tn4ml/pipeline/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "tn4ml/rng.hpp"
#include "tn4ml/serialization.hpp"

namespace tn4ml {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
  if (!f) throw Error("write failed: " + p.string());
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error("cannot read " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

fs::path under(const fs::path& root, const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : root / p; }

std::string fmt_target(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t split_seed(const PipelineConfig& cfg) { return cfg.data.split_seed.value_or(derive_seed(cfg.seed, 3)); }
std::uint64_t init_seed(const PipelineConfig& cfg) { return derive_seed(cfg.seed, 1); }
std::uint64_t train_seed(const PipelineConfig& cfg) { return derive_seed(cfg.seed, 2); }

std::vector<std::size_t> shuffled(std::vector<std::size_t> v, CounterRng& rng) {
  rng.shuffle(v);
  return v;
}

std::vector<std::size_t> take(const std::vector<std::size_t>& v, std::size_t from, std::size_t count) {
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(from + count)};
}

Dataset to_features(Dataset d, const DataConfig& dc) {
  if (d.height == 0) return d;
  if (dc.downsample) d = downsample(d, dc.downsample->first, dc.downsample->second);
  for (auto& s : d.samples) s = flatten_zigzag(s, d.height, d.width, dc.flatten);
  return d;
}

EmbeddedDataset embed(const Dataset& d, std::span<const LocalMapSpec> maps, bool keep_labels) {
  EmbeddedDataset out;
  out.states.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    try {
      out.states.push_back(embed_product_state(d.samples[i], maps));
    } catch (const Error& e) {
      throw Error("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  if (keep_labels) out.labels = d.labels;
  return out;
}

std::vector<int> binary_truth(const PipelineConfig& cfg, const Dataset& d) {
  std::vector<int> out;
  if (!d.has_labels()) return out;
  for (std::size_t l : d.labels) {
    out.push_back(cfg.task == Task::anomaly ? (l == *cfg.data.normal_class ? 1 : 0) : (l == 1 ? 1 : 0));
  }
  bool pos = false, neg = false;
  for (int b : out) (b ? pos : neg) = true;
  if (!pos || !neg) out.clear();
  return out;
}

struct SplitEval {
  json metrics;
  std::optional<RocCurve> curve;
  std::vector<double> scores;
  std::vector<int> truth;
};

SplitEval evaluate_split(const PipelineConfig& cfg, const TensorTrain& model, const EmbeddedDataset& ds,
                         const std::vector<int>& truth, bool with_loss) {
  SplitEval out;
  const auto pred = predict(model, ds, cfg.train.threads);
  json& m = out.metrics;
  m["n"] = ds.size();
  std::optional<double> acc;
  if (cfg.task == Task::classify) {
    acc = accuracy(pred.labels, ds.labels);
    m["accuracy"] = *acc;
  }
  if (with_loss) {
    EngineOptions eo;
    eo.threads = cfg.train.threads;
    eo.want_gradients = false;
    m["loss"] = gradient_engine(model, ds, cfg.loss, eo).value;
  }
  if (!truth.empty()) {
    out.scores.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      out.scores[i] = cfg.task == Task::classify ? pred.probabilities[i].at(1) : pred.log_scores[i];
    }
    out.truth = truth;
    out.curve = roc(out.scores, truth, cfg.eval.positive_means_high);
    m.update(to_json(summarize(*out.curve, acc, cfg.seed)));
    json tf = json::object(), ft = json::object();
    for (double t : cfg.eval.fpr_targets) tf[fmt_target(t)] = tpr_at_fpr(*out.curve, t);
    for (double t : cfg.eval.tpr_targets) ft[fmt_target(t)] = fpr_at_tpr(*out.curve, t);
    m["tpr_at_fpr"] = tf;
    m["fpr_at_tpr"] = ft;
  }
  return out;
}

std::map<std::string, SplitEval> evaluate_splits(const PipelineConfig& cfg, const TensorTrain& model,
                                                 const PreparedData& data) {
  std::map<std::string, SplitEval> out;
  if (data.validation.size() > 0) {
    out["validation"] = evaluate_split(cfg, model, data.validation, data.validation_binary, true);
  }
  if (data.test.size() > 0) {
    out["test"] = evaluate_split(cfg, model, data.test, data.test_binary, cfg.task == Task::classify);
  }
  return out;
}

std::string primary_split(const PipelineConfig& cfg) { return cfg.task == Task::classify ? "validation" : "test"; }

json assemble_metrics(const PipelineConfig& cfg, const std::map<std::string, SplitEval>& ev) {
  json m{{"task", std::string(to_string(cfg.task))}, {"seed", cfg.seed}, {"primary_split", primary_split(cfg)}};
  for (const auto& [name, e] : ev) m[name] = e.metrics;
  return m;
}

std::string init_name(const InitScheme& s) {
  switch (s.index()) {
    case 0: return "gram_schmidt";
    case 1: return "randn";
    case 2: return "haar";
    default: return "identity_bias";
  }
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json model_summary(const TensorTrain& tt) {
  json center = nullptr;
  if (tt.canonical_center()) center = *tt.canonical_center();
  return {{"kind", std::string(to_string(tt.kind()))},
          {"n_sites", tt.size()},
          {"bond_dims", tt.bond_dims()},
          {"max_bond", tt.max_bond_dim()},
          {"parameter_count", tt.parameter_count()},
          {"lower_positions", tt.lower_positions()},
          {"canonical_center", center},
          {"log_norm", log_norm(tt)}};
}

}  // namespace

PipelineConfig resolve(PipelineConfig cfg, const RunOptions& o) {
  if (o.seed) {
    cfg.seed = *o.seed;
  } else if (o.use_env_seed) {
    if (const char* env = std::getenv("TN4ML_SEED"); env && *env) {
      char* end = nullptr;
      errno = 0;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (errno != 0 || *end != '\0' || env[0] == '-') throw ConfigError("TN4ML_SEED is not an unsigned integer");
      cfg.seed = v;
    }
  }
  if (o.threads) cfg.train.threads = *o.threads;
  if (o.deterministic) cfg.train.deterministic = *o.deterministic;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.data_root) cfg.data.root = *o.data_root;
  if (cfg.train.threads == 0) throw ConfigError("threads must be >= 1");
  return cfg;
}

PreparedData prepare_data(const PipelineConfig& cfg, const std::optional<MinMaxScaler>& scaler) {
  const DataConfig& dc = cfg.data;
  Dataset pool, test_pool;
  bool separate_test = false;
  if (dc.format == "csv") {
    pool = load_csv(under(dc.root, dc.path), dc.label_column, dc.drop_columns);
  } else {
    pool = to_features(load_idx(under(dc.root, dc.train_images), under(dc.root, dc.train_labels)), dc);
    if (!dc.test_images.empty()) {
      test_pool = to_features(load_idx(under(dc.root, dc.test_images), under(dc.root, dc.test_labels)), dc);
      separate_test = true;
    }
  }

  CounterRng rng(split_seed(cfg));
  std::vector<std::size_t> candidates, rest;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const bool eligible = cfg.task == Task::classify || (pool.has_labels() && pool.labels[i] == *dc.normal_class);
    (eligible ? candidates : rest).push_back(i);
  }
  candidates = shuffled(candidates, rng);
  const std::size_t need = dc.train_size + dc.validation_size;
  if (candidates.size() < need) {
    throw ShapeError("need " + std::to_string(need) + " training/validation samples, only " +
                     std::to_string(candidates.size()) + " available");
  }
  const auto train_rows = take(candidates, 0, dc.train_size);
  const auto val_rows = take(candidates, dc.train_size, dc.validation_size);

  Dataset train = subset(pool, train_rows);
  Dataset val = subset(pool, val_rows);
  Dataset test;
  if (separate_test) {
    std::vector<std::size_t> all(test_pool.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    all = shuffled(all, rng);
    const std::size_t n = std::min(all.size(), dc.test_size.value_or(all.size()));
    if (dc.test_size && *dc.test_size > all.size()) throw ShapeError("test_size exceeds the test file");
    test = subset(test_pool, take(all, 0, n));
  } else {
    for (std::size_t i = need; i < candidates.size(); ++i) rest.push_back(candidates[i]);
    std::sort(rest.begin(), rest.end());
    rest = shuffled(rest, rng);
    if (dc.test_size && *dc.test_size > rest.size()) throw ShapeError("test_size exceeds the remaining samples");
    test = subset(pool, take(rest, 0, dc.test_size.value_or(rest.size())));
  }

  PreparedData out;
  out.n_features = train.n_features();
  validate(cfg, out.n_features);
  if (dc.minmax) {
    out.scaler = scaler ? *scaler : MinMaxScaler::fit(train);
    train = out.scaler->transform(std::move(train));
    val = out.scaler->transform(std::move(val));
    test = out.scaler->transform(std::move(test));
  }
  const bool labels = cfg.task == Task::classify;
  if (labels) {
    for (const auto* d : {&train, &val, &test}) {
      for (std::size_t l : d->labels) {
        if (l >= *cfg.model.output_dim) {
          throw ShapeError("label " + std::to_string(l) + " does not fit output_dim " +
                           std::to_string(*cfg.model.output_dim));
        }
      }
    }
  }
  out.train = embed(train, cfg.embedding, labels);
  out.validation = embed(val, cfg.embedding, labels);
  out.test = embed(test, cfg.embedding, labels);
  out.validation_binary = binary_truth(cfg, val);
  out.test_binary = binary_truth(cfg, test);
  for (std::size_t f = 0; f < out.n_features; ++f) {
    out.local_dims.push_back(output_dim(cfg.embedding.size() == 1 ? cfg.embedding[0] : cfg.embedding[f]));
  }
  return out;
}

TensorTrain build_initial_model(const PipelineConfig& cfg, const PreparedData& data) {
  const ModelConfig& mc = cfg.model;
  const std::size_t n = data.n_features;
  std::optional<LowerSpec> lower;
  if (cfg.task == Task::classify) {
    if (mc.kind != NetworkKind::mps) throw ConfigError("classify builds an mps with one output leg");
    lower = LowerSpec{SpacingSpec::explicit_positions({mc.output_site.value_or(n / 2)}), *mc.output_dim};
  } else if (mc.kind == NetworkKind::mpo) {
    lower = LowerSpec{SpacingSpec::uniform(1), mc.lower_dim};
  } else {
    lower = LowerSpec{*mc.spacing, mc.lower_dim};
  }
  const auto sigs = build_shape(n, data.local_dims, lower, mc.max_bond);
  return init_model(sigs, mc.kind, InitSpec{cfg.init, init_seed(cfg)});
}

json evaluate_model(const PipelineConfig& cfg, const TensorTrain& model, const PreparedData& data) {
  return assemble_metrics(cfg, evaluate_splits(cfg, model, data));
}

RunResult run_pipeline(const PipelineConfig& input, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = iso_now();
  const PipelineConfig cfg = staged("config", [&] { return resolve(input, options); });
  std::ostream* log = options.log;
  const fs::path dir = cfg.output_dir;

  const PreparedData data = staged("data", [&] { return prepare_data(cfg); });
  if (log) {
    *log << "[data] " << data.n_features << " features; train " << data.train.size() << ", validation "
         << data.validation.size() << ", test " << data.test.size() << "\n";
  }
  TensorTrain initial = staged("model", [&] { return build_initial_model(cfg, data); });
  if (log) *log << "[model] " << to_string(initial.kind()) << ", " << initial.parameter_count() << " parameters\n";

  staged("write", [&] {
    fs::create_directories(dir);
    write_text(dir / "config.resolved.json", to_json(cfg).dump(2) + "\n");
    if (data.scaler) write_text(dir / "scaler.json", data.scaler->to_json().dump(2) + "\n");
    save_model(initial, dir / "model_initial");
    return 0;
  });

  TrainResult trained = staged("train", [&] {
    TrainConfig tc = cfg.train;
    tc.seed = train_seed(cfg);
    if (log) {
      tc.on_epoch = [log](const EpochRecord& r) {
        *log << "[train] epoch " << r.epoch << " loss " << fmt17(r.train_loss);
        if (r.val_loss) *log << " val " << fmt17(*r.val_loss);
        *log << " (" << std::fixed << std::setprecision(2) << r.epoch_seconds << " s)" << std::defaultfloat
             << std::setprecision(6) << "\n";
      };
    }
    if (tc.early_stopping && tc.early_stopping->monitor == Monitor::validation && data.validation.size() == 0) {
      throw ConfigError("early stopping on validation loss needs validation_size > 0");
    }
    return train(initial, data.train, data.validation.size() ? &data.validation : nullptr, cfg.loss, tc);
  });

  const auto ev = staged("eval", [&] { return evaluate_splits(cfg, trained.model, data); });
  const json metrics = assemble_metrics(cfg, ev);

  RunResult result{dir, cfg, trained.model, trained.log, metrics, 0.0};
  staged("write", [&] {
    save_model(trained.model, dir / "model_final");
    write_text(dir / "train_log.csv", trained.log.to_csv());
    write_text(dir / "train_log.json", trained.log.to_json().dump(2) + "\n");
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");
    for (const auto& [name, e] : ev) {
      const fs::path sub = dir / "eval" / name;
      fs::create_directories(sub);
      if (e.curve) {
        export_metrics(sub, *e.curve, metrics_from_json(e.metrics));
        std::string csv = "index,label,score\n";
        for (std::size_t i = 0; i < e.scores.size(); ++i) {
          csv += std::to_string(i) + "," + std::to_string(e.truth[i]) + "," + fmt17(e.scores[i]) + "\n";
        }
        write_text(sub / "scores.csv", csv);
      } else {
        write_text(sub / "metrics.json", e.metrics.dump(2) + "\n");
      }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json best = nullptr;
    if (trained.log.best_epoch) best = *trained.log.best_epoch;
    const json manifest{{"name", cfg.name},
                        {"task", std::string(to_string(cfg.task))},
                        {"version", kVersion},
                        {"seed", cfg.seed},
                        {"seeds", {{"init", init_seed(cfg)}, {"train", train_seed(cfg)}, {"split", split_seed(cfg)}}},
                        {"started_at", started},
                        {"wall_seconds", result.wall_seconds},
                        {"threads", cfg.train.threads},
                        {"deterministic", cfg.train.deterministic},
                        {"n_features", data.n_features},
                        {"n_train", data.train.size()},
                        {"n_validation", data.validation.size()},
                        {"n_test", data.test.size()},
                        {"epochs_run", trained.log.epochs.size()},
                        {"best_epoch", best},
                        {"stopped_early", trained.log.stopped_early}};
    write_text(dir / "run_manifest.json", manifest.dump(2) + "\n");
    return 0;
  });
  if (log) *log << "[done] " << dir.string() << " in " << result.wall_seconds << " s\n";
  return result;
}

json evaluate_run(const fs::path& run_dir, const std::optional<fs::path>& data_root, std::size_t threads) {
  PipelineConfig cfg = staged("config", [&] { return load_config(run_dir / "config.resolved.json"); });
  if (data_root) cfg.data.root = *data_root;
  cfg.train.threads = threads;
  std::optional<MinMaxScaler> scaler;
  if (fs::exists(run_dir / "scaler.json")) scaler = MinMaxScaler::from_json(read_json(run_dir / "scaler.json"));
  const PreparedData data = staged("data", [&] { return prepare_data(cfg, scaler); });
  const TensorTrain model = staged("model", [&] { return load_model(run_dir / "model_final"); });
  return staged("eval", [&] { return evaluate_model(cfg, model, data); });
}

SweepGrid parse_grid(const json& j) {
  if (!j.is_object()) throw ConfigError("grid: expected an object");
  SweepGrid g;
  for (const auto& [k, v] : j.items()) {
    if (k != "bond" && k != "spacing" && k != "init") throw ConfigError("grid: unknown key '" + k + "'");
    if (!v.is_array() || v.empty()) throw ConfigError("grid." + k + ": expected a nonempty list");
  }
  try {
    if (j.contains("bond")) g.bond = j.at("bond").get<std::vector<std::size_t>>();
    if (j.contains("spacing")) g.spacing = j.at("spacing").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (j.contains("init")) {
    for (const auto& item : j.at("init")) {
      // Reuse the config parser for one init block.
      json probe = item.is_string() ? json{{"scheme", item}} : item;
      try {
        json cfg{{"task", "anomaly"},
                 {"data", {{"format", "idx"}, {"train_images", "x"}, {"train_labels", "x"}, {"train_size", 1}, {"normal_class", 0}}},
                 {"embedding", {{"type", "trigonometric"}}},
                 {"model", {{"kind", "mpo"}, {"max_bond", 1}}},
                 {"init", probe},
                 {"loss", {{"primary", "log_quad_norm"}}}};
        g.init.push_back(parse_config(cfg).init);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("grid.init: ") + e.what());
      }
    }
  }
  for (std::size_t b : g.bond)
    if (b == 0) throw ConfigError("grid.bond: entries must be positive");
  for (std::size_t s : g.spacing)
    if (s == 0) throw ConfigError("grid.spacing: entries must be positive");
  return g;
}

std::vector<SweepPoint> sweep_hyperparameters(const PipelineConfig& base_in, const SweepGrid& grid,
                                              std::size_t repeats, const RunOptions& options) {
  if (repeats == 0) throw ConfigError("repeats must be >= 1");
  const PipelineConfig base = resolve(base_in, options);
  const fs::path root = base.output_dir;
  fs::create_directories(root);
  const std::vector<std::size_t> bonds = grid.bond.empty() ? std::vector<std::size_t>{base.model.max_bond} : grid.bond;
  std::vector<std::optional<std::size_t>> spacings;
  if (grid.spacing.empty()) {
    spacings.push_back(base.model.spacing && base.model.spacing->is_uniform()
                           ? std::optional<std::size_t>(base.model.spacing->stride())
                           : std::nullopt);
  } else {
    for (auto s : grid.spacing) spacings.emplace_back(s);
  }
  const std::vector<InitScheme> inits = grid.init.empty() ? std::vector<InitScheme>{base.init} : grid.init;

  const std::vector<std::string> metric_names{"accuracy", "auc", "tpr_at_fpr_01", "tpr_at_fpr_10", "fpr_at_tpr_95",
                                              "loss"};
  std::vector<SweepPoint> points;
  std::string runs_csv = "point,repeat,seed,status";
  for (const auto& m : metric_names) runs_csv += "," + m;
  runs_csv += ",error\n";

  for (std::size_t b : bonds) {
    for (const auto& s : spacings) {
      for (std::size_t i = 0; i < inits.size(); ++i) {
        SweepPoint pt;
        pt.bond = b;
        pt.spacing = grid.spacing.empty() ? std::nullopt : s;
        pt.init = init_name(inits[i]) + (inits.size() > 1 ? std::to_string(i) : "");
        std::string name = "D" + std::to_string(b);
        if (pt.spacing) name += "_S" + std::to_string(*pt.spacing);
        if (!grid.init.empty()) name += "_" + pt.init;
        for (std::size_t r = 0; r < repeats; ++r) {
          PipelineConfig cfg = base;
          cfg.model.max_bond = b;
          if (cfg.train.max_bond) cfg.train.max_bond = b;
          if (pt.spacing) cfg.model.spacing = SpacingSpec::uniform(*pt.spacing);
          cfg.init = inits[i];
          cfg.seed = derive_seed(base.seed, r);
          cfg.name = base.name + "_" + name + "_r" + std::to_string(r);
          RunOptions ro;
          ro.use_env_seed = false;
          ro.output_dir = root / (name + "_r" + std::to_string(r));
          ro.log = options.log;
          if (options.log) *options.log << "[sweep] " << name << " repeat " << r << "\n";
          std::string row = name + "," + std::to_string(r) + "," + std::to_string(cfg.seed);
          try {
            const auto res = run_pipeline(cfg, ro);
            const json& split = res.metrics.at(res.metrics.at("primary_split").get<std::string>());
            pt.runs.push_back(res.metrics);
            row += ",ok";
            for (const auto& m : metric_names) row += "," + (split.contains(m) ? fmt17(split[m].get<double>()) : "");
            row += ",\n";
          } catch (const std::exception& e) {
            pt.failures.push_back(e.what());
            if (options.log) *options.log << "[sweep] " << name << " repeat " << r << " failed: " << e.what() << "\n";
            row += ",failed";
            for (std::size_t m = 0; m < metric_names.size(); ++m) row += ",";
            std::string msg = e.what();
            for (char& c : msg)
              if (c == '"' || c == '\n') c = '\'';
            row += ",\"" + msg + "\"\n";
          }
          runs_csv += row;
        }
        for (const auto& m : metric_names) {
          std::vector<double> values;
          for (const auto& run : pt.runs) {
            const json& split = run.at(run.at("primary_split").get<std::string>());
            if (split.contains(m) && split[m].is_number()) values.push_back(split[m].get<double>());
          }
          if (!values.empty() && values.size() == pt.runs.size()) pt.summary.emplace_back(m, mean_std(values));
        }
        points.push_back(std::move(pt));
      }
    }
  }

  std::string csv = "bond,spacing,init,n_ok,n_failed";
  for (const auto& m : metric_names) csv += "," + m + "_mean," + m + "_std";
  csv += "\n";
  for (const auto& p : points) {
    csv += std::to_string(p.bond) + "," + (p.spacing ? std::to_string(*p.spacing) : "") + "," + p.init + "," +
           std::to_string(p.runs.size()) + "," + std::to_string(p.failures.size());
    for (const auto& m : metric_names) {
      const auto it = std::find_if(p.summary.begin(), p.summary.end(), [&](const auto& e) { return e.first == m; });
      csv += it == p.summary.end() ? ",," : "," + fmt17(it->second.mean) + "," + fmt17(it->second.std);
    }
    csv += "\n";
  }
  write_text(root / "summary.csv", csv);
  write_text(root / "runs.csv", runs_csv);
  return points;
}

json inspect(const fs::path& path) {
  if (fs::exists(path / "manifest.json")) return {{"model", model_summary(load_model(path))}};
  if (!fs::exists(path / "model_final")) throw Error(path.string() + " is neither a run directory nor a model directory");
  json out;
  out["model"] = model_summary(load_model(path / "model_final"));
  if (fs::exists(path / "run_manifest.json")) out["run"] = read_json(path / "run_manifest.json");
  if (fs::exists(path / "metrics.json")) out["metrics"] = read_json(path / "metrics.json");
  if (fs::exists(path / "train_log.json")) {
    const json log = read_json(path / "train_log.json");
    if (!log["epochs"].empty()) out["last_epoch"] = log["epochs"].back();
    out["best_epoch"] = log["best_epoch"];
  }
  return out;
}

}  // namespace tn4ml
