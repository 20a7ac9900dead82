#include "tn4ml/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

using nlohmann::json;

class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T need(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(at(key) + ": required");
    return convert<T>(key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  void mark(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Obj child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Obj(has(key) ? j_.at(key) : empty, at(key));
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }
  }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const json& v = j_.at(key);
    bool ok = true;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer() && (std::is_signed_v<T> || v.get<long long>() >= 0 || v.is_number_unsigned());
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    }
    if (!ok) throw ConfigError(at(key) + ": wrong type (" + std::string(v.type_name()) + ")");
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(at(key) + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
E pick(const std::string& where, const std::string& value,
       std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [n, e] : options) {
    if (value == n) return e;
    names += names.empty() ? n : std::string("|") + n;
  }
  throw ConfigError(where + ": '" + value + "' is not one of " + names);
}

LocalMapSpec parse_map(const json& j, const std::string& path) {
  Obj o(j, path);
  const auto type = o.need<std::string>("type");
  LocalMapSpec out;
  if (type == "trigonometric") {
    out = TrigonometricMap{o.get<std::size_t>("k", 1)};
  } else if (type == "fourier") {
    out = FourierMap{o.get<std::size_t>("p", 2), o.get<bool>("normalize", false)};
  } else if (type == "gaussian_rbf") {
    const auto centers = o.need<std::vector<double>>("centers");
    out = GaussianRbfMap{centers, o.get<double>("gamma", 1.0), o.get<bool>("normalize", false)};
  } else if (type == "polynomial") {
    out = PolynomialMap{o.get<std::size_t>("degree", 2), o.get<bool>("include_bias", true),
                        o.get<bool>("normalize", false)};
  } else {
    throw ConfigError(o.at("type") + ": unknown map '" + type + "'");
  }
  o.finish();
  return out;
}

json map_to_json(const LocalMapSpec& m) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TrigonometricMap>) {
          return {{"type", "trigonometric"}, {"k", s.k}};
        } else if constexpr (std::is_same_v<T, FourierMap>) {
          return {{"type", "fourier"}, {"p", s.p}, {"normalize", s.normalize}};
        } else if constexpr (std::is_same_v<T, GaussianRbfMap>) {
          return {{"type", "gaussian_rbf"}, {"centers", s.centers}, {"gamma", s.gamma}, {"normalize", s.normalize}};
        } else {
          return {{"type", "polynomial"},
                  {"degree", s.degree},
                  {"include_bias", s.include_bias},
                  {"normalize", s.normalize}};
        }
      },
      m);
}

InitScheme parse_init(Obj o) {
  const auto scheme = o.get<std::string>("scheme", "gram_schmidt");
  InitScheme out;
  if (scheme == "gram_schmidt") {
    GramSchmidtInit g;
    if (o.has("base")) {
      Obj b = o.child("base");
      const auto type = b.get<std::string>("type", "normal");
      if (type == "normal") {
        g.base = NormalBase{b.get<double>("mu", 0.0), b.get<double>("sigma", 1.0)};
      } else if (type == "uniform") {
        g.base = UniformBase{b.get<double>("lo", -1.0), b.get<double>("hi", 1.0)};
      } else {
        throw ConfigError(b.at("type") + ": unknown base '" + type + "'");
      }
      b.finish();
    } else {
      o.mark("base");
    }
    out = g;
  } else if (scheme == "randn") {
    out = RandnInit{o.get<double>("mu", 0.0), o.get<double>("sigma", 1.0), o.opt<double>("noise_sigma")};
  } else if (scheme == "haar") {
    out = HaarInit{};
  } else if (scheme == "identity_bias") {
    out = IdentityBiasInit{o.get<double>("noise_sigma", 1e-2)};
  } else {
    throw ConfigError(o.at("scheme") + ": unknown init '" + scheme + "'");
  }
  o.finish();
  return out;
}

json init_to_json(const InitScheme& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GramSchmidtInit>) {
          if (const auto* n = std::get_if<NormalBase>(&v.base)) {
            return {{"scheme", "gram_schmidt"}, {"base", {{"type", "normal"}, {"mu", n->mu}, {"sigma", n->sigma}}}};
          }
          const auto& u = std::get<UniformBase>(v.base);
          return {{"scheme", "gram_schmidt"}, {"base", {{"type", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}}};
        } else if constexpr (std::is_same_v<T, RandnInit>) {
          json j{{"scheme", "randn"}, {"mu", v.mu}, {"sigma", v.sigma}, {"noise_sigma", nullptr}};
          if (v.noise_sigma) j["noise_sigma"] = *v.noise_sigma;
          return j;
        } else if constexpr (std::is_same_v<T, HaarInit>) {
          return {{"scheme", "haar"}};
        } else {
          return {{"scheme", "identity_bias"}, {"noise_sigma", v.noise_sigma}};
        }
      },
      s);
}

SpacingSpec parse_spacing(const json& j, const std::string& path) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() > 0)) {
    return SpacingSpec::uniform(j.get<std::size_t>());
  }
  if (j.is_array()) {
    try {
      return SpacingSpec::explicit_positions(j.get<std::vector<std::size_t>>());
    } catch (const json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  throw ConfigError(path + ": expected a positive stride or a position list");
}

void parse_data(Obj o, DataConfig& d) {
  d.format = o.get<std::string>("format", d.format);
  pick<int>(o.at("format"), d.format, {{"csv", 0}, {"idx", 1}});
  d.root = o.get<std::string>("root", d.root.string());
  d.path = o.get<std::string>("path", "");
  d.label_column = o.opt<std::string>("label_column");
  d.drop_columns = o.get<std::vector<std::string>>("drop_columns", {});
  d.train_images = o.get<std::string>("train_images", "");
  d.train_labels = o.get<std::string>("train_labels", "");
  d.test_images = o.get<std::string>("test_images", "");
  d.test_labels = o.get<std::string>("test_labels", "");
  d.normal_class = o.opt<std::size_t>("normal_class");
  if (const auto ds = o.opt<std::vector<std::size_t>>("downsample")) {
    if (ds->size() != 2) throw ConfigError(o.at("downsample") + ": expected [height, width]");
    d.downsample = std::pair{(*ds)[0], (*ds)[1]};
  }
  d.flatten = pick<FlattenOrder>(o.at("flatten"), o.get<std::string>("flatten", "row_major"),
                   {{"row_major", FlattenOrder::row_major}, {"snake", FlattenOrder::snake}});
  d.train_size = o.need<std::size_t>("train_size");
  d.validation_size = o.get<std::size_t>("validation_size", 0);
  d.test_size = o.opt<std::size_t>("test_size");
  d.minmax = o.get<bool>("minmax", d.format == "csv");
  d.split_seed = o.opt<std::uint64_t>("split_seed");
  o.finish();
}

void parse_model(Obj o, ModelConfig& m) {
  m.kind = network_kind_from_string(o.need<std::string>("kind"));
  m.max_bond = o.need<std::size_t>("max_bond");
  o.mark("spacing");
  if (o.has("spacing")) m.spacing = parse_spacing(o.raw("spacing"), o.at("spacing"));
  m.lower_dim = o.get<std::size_t>("lower_dim", 2);
  m.output_dim = o.opt<std::size_t>("output_dim");
  m.output_site = o.opt<std::size_t>("output_site");
  o.finish();
}

void parse_loss(Obj o, LossSpec& l) {
  try {
    l.primary = loss_kind_from_string(o.need<std::string>("primary"));
  } catch (const RangeError& e) {
    throw ConfigError(o.at("primary") + ": " + e.what());
  }
  l.logquad_variant = pick<LogQuadVariant>(o.at("logquad_variant"), o.get<std::string>("logquad_variant", "shifted"),
                           {{"shifted", LogQuadVariant::shifted}, {"centered", LogQuadVariant::centered}});
  l.reduction = pick<Reduction>(o.at("reduction"), o.get<std::string>("reduction", "mean"),
                     {{"mean", Reduction::mean}, {"sum", Reduction::sum}});
  l.regularizers.clear();
  o.mark("regularizers");
  if (o.has("regularizers")) {
    const json& regs = o.raw("regularizers");
    if (!regs.is_array()) throw ConfigError(o.at("regularizers") + ": expected a list");
    for (std::size_t i = 0; i < regs.size(); ++i) {
      Obj r(regs[i], o.at("regularizers") + "[" + std::to_string(i) + "]");
      Regularizer reg;
      reg.kind = pick<RegularizerKind>(r.at("kind"), r.need<std::string>("kind"),
                      {{"log_norm", RegularizerKind::log_norm}, {"relu_log_norm", RegularizerKind::relu_log_norm}});
      reg.weight = r.need<double>("weight");
      r.finish();
      l.regularizers.push_back(reg);
    }
  }
  o.finish();
}

void parse_train(Obj o, TrainConfig& t) {
  t.strategy = pick<Strategy>(o.at("strategy"), o.get<std::string>("strategy", "gradient_descent"),
                    {{"gradient_descent", Strategy::gradient_descent}, {"sweeping", Strategy::sweeping}});
  {
    Obj opt = o.child("optimizer");
    const auto type = opt.get<std::string>("type", "adam");
    if (type == "adam") {
      AdamConfig a;
      a.lr = opt.get<double>("lr", a.lr);
      a.beta1 = opt.get<double>("beta1", a.beta1);
      a.beta2 = opt.get<double>("beta2", a.beta2);
      a.eps = opt.get<double>("eps", a.eps);
      t.optimizer = a;
    } else if (type == "sgd") {
      t.optimizer = SgdConfig{opt.get<double>("lr", SgdConfig{}.lr)};
    } else {
      throw ConfigError(opt.at("type") + ": unknown optimizer '" + type + "'");
    }
    opt.finish();
  }
  t.epochs = o.get<std::size_t>("epochs", t.epochs);
  t.batch_size = o.get<std::size_t>("batch_size", t.batch_size);
  t.normalize_after_update = o.get<bool>("normalize_after_update", false);
  t.canonical_center = o.opt<std::size_t>("canonical_center");
  t.max_bond = o.opt<std::size_t>("max_bond");
  t.svd_cutoff = o.get<double>("svd_cutoff", 0.0);
  if (o.has("early_stopping")) {
    Obj e = o.child("early_stopping");
    EarlyStopping es;
    es.patience = e.get<std::size_t>("patience", es.patience);
    es.min_delta = e.get<double>("min_delta", es.min_delta);
    es.monitor = pick<Monitor>(e.at("monitor"), e.get<std::string>("monitor", "validation"),
                      {{"train", Monitor::train}, {"validation", Monitor::validation}});
    e.finish();
    t.early_stopping = es;
  } else {
    o.mark("early_stopping");
    t.early_stopping.reset();
  }
  t.grad_clip = o.opt<double>("grad_clip");
  t.threads = o.get<std::size_t>("threads", 1);
  t.deterministic = o.get<bool>("deterministic", true);
  o.finish();
}

void parse_eval(Obj o, EvalConfig& e) {
  e.fpr_targets = o.get<std::vector<double>>("fpr_targets", e.fpr_targets);
  e.tpr_targets = o.get<std::vector<double>>("tpr_targets", e.tpr_targets);
  e.positive_means_high = o.get<bool>("positive_means_high", e.positive_means_high);
  for (double f : e.fpr_targets)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError(o.at("fpr_targets") + ": targets must lie in (0, 1)");
  for (double t : e.tpr_targets)
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError(o.at("tpr_targets") + ": targets must lie in (0, 1]");
  o.finish();
}

const char* flatten_name(FlattenOrder f) { return f == FlattenOrder::snake ? "snake" : "row_major"; }

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string_view to_string(Task t) { return t == Task::classify ? "classify" : "anomaly"; }

PipelineConfig parse_config(const json& j) {
  PipelineConfig cfg;
  Obj o(j, "config");
  cfg.name = o.get<std::string>("name", cfg.name);
  cfg.task = pick<Task>(o.at("task"), o.need<std::string>("task"), {{"classify", Task::classify}, {"anomaly", Task::anomaly}});
  cfg.seed = o.get<std::uint64_t>("seed", 0);
  cfg.output_dir = o.get<std::string>("output_dir", "runs/" + cfg.name);
  parse_data(o.child("data"), cfg.data);
  {
    if (!o.has("embedding")) throw ConfigError("config.embedding: required");
    const json& e = o.raw("embedding");
    cfg.embedding.clear();
    if (e.is_array()) {
      for (std::size_t i = 0; i < e.size(); ++i)
        cfg.embedding.push_back(parse_map(e[i], "config.embedding[" + std::to_string(i) + "]"));
      if (cfg.embedding.empty()) throw ConfigError("config.embedding: empty list");
    } else {
      cfg.embedding.push_back(parse_map(e, "config.embedding"));
    }
  }
  parse_model(o.child("model"), cfg.model);
  cfg.init = parse_init(o.child("init"));
  if (!o.has("loss")) throw ConfigError("config.loss: required");
  parse_loss(o.child("loss"), cfg.loss);
  parse_train(o.child("train"), cfg.train);
  parse_eval(o.child("eval"), cfg.eval);
  o.finish();

  if (cfg.task == Task::classify) {
    if (!cfg.model.output_dim || *cfg.model.output_dim < 2)
      throw ConfigError("config.model.output_dim: classify needs an output dimension >= 2");
    if (cfg.data.format == "csv" && !cfg.data.label_column)
      throw ConfigError("config.data.label_column: classify needs a label column");
  } else {
    if (!cfg.data.normal_class) throw ConfigError("config.data.normal_class: anomaly needs a normal class");
    if (cfg.model.kind == NetworkKind::mps)
      throw ConfigError("config.model.kind: anomaly detection needs an mpo or smpo model");
    if (cfg.model.kind == NetworkKind::smpo && !cfg.model.spacing)
      throw ConfigError("config.model.spacing: an smpo needs a spacing");
  }
  if (cfg.data.format == "csv" && cfg.data.path.empty()) throw ConfigError("config.data.path: required for csv");
  if (cfg.data.format == "idx" && (cfg.data.train_images.empty() || cfg.data.train_labels.empty()))
    throw ConfigError("config.data: idx needs train_images and train_labels");
  if (cfg.data.train_size == 0) throw ConfigError("config.data.train_size: must be positive");
  if (cfg.model.max_bond == 0) throw ConfigError("config.model.max_bond: must be positive");
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const PipelineConfig& c) {
  json data{{"format", c.data.format},
            {"root", c.data.root.string()},
            {"train_size", c.data.train_size},
            {"validation_size", c.data.validation_size},
            {"test_size", opt_json(c.data.test_size)},
            {"minmax", c.data.minmax},
            {"split_seed", opt_json(c.data.split_seed)},
            {"flatten", flatten_name(c.data.flatten)}};
  if (c.data.format == "csv") {
    data["path"] = c.data.path;
    data["label_column"] = opt_json(c.data.label_column);
    data["drop_columns"] = c.data.drop_columns;
  } else {
    data["train_images"] = c.data.train_images;
    data["train_labels"] = c.data.train_labels;
    data["test_images"] = c.data.test_images;
    data["test_labels"] = c.data.test_labels;
    data["normal_class"] = opt_json(c.data.normal_class);
    data["downsample"] = c.data.downsample
                             ? json::array({c.data.downsample->first, c.data.downsample->second})
                             : json(nullptr);
  }

  json embedding = json::array();
  for (const auto& m : c.embedding) embedding.push_back(map_to_json(m));

  json model{{"kind", std::string(to_string(c.model.kind))},
             {"max_bond", c.model.max_bond},
             {"lower_dim", c.model.lower_dim},
             {"output_dim", opt_json(c.model.output_dim)},
             {"output_site", opt_json(c.model.output_site)},
             {"spacing", nullptr}};
  if (c.model.spacing) {
    model["spacing"] = c.model.spacing->is_uniform() ? json(c.model.spacing->stride())
                                                     : json(c.model.spacing->positions());
  }

  json regs = json::array();
  for (const auto& r : c.loss.regularizers) {
    regs.push_back({{"kind", r.kind == RegularizerKind::log_norm ? "log_norm" : "relu_log_norm"}, {"weight", r.weight}});
  }
  json loss{{"primary", std::string(to_string(c.loss.primary))},
            {"logquad_variant", c.loss.logquad_variant == LogQuadVariant::shifted ? "shifted" : "centered"},
            {"reduction", c.loss.reduction == Reduction::mean ? "mean" : "sum"},
            {"regularizers", regs}};

  json opt;
  if (const auto* a = std::get_if<AdamConfig>(&c.train.optimizer)) {
    opt = {{"type", "adam"}, {"lr", a->lr}, {"beta1", a->beta1}, {"beta2", a->beta2}, {"eps", a->eps}};
  } else {
    opt = {{"type", "sgd"}, {"lr", std::get<SgdConfig>(c.train.optimizer).lr}};
  }
  json train{{"strategy", c.train.strategy == Strategy::sweeping ? "sweeping" : "gradient_descent"},
             {"optimizer", opt},
             {"epochs", c.train.epochs},
             {"batch_size", c.train.batch_size},
             {"normalize_after_update", c.train.normalize_after_update},
             {"canonical_center", opt_json(c.train.canonical_center)},
             {"max_bond", opt_json(c.train.max_bond)},
             {"svd_cutoff", c.train.svd_cutoff},
             {"grad_clip", opt_json(c.train.grad_clip)},
             {"threads", c.train.threads},
             {"deterministic", c.train.deterministic},
             {"early_stopping", nullptr}};
  if (c.train.early_stopping) {
    const auto& e = *c.train.early_stopping;
    train["early_stopping"] = {{"patience", e.patience},
                               {"min_delta", e.min_delta},
                               {"monitor", e.monitor == Monitor::train ? "train" : "validation"}};
  }

  return {{"name", c.name},
          {"task", std::string(to_string(c.task))},
          {"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"data", data},
          {"embedding", embedding},
          {"model", model},
          {"init", init_to_json(c.init)},
          {"loss", loss},
          {"train", train},
          {"eval",
           {{"fpr_targets", c.eval.fpr_targets},
            {"tpr_targets", c.eval.tpr_targets},
            {"positive_means_high", c.eval.positive_means_high}}}};
}

void validate(const PipelineConfig& cfg, std::size_t n_features) {
  if (cfg.embedding.size() != 1 && cfg.embedding.size() != n_features) {
    throw ConfigError("config.embedding: " + std::to_string(cfg.embedding.size()) + " maps for " +
                      std::to_string(n_features) + " features");
  }
  if (cfg.model.output_site && *cfg.model.output_site >= n_features) {
    throw ConfigError("config.model.output_site: outside the " + std::to_string(n_features) + "-site chain");
  }
  if (cfg.model.spacing) cfg.model.spacing->resolve(n_features);
}

}  // namespace tn4ml
