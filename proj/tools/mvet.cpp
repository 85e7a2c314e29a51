#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvet/dataset.hpp"
#include "mvet/eval.hpp"
#include "mvet/experiments.hpp"
#include "mvet/generator.hpp"
#include "mvet/model.hpp"
#include "mvet/runconfig.hpp"
#include "mvet/trainer.hpp"
#include "mvet/views.hpp"

namespace fs = std::filesystem;
using namespace mvet;

namespace {

RunConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
  RunConfig rc;
  if (!path.empty()) {
    try {
      rc = RunConfig::from_file(path);
    } catch (const ParseError& e) {
      throw ConfigInvalid("config file " + path + ": " + e.what());
    }
  }
  for (const auto& kv : sets) rc.set_kv(kv);
  return rc;
}

void default_key(RunConfig& rc, const std::string& key, const std::string& value) {
  if (!rc.has(key)) rc.set(key, value);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << content;
}

void write_echo(const RunConfig& rc, const fs::path& out_dir) {
  write_file(out_dir / "config.echo", rc.echo());
}

double parse_double_value(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigInvalid("key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_colon(const std::string& item) {
  std::vector<std::string> parts;
  std::size_t from = 0;
  while (true) {
    const auto at = item.find(':', from);
    if (at == std::string::npos) {
      parts.push_back(item.substr(from));
      return parts;
    }
    parts.push_back(item.substr(from, at - from));
    from = at + 1;
  }
}

std::vector<LanguageProfile> parse_language_profiles(const std::vector<std::string>& items) {
  std::vector<LanguageProfile> out;
  for (const auto& item : items) {
    const auto parts = split_colon(item);
    if (parts.size() != 3 || parts[0].empty()) {
      throw ConfigInvalid("key 'languages' expects name:availability:noise, got '" + item + "'");
    }
    out.push_back({parts[0], parse_double_value("languages", parts[1]),
                   parse_double_value("languages", parts[2])});
  }
  return out;
}

std::vector<ReprProfile> parse_repr_profiles(const std::vector<std::string>& items) {
  std::vector<ReprProfile> out;
  for (const auto& item : items) {
    const auto parts = split_colon(item);
    if (parts.size() != 2) {
      throw ConfigInvalid("key 'representations' expects repr:dim, got '" + item + "'");
    }
    const auto repr = representation_from(parts[0]);
    if (!repr) throw ConfigInvalid("unknown representation '" + parts[0] + "'");
    out.push_back({*repr, static_cast<std::size_t>(parse_double_value("representations", parts[1]))});
  }
  return out;
}

std::string serialize_languages(const std::vector<LanguageProfile>& langs) {
  std::string s;
  for (const auto& l : langs) {
    if (!s.empty()) s += ',';
    s += l.name + ":" + format_g9(l.availability) + ":" + format_g9(l.noise);
  }
  return s;
}

std::string serialize_reprs(const std::vector<ReprProfile>& reprs) {
  std::string s;
  for (const auto& r : reprs) {
    if (!s.empty()) s += ',';
    s += std::string(to_string(r.repr)) + ":" + std::to_string(r.dim);
  }
  return s;
}

SplitSpec split_from(const RunConfig& rc) {
  SplitSpec spec;
  spec.train = rc.get_double("train_frac", spec.train);
  spec.dev = rc.get_double("dev_frac", spec.dev);
  spec.test = rc.get_double("test_frac", spec.test);
  return spec;
}

TrainConfig train_config_from(const RunConfig& rc) {
  TrainConfig tc;
  tc.lr = rc.get_double("lr", tc.lr);
  tc.beta1 = rc.get_double("beta1", tc.beta1);
  tc.beta2 = rc.get_double("beta2", tc.beta2);
  tc.eps = rc.get_double("eps", tc.eps);
  tc.batch_size = rc.get_u64("batch", tc.batch_size);
  tc.max_epochs = rc.get_u64("max_epochs", tc.max_epochs);
  tc.patience = rc.get_u64("patience", tc.patience);
  tc.seed = rc.get_u64("seed", tc.seed);
  tc.deterministic = rc.get_bool("deterministic", tc.deterministic);
  tc.threshold = rc.get_double("threshold", tc.threshold);
  tc.top1_fallback = rc.get_bool("top1_fallback", tc.top1_fallback);
  return tc;
}

void echo_train_keys(RunConfig& rc, const TrainConfig& tc, const SplitSpec& split) {
  default_key(rc, "lr", format_g9(tc.lr));
  default_key(rc, "beta1", format_g9(tc.beta1));
  default_key(rc, "beta2", format_g9(tc.beta2));
  default_key(rc, "eps", format_g9(tc.eps));
  default_key(rc, "batch", std::to_string(tc.batch_size));
  default_key(rc, "max_epochs", std::to_string(tc.max_epochs));
  default_key(rc, "patience", std::to_string(tc.patience));
  default_key(rc, "seed", std::to_string(tc.seed));
  default_key(rc, "deterministic", tc.deterministic ? "1" : "0");
  default_key(rc, "threshold", format_g9(tc.threshold));
  default_key(rc, "top1_fallback", tc.top1_fallback ? "1" : "0");
  default_key(rc, "train_frac", format_g9(split.train));
  default_key(rc, "dev_frac", format_g9(split.dev));
  default_key(rc, "test_frac", format_g9(split.test));
}

// ------------------------------------------------------------------ gen ---

void cmd_gen(RunConfig rc, const fs::path& out_dir) {
  rc.require_known({"profile", "seed", "entities", "types", "latent_dim", "max_types",
                    "min_per_type", "ambiguity", "zipf", "freq_max", "languages",
                    "representations"});

  const std::string profile = rc.get_string("profile", "default");
  GenConfig cfg;
  if (profile == "default") cfg = GenConfig::default_profile();
  else if (profile == "sparse") cfg = GenConfig::sparse_profile();
  else if (profile == "low-resource") cfg = GenConfig::low_resource_profile();
  else throw ConfigInvalid("unknown profile '" + profile + "'");

  cfg.seed = rc.get_u64("seed", cfg.seed);
  cfg.n_entities = rc.get_u64("entities", cfg.n_entities);
  cfg.n_types = rc.get_u64("types", cfg.n_types);
  cfg.latent_dim = rc.get_u64("latent_dim", cfg.latent_dim);
  cfg.max_types_per_entity = rc.get_u64("max_types", cfg.max_types_per_entity);
  cfg.min_per_type = rc.get_u64("min_per_type", cfg.min_per_type);
  cfg.ambiguity = rc.get_double("ambiguity", cfg.ambiguity);
  cfg.zipf_exponent = rc.get_double("zipf", cfg.zipf_exponent);
  cfg.freq_max = rc.get_u64("freq_max", cfg.freq_max);
  if (rc.has("languages")) cfg.languages = parse_language_profiles(rc.get_list("languages"));
  if (rc.has("representations")) {
    cfg.representations = parse_repr_profiles(rc.get_list("representations"));
  }

  const Dataset ds = generate(cfg);
  fs::create_directories(out_dir);
  write_dataset(ds, out_dir / "dataset.mvet");

  default_key(rc, "profile", profile);
  default_key(rc, "seed", std::to_string(cfg.seed));
  default_key(rc, "entities", std::to_string(cfg.n_entities));
  default_key(rc, "types", std::to_string(cfg.n_types));
  default_key(rc, "latent_dim", std::to_string(cfg.latent_dim));
  default_key(rc, "max_types", std::to_string(cfg.max_types_per_entity));
  default_key(rc, "min_per_type", std::to_string(cfg.min_per_type));
  default_key(rc, "ambiguity", format_g9(cfg.ambiguity));
  default_key(rc, "zipf", format_g9(cfg.zipf_exponent));
  default_key(rc, "freq_max", std::to_string(cfg.freq_max));
  default_key(rc, "languages", serialize_languages(cfg.languages));
  default_key(rc, "representations", serialize_reprs(cfg.representations));
  write_echo(rc, out_dir);

  std::cout << "wrote " << (out_dir / "dataset.mvet").string() << " (" << ds.entities.size()
            << " entities, " << ds.views.size() << " views, " << ds.types.size() << " types)\n";
}

// ---------------------------------------------------------- build-views ---

void cmd_build_views(RunConfig rc, const fs::path& out_dir) {
  const auto languages = rc.get_list("languages");
  if (languages.empty()) throw ConfigInvalid("key 'languages' is required");
  std::vector<std::string> allowed = {"entities",  "types",          "languages",
                                      "representations", "keywords", "oov",
                                      "name_sum",  "seed",           "sgns_window",
                                      "sgns_negatives", "sgns_lr",   "sgns_epochs",
                                      "sgns_subsample"};
  for (const auto& lang : languages) {
    for (const char* kind : {"corpus_", "titles_", "descs_", "vectors_"}) {
      allowed.push_back(kind + lang);
    }
  }
  rc.require_known(allowed);

  const std::string entities_path = rc.get_string("entities", "");
  if (entities_path.empty()) throw ConfigInvalid("key 'entities' is required");
  const auto reprs = parse_repr_profiles(rc.get_list("representations"));
  if (reprs.empty()) throw ConfigInvalid("key 'representations' is required");

  // Skeleton: ids and gold types; views filled by assemble_views.
  const auto id_types = read_tsv(entities_path);
  std::vector<std::string> type_names;
  const std::string types_path = rc.get_string("types", "");
  if (!types_path.empty()) {
    std::ifstream in(types_path);
    if (!in) throw Error("cannot open types file: " + types_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') type_names.push_back(line);
    }
  } else {
    for (const auto& [id, spec] : id_types) {
      std::istringstream list(spec);
      std::string t;
      while (std::getline(list, t, ',')) {
        if (!t.empty() && std::find(type_names.begin(), type_names.end(), t) == type_names.end()) {
          type_names.push_back(t);
        }
      }
    }
  }

  Dataset skeleton;
  skeleton.types = TypeVocab(type_names);
  for (const auto& lang : languages) {
    for (const auto& r : reprs) skeleton.views.push_back({lang, r.repr, r.dim});
  }
  for (const auto& [id, spec] : id_types) {
    EntityRecord e;
    e.id = id;
    e.types = Bitset(skeleton.types.size());
    std::istringstream list(spec);
    std::string t;
    while (std::getline(list, t, ',')) {
      if (t.empty()) continue;
      const auto idx = skeleton.types.index(t);
      if (!idx) throw UnknownType("entity '" + id + "' references unknown type '" + t + "'");
      e.types.set(*idx);
    }
    skeleton.entities.push_back(std::move(e));
  }

  std::map<std::string, LanguageSources> sources;
  for (const auto& lang : languages) {
    LanguageSources src;
    const std::string corpus = rc.get_string("corpus_" + lang, "");
    const std::string titles = rc.get_string("titles_" + lang, "");
    const std::string descs = rc.get_string("descs_" + lang, "");
    const std::string vectors = rc.get_string("vectors_" + lang, "");
    if (!corpus.empty()) src.corpus = read_corpus(fs::path(corpus));
    if (!titles.empty()) src.titles = read_tsv(fs::path(titles));
    if (!descs.empty()) {
      for (const auto& [id, text] : read_tsv(fs::path(descs))) {
        src.descriptions.emplace(id, tokenize(text));
      }
    }
    if (!vectors.empty()) src.word_vectors = load_embeddings(fs::path(vectors));
    sources.emplace(lang, std::move(src));
  }

  AssembleOptions opts;
  opts.sgns.window = rc.get_u64("sgns_window", opts.sgns.window);
  opts.sgns.negatives = rc.get_u64("sgns_negatives", opts.sgns.negatives);
  opts.sgns.lr = rc.get_double("sgns_lr", opts.sgns.lr);
  opts.sgns.epochs = rc.get_u64("sgns_epochs", opts.sgns.epochs);
  opts.sgns.subsample = rc.get_double("sgns_subsample", opts.sgns.subsample);
  opts.sgns.seed = rc.get_u64("seed", opts.sgns.seed);
  opts.keywords = rc.get_u64("keywords", opts.keywords);
  opts.name_sum = rc.get_bool("name_sum", opts.name_sum);
  const std::string oov = rc.get_string("oov", "hash");
  if (oov == "hash") opts.oov = OovRule::HashedUnit;
  else if (oov == "zero") opts.oov = OovRule::Zero;
  else throw ConfigInvalid("key 'oov' expects hash or zero, got '" + oov + "'");

  const Dataset ds = assemble_views(std::move(skeleton), sources, opts);
  fs::create_directories(out_dir);
  write_dataset(ds, out_dir / "dataset.mvet");

  default_key(rc, "keywords", std::to_string(opts.keywords));
  default_key(rc, "oov", oov);
  default_key(rc, "name_sum", opts.name_sum ? "1" : "0");
  default_key(rc, "seed", std::to_string(opts.sgns.seed));
  default_key(rc, "sgns_window", std::to_string(opts.sgns.window));
  default_key(rc, "sgns_negatives", std::to_string(opts.sgns.negatives));
  default_key(rc, "sgns_lr", format_g9(opts.sgns.lr));
  default_key(rc, "sgns_epochs", std::to_string(opts.sgns.epochs));
  default_key(rc, "sgns_subsample", format_g9(opts.sgns.subsample));
  write_echo(rc, out_dir);

  std::size_t available = 0, total = 0;
  for (const auto& e : ds.entities) {
    for (auto m : e.mask) {
      ++total;
      available += m ? 1 : 0;
    }
  }
  std::cout << "wrote " << (out_dir / "dataset.mvet").string() << " (" << ds.entities.size()
            << " entities, " << ds.views.size() << " views, availability "
            << format_g9(total ? static_cast<double>(available) / total : 0.0) << ")\n";
}

// ---------------------------------------------------------------- train ---

std::vector<ViewId> resolve_views(const Dataset& ds, const RunConfig& rc) {
  const std::string spec = rc.get_string("views", "all");
  std::vector<ViewId> use;
  if (spec == "all") {
    for (ViewId j = 0; j < ds.views.size(); ++j) use.push_back(j);
    return use;
  }
  for (const auto& label : rc.get_list("views")) {
    const auto id = ds.view_id(label);
    if (!id) throw ViewUnknown("view '" + label + "' is not declared in the dataset");
    use.push_back(*id);
  }
  return use;
}

void cmd_train(RunConfig rc, const fs::path& out_dir) {
  rc.require_known({"dataset", "regime", "views", "fusion", "d", "h", "slope", "bias", "lr",
                    "beta1", "beta2", "eps", "batch", "max_epochs", "patience", "threshold",
                    "top1_fallback", "deterministic", "seed", "train_frac", "dev_frac",
                    "test_frac"});
  const std::string dataset_path = rc.get_string("dataset", "");
  if (dataset_path.empty()) throw ConfigInvalid("key 'dataset' is required");
  const Dataset ds = read_dataset(fs::path(dataset_path));

  const SplitSpec split_spec = split_from(rc);
  const TrainConfig tc = train_config_from(rc);
  const Split split = stratified_split(ds, split_spec, derive_seed(tc.seed, "split"));

  ModelConfig mc;
  mc.fusion = fusion_mode_from(rc.get_string("fusion", "att"));
  mc.shared_dim = rc.get_u64("d", mc.shared_dim);
  mc.hidden_dim = rc.get_u64("h", mc.hidden_dim);
  mc.slope = rc.get_double("slope", mc.slope);
  mc.bias = rc.get_bool("bias", mc.bias);

  const std::string regime = rc.get_string("regime", "multiview");
  TrainResult result;
  if (regime == "multiview") {
    result = train_multiview(ds, split, resolve_views(ds, rc), mc, tc);
  } else if (regime == "cross") {
    if (rc.get_string("views", "all") != "all") {
      throw ConfigInvalid("regime=cross trains every view; drop the 'views' key");
    }
    result = train_cross(ds, split, mc, tc);
  } else {
    throw ConfigInvalid("key 'regime' expects multiview or cross, got '" + regime + "'");
  }

  fs::create_directories(out_dir);
  save_checkpoint(out_dir / "checkpoint.mvet", result.config, result.params);
  write_history_csv(result.history, out_dir / "history.csv");

  default_key(rc, "regime", regime);
  default_key(rc, "views", rc.get_string("views", "all"));
  default_key(rc, "fusion", to_string(result.config.fusion));
  default_key(rc, "d", std::to_string(result.config.shared_dim));
  default_key(rc, "h", std::to_string(result.config.hidden_dim));
  default_key(rc, "slope", format_g9(result.config.slope));
  default_key(rc, "bias", result.config.bias ? "1" : "0");
  echo_train_keys(rc, tc, split_spec);
  write_echo(rc, out_dir);

  std::cout << "best dev F1 " << format_g9(result.best_dev_f1) << " at epoch "
            << result.best_epoch << " (" << result.history.size() << " epochs)\n";
}

// ----------------------------------------------------------------- eval ---

void cmd_eval(RunConfig rc, const fs::path& out_dir) {
  rc.require_known({"checkpoint", "dataset", "label", "threshold", "top1_fallback", "split",
                    "seed", "train_frac", "dev_frac", "test_frac"});
  const std::string ckpt_path = rc.get_string("checkpoint", "");
  const std::string dataset_path = rc.get_string("dataset", "");
  if (ckpt_path.empty()) throw ConfigInvalid("key 'checkpoint' is required");
  if (dataset_path.empty()) throw ConfigInvalid("key 'dataset' is required");

  auto [cfg, params] = load_checkpoint(ckpt_path);
  const Dataset ds = read_dataset(fs::path(dataset_path));

  std::vector<ViewId> use;
  for (const auto& view : cfg.views) {
    const auto id = ds.view_id(view.label());
    if (!id) throw SpecMismatch("dataset lacks view '" + view.label() + "'");
    use.push_back(*id);
  }

  const double threshold = rc.get_double("threshold", 0.5);
  const bool fallback = rc.get_bool("top1_fallback", true);
  const std::string subset = rc.get_string("split", "none");
  std::vector<std::size_t> indices;
  if (subset == "none") {
    indices.resize(ds.entities.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  } else {
    const std::uint64_t seed = rc.get_u64("seed", 1);
    const Split split = stratified_split(ds, split_from(rc), derive_seed(seed, "split"));
    if (subset == "train") indices = split.train;
    else if (subset == "dev") indices = split.dev;
    else if (subset == "test") indices = split.test;
    else throw ConfigInvalid("key 'split' expects none, train, dev or test");
  }

  const std::string label = rc.get_string("label", fs::path(ckpt_path).stem().string());
  EvalReport report;
  report.rows.push_back(bucketed_eval(label, ds, indices,
                                      make_predictor(cfg, params, ds, use, threshold, fallback)));

  fs::create_directories(out_dir);
  const fs::path ledger = out_dir / "eval.csv";
  const std::string csv = render_csv(report);
  if (fs::exists(ledger) && fs::file_size(ledger) > 0) {
    // Append just the data row to the run ledger.
    std::ofstream out(ledger, std::ios::app);
    out << csv.substr(csv.find('\n') + 1);
  } else {
    write_file(ledger, csv);
  }

  default_key(rc, "label", label);
  default_key(rc, "threshold", format_g9(threshold));
  default_key(rc, "top1_fallback", fallback ? "1" : "0");
  default_key(rc, "split", subset);
  write_echo(rc, out_dir);

  std::cout << render_text(report);
}

// ---------------------------------------------------------------- table ---

TableConfig table_config_from(const RunConfig& rc) {
  TableConfig cfg;
  cfg.seeds = rc.get_u64("seeds", cfg.seeds);
  cfg.master_seed = rc.get_u64("seed", cfg.master_seed);
  cfg.split = split_from(rc);
  cfg.shared_dim = rc.get_u64("d", cfg.shared_dim);
  cfg.hidden_dim = rc.get_u64("h", cfg.hidden_dim);
  cfg.slope = rc.get_double("slope", cfg.slope);
  cfg.bias = rc.get_bool("bias", cfg.bias);
  TrainConfig tc = cfg.train;  // table defaults, then explicit keys
  tc.lr = rc.get_double("lr", tc.lr);
  tc.beta1 = rc.get_double("beta1", tc.beta1);
  tc.beta2 = rc.get_double("beta2", tc.beta2);
  tc.eps = rc.get_double("eps", tc.eps);
  tc.batch_size = rc.get_u64("batch", tc.batch_size);
  tc.max_epochs = rc.get_u64("max_epochs", tc.max_epochs);
  tc.patience = rc.get_u64("patience", tc.patience);
  tc.deterministic = rc.get_bool("deterministic", tc.deterministic);
  tc.threshold = rc.get_double("threshold", tc.threshold);
  tc.top1_fallback = rc.get_bool("top1_fallback", tc.top1_fallback);
  cfg.train = tc;
  return cfg;
}

void echo_table_keys(RunConfig& rc, const TableConfig& cfg) {
  default_key(rc, "seeds", std::to_string(cfg.seeds));
  default_key(rc, "seed", std::to_string(cfg.master_seed));
  default_key(rc, "d", std::to_string(cfg.shared_dim));
  default_key(rc, "h", std::to_string(cfg.hidden_dim));
  default_key(rc, "slope", format_g9(cfg.slope));
  default_key(rc, "bias", cfg.bias ? "1" : "0");
  TrainConfig tc = cfg.train;
  tc.seed = cfg.master_seed;
  echo_train_keys(rc, tc, cfg.split);
}

const std::vector<std::string> kTableKeys = {
    "dataset", "seeds", "seed", "d", "h", "slope", "bias", "lr", "beta1", "beta2", "eps",
    "batch", "max_epochs", "patience", "threshold", "top1_fallback", "deterministic",
    "train_frac", "dev_frac", "test_frac"};

void cmd_table1(RunConfig rc, const fs::path& out_dir) {
  rc.require_known(kTableKeys);
  const std::string dataset_path = rc.get_string("dataset", "");
  if (dataset_path.empty()) throw ConfigInvalid("key 'dataset' is required");
  const Dataset ds = read_dataset(fs::path(dataset_path));
  const TableConfig cfg = table_config_from(rc);

  const Table1Result result = run_table1(ds, cfg);
  fs::create_directories(out_dir);
  write_file(out_dir / "table1.txt", render_text(result.report));
  write_file(out_dir / "table1.csv", render_csv(result.report));
  echo_table_keys(rc, cfg);
  write_echo(rc, out_dir);
  std::cout << render_text(result.report);
}

void cmd_table2(RunConfig rc, const fs::path& out_dir) {
  rc.require_known(kTableKeys);
  const std::string dataset_path = rc.get_string("dataset", "");
  if (dataset_path.empty()) throw ConfigInvalid("key 'dataset' is required");
  const Dataset ds = read_dataset(fs::path(dataset_path));
  const TableConfig cfg = table_config_from(rc);

  const Table2Result result = run_table2(ds, cfg);
  fs::create_directories(out_dir);
  write_file(out_dir / "table2.txt", render_text(result));
  write_file(out_dir / "table2.csv", render_csv(result));
  echo_table_keys(rc, cfg);
  write_echo(rc, out_dir);
  std::cout << render_text(result);
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "flat key=value config file (# comments)");
  cmd->add_option("--set", c.sets, "override KEY=VALUE (repeatable)")->type_name("KEY=VALUE");
  cmd->add_option("--out", c.out, "output directory")->required();
}

// Convenience flags are sugar for --set key=value and take precedence.
void push_if(std::vector<std::string>& sets, const std::string& key, const std::string& value) {
  if (!value.empty()) sets.push_back(key + "=" + value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiview entity typing engine"};
  app.require_subcommand(1);

  Common c_gen, c_build, c_train, c_eval, c_t1, c_t2;
  std::string gen_seed, gen_entities, gen_profile;
  std::string train_dataset, train_views, train_fusion, train_seed;
  std::string eval_checkpoint, eval_dataset, eval_label;
  std::string t1_dataset, t1_seeds, t1_seed;
  std::string t2_dataset, t2_seeds, t2_seed;
  std::string build_entities;

  auto* gen = app.add_subcommand("gen", "generate a synthetic multiview dataset");
  add_common(gen, c_gen);
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--entities", gen_entities, "entity count");
  gen->add_option("--profile", gen_profile, "default | sparse | low-resource");

  auto* build = app.add_subcommand("build-views", "assemble views from text sources");
  add_common(build, c_build);
  build->add_option("--entities", build_entities, "TSV of <id>\\t<type1,type2,...>");

  auto* train = app.add_subcommand("train", "train one model");
  add_common(train, c_train);
  train->add_option("--dataset", train_dataset, "dataset file");
  train->add_option("--views", train_views, "'all' or comma-separated view labels");
  train->add_option("--fusion", train_fusion, "con | att | max | avg");
  train->add_option("--seed", train_seed, "run seed");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, c_eval);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file");
  eval->add_option("--dataset", eval_dataset, "dataset file");
  eval->add_option("--label", eval_label, "row label in the ledger");

  auto* table1 = app.add_subcommand("table1", "singleview vs fusion matrix");
  add_common(table1, c_t1);
  table1->add_option("--dataset", t1_dataset, "dataset file");
  table1->add_option("--seeds", t1_seeds, "runs per row");
  table1->add_option("--seed", t1_seed, "master seed");

  auto* table2 = app.add_subcommand("table2", "SINGLE vs CROSS grid");
  add_common(table2, c_t2);
  table2->add_option("--dataset", t2_dataset, "dataset file");
  table2->add_option("--seeds", t2_seeds, "runs per cell");
  table2->add_option("--seed", t2_seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      push_if(c_gen.sets, "seed", gen_seed);
      push_if(c_gen.sets, "entities", gen_entities);
      push_if(c_gen.sets, "profile", gen_profile);
      cmd_gen(load_config(c_gen.config, c_gen.sets), c_gen.out);
    } else if (build->parsed()) {
      push_if(c_build.sets, "entities", build_entities);
      cmd_build_views(load_config(c_build.config, c_build.sets), c_build.out);
    } else if (train->parsed()) {
      push_if(c_train.sets, "dataset", train_dataset);
      push_if(c_train.sets, "views", train_views);
      push_if(c_train.sets, "fusion", train_fusion);
      push_if(c_train.sets, "seed", train_seed);
      cmd_train(load_config(c_train.config, c_train.sets), c_train.out);
    } else if (eval->parsed()) {
      push_if(c_eval.sets, "checkpoint", eval_checkpoint);
      push_if(c_eval.sets, "dataset", eval_dataset);
      push_if(c_eval.sets, "label", eval_label);
      cmd_eval(load_config(c_eval.config, c_eval.sets), c_eval.out);
    } else if (table1->parsed()) {
      push_if(c_t1.sets, "dataset", t1_dataset);
      push_if(c_t1.sets, "seeds", t1_seeds);
      push_if(c_t1.sets, "seed", t1_seed);
      cmd_table1(load_config(c_t1.config, c_t1.sets), c_t1.out);
    } else if (table2->parsed()) {
      push_if(c_t2.sets, "dataset", t2_dataset);
      push_if(c_t2.sets, "seeds", t2_seeds);
      push_if(c_t2.sets, "seed", t2_seed);
      cmd_table2(load_config(c_t2.config, c_t2.sets), c_t2.out);
    }
    return 0;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ViewUnknown& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SpecMismatch& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
