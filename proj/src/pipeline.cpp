#include "dha/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "dha/errors.hpp"
#include "dha/io_util.hpp"
#include "dha/metrics.hpp"
#include "dha/narrative.hpp"
#include "dha/parallel.hpp"
#include "dha/shift.hpp"
#include "dha/tokenizer.hpp"

#include "json.hpp"

namespace dha {

namespace {

using nlohmann::json;

template <class T>
void read_field(const json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + name + "': " + e.what());
  }
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["paths"] = {{"data_dir", c.data_dir.string()},
                {"checkpoint_dir", c.checkpoint_dir.string()},
                {"report_dir", c.report_dir.string()}};
  j["generator"] = {{"seed", c.generator.seed},
                    {"n_pairs", c.generator.n_pairs},
                    {"class_probabilities", c.generator.class_probabilities},
                    {"distraction_base_rate", c.generator.distraction_base_rate},
                    {"teen_base_rate", c.generator.teen_base_rate},
                    {"signal_sharpness", c.generator.signal_sharpness}};
  j["split_seed"] = c.split_seed;
  j["tokenizer"] = {{"max_size", c.vocab_max_size}};
  j["model"] = {{"d", c.model.d},
                {"layers", c.model.layers},
                {"n_heads", c.model.n_heads},
                {"ffn_mult", c.model.ffn_mult},
                {"max_seq_len", c.model.max_seq_len},
                {"rms_epsilon", c.model.rms_epsilon},
                {"init_std", c.model.init_std},
                {"pos_scale", c.model.pos_scale},
                {"init_seed", c.model.init_seed}};
  j["lora"] = {{"rank", c.lora.rank}, {"alpha", c.lora.alpha}};
  j["train"] = {{"seed", c.train.seed},
                {"batch_size", c.train.batch_size},
                {"steps", c.train.steps},
                {"epochs", c.train.epochs},
                {"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay},
                {"grad_clip_norm", c.train.grad_clip_norm},
                {"eval_every", c.train.eval_every},
                {"warmup_fraction", c.train.warmup_fraction}};
  j["baseline"] = {{"seed", c.baseline.seed},
                   {"epochs", c.baseline.epochs},
                   {"batch_size", c.baseline.batch_size},
                   {"learning_rate", c.baseline.learning_rate},
                   {"weight_decay", c.baseline.weight_decay}};
  j["scenarios"] = {{"single_driver_seed", c.scenario_single_seed},
                    {"teen_seed", c.scenario_teen_seed}};
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c = PipelineConfig::defaults();
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    std::string s;
    s = c.data_dir.string();
    read_field(p, "data_dir", s);
    c.data_dir = s;
    s = c.checkpoint_dir.string();
    read_field(p, "checkpoint_dir", s);
    c.checkpoint_dir = s;
    s = c.report_dir.string();
    read_field(p, "report_dir", s);
    c.report_dir = s;
  }
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    double sharp = c.generator.signal_sharpness;
    read_field(g, "signal_sharpness", sharp);
    if (sharp != c.generator.signal_sharpness) {
      // conditional tables are derived from the sharpness
      std::size_t n_pairs = c.generator.n_pairs;
      c.generator = GeneratorConfig::defaults(sharp);
      c.generator.n_pairs = n_pairs;
    }
    read_field(g, "seed", c.generator.seed);
    read_field(g, "n_pairs", c.generator.n_pairs);
    read_field(g, "distraction_base_rate", c.generator.distraction_base_rate);
    read_field(g, "teen_base_rate", c.generator.teen_base_rate);
    read_field(g, "class_probabilities", c.generator.class_probabilities);
  }
  read_field(j, "split_seed", c.split_seed);
  if (j.contains("tokenizer")) read_field(j.at("tokenizer"), "max_size", c.vocab_max_size);
  if (j.contains("model")) {
    const json& m = j.at("model");
    read_field(m, "d", c.model.d);
    read_field(m, "layers", c.model.layers);
    read_field(m, "n_heads", c.model.n_heads);
    read_field(m, "ffn_mult", c.model.ffn_mult);
    read_field(m, "max_seq_len", c.model.max_seq_len);
    read_field(m, "rms_epsilon", c.model.rms_epsilon);
    read_field(m, "init_std", c.model.init_std);
    read_field(m, "pos_scale", c.model.pos_scale);
    read_field(m, "init_seed", c.model.init_seed);
  }
  if (j.contains("lora")) {
    read_field(j.at("lora"), "rank", c.lora.rank);
    read_field(j.at("lora"), "alpha", c.lora.alpha);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    read_field(t, "seed", c.train.seed);
    read_field(t, "batch_size", c.train.batch_size);
    read_field(t, "steps", c.train.steps);
    read_field(t, "epochs", c.train.epochs);
    read_field(t, "learning_rate", c.train.learning_rate);
    read_field(t, "weight_decay", c.train.weight_decay);
    read_field(t, "grad_clip_norm", c.train.grad_clip_norm);
    read_field(t, "eval_every", c.train.eval_every);
    read_field(t, "warmup_fraction", c.train.warmup_fraction);
  }
  if (j.contains("baseline")) {
    const json& b = j.at("baseline");
    read_field(b, "seed", c.baseline.seed);
    read_field(b, "epochs", c.baseline.epochs);
    read_field(b, "batch_size", c.baseline.batch_size);
    read_field(b, "learning_rate", c.baseline.learning_rate);
    read_field(b, "weight_decay", c.baseline.weight_decay);
  }
  if (j.contains("scenarios")) {
    read_field(j.at("scenarios"), "single_driver_seed", c.scenario_single_seed);
    read_field(j.at("scenarios"), "teen_seed", c.scenario_teen_seed);
  }
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.generator = GeneratorConfig::defaults();
  c.generator.n_pairs = 5000;
  c.model.d = 128;
  c.model.layers = 4;
  c.model.n_heads = 4;
  c.lora.rank = 8;
  c.lora.alpha = 16.0;
  c.train.batch_size = 16;
  c.train.epochs = 2;
  c.train.learning_rate = 2e-3;
  c.train.eval_every = 100;
  return c;
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string PipelineConfig::canonical_json() const {
  return config_to_json(*this).dump(2) + "\n";
}

std::uint64_t PipelineConfig::config_hash() const { return fnv1a64(canonical_json()); }

namespace {

void require_artifact(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw MissingUpstream(p.string());
}

void refuse_overwrite(const std::vector<std::filesystem::path>& outputs, bool force) {
  if (force) return;
  for (const auto& p : outputs) {
    if (std::filesystem::exists(p)) throw WouldOverwrite(p.string());
  }
}

void update_manifest(const PipelineConfig& cfg,
                     const std::vector<std::filesystem::path>& artifacts) {
  std::filesystem::create_directories(cfg.report_dir);
  const std::filesystem::path manifest_path = cfg.report_dir / "run_manifest.json";
  json j;
  if (std::filesystem::exists(manifest_path)) {
    try {
      j = json::parse(read_file(manifest_path));
    } catch (...) {
      j = json::object();
    }
  }
  j["config_hash"] = hex64(cfg.config_hash());
  if (!j.contains("artifacts")) j["artifacts"] = json::object();
  for (const auto& p : artifacts) {
    j["artifacts"][p.string()] = hex64(hash_file(p));
  }
  atomic_write_file(manifest_path, j.dump(2) + "\n");
}

struct PromptRow {
  std::string crash_id;
  NarrativeLabel label = NarrativeLabel::NHA;
  std::string system, user, assistant;
};

std::vector<PromptRow> load_prompts(const std::filesystem::path& path) {
  std::vector<PromptRow> rows;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    PromptRow r;
    r.crash_id = j.at("crash_id").get<std::string>();
    auto label = parse_label(j.at("label").get<std::string>());
    if (!label) throw ParseError("unknown label in prompts file: " + line);
    r.label = *label;
    r.system = j.at("system").get<std::string>();
    r.user = j.at("user").get<std::string>();
    r.assistant = j.at("assistant").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TwoVehicleNarrative> load_narratives(const std::filesystem::path& path) {
  std::vector<TwoVehicleNarrative> out;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    auto to_record = [](const json& jr) {
      std::map<std::string, std::string> m;
      for (auto it = jr.begin(); it != jr.end(); ++it) {
        m[it.key()] = it.value().get<std::string>();
      }
      FilterResult res = filter_record(m);
      if (std::holds_alternative<Rejection>(res)) {
        throw ParseError("narratives file contains unfilterable record");
      }
      return std::get<CrashRecord>(res);
    };
    out.push_back(pair_records(to_record(j.at("driver1")), to_record(j.at("driver2"))));
  }
  return out;
}

std::map<std::string, const PromptRow*> index_prompts(const std::vector<PromptRow>& rows) {
  std::map<std::string, const PromptRow*> m;
  for (const PromptRow& r : rows) m[r.crash_id] = &r;
  return m;
}

TrainExample make_example(const Vocab& vocab, const PromptRow& row) {
  PromptTriple triple{row.system, row.user, row.assistant};
  TrainExample ex;
  ex.ids = vocab.encode_prompt(triple);
  ex.label = row.label;
  return ex;
}

int run_stage(const char* name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << name << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const WouldOverwrite& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << name << ": io error: " << e.what() << "\n";
    return 3;
  } catch (const PairingError& e) {
    std::cerr << name << ": pairing error: " << e.what() << "\n";
    return 4;
  } catch (const MissingUpstream& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << name << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_generate(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("generate", [&] {
    validate(cfg.generator);
    std::filesystem::create_directories(cfg.data_dir);
    const auto records_csv = cfg.data_dir / "records.csv";
    const auto records_jsonl = cfg.data_dir / "records.jsonl";
    const auto schema_path = cfg.data_dir / "schema.json";
    const auto rejections_path = cfg.data_dir / "rejections.csv";
    refuse_overwrite({records_csv, records_jsonl, schema_path, rejections_path},
                     opts.force);

    std::vector<GeneratedPair> pairs = generate_pairs(cfg.generator);

    std::string csv = records_csv_header() + "\n";
    std::string jsonl;
    std::string rejections = rejections_csv_header() + "\n";
    std::size_t accepted = 0, rejected = 0;
    for (const GeneratedPair& pair : pairs) {
      for (const CrashRecord* rec : {&pair.driver1, &pair.driver2}) {
        FilterResult res = filter_record(record_to_map(*rec));
        if (std::holds_alternative<CrashRecord>(res)) {
          const CrashRecord& r = std::get<CrashRecord>(res);
          csv += record_to_csv_row(r) + "\n";
          jsonl += record_to_json_line(r) + "\n";
          ++accepted;
        } else {
          rejections += rejection_to_csv_row(std::get<Rejection>(res)) + "\n";
          ++rejected;
        }
      }
    }
    atomic_write_file(records_csv, csv);
    atomic_write_file(records_jsonl, jsonl);
    atomic_write_file(schema_path, schema_json());
    atomic_write_file(rejections_path, rejections);
    update_manifest(cfg, {records_csv, records_jsonl, schema_path, rejections_path});
    std::cout << "generate: " << accepted << " records (" << rejected << " rejected) -> "
              << records_csv.string() << "\n";
  });
}

int cmd_prepare(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("prepare", [&] {
    const auto records_csv = cfg.data_dir / "records.csv";
    require_artifact(records_csv);
    const auto narratives_path = cfg.data_dir / "narratives.jsonl";
    const auto prompts_path = cfg.data_dir / "prompts.jsonl";
    const auto split_path = cfg.data_dir / "split_manifest.json";
    const auto freq_path = cfg.data_dir / "label_freq.csv";
    refuse_overwrite({narratives_path, prompts_path, split_path, freq_path}, opts.force);

    std::vector<std::string> lines = read_lines(records_csv);
    if (lines.empty() || lines[0] != records_csv_header()) {
      throw ParseError("records.csv has unexpected header");
    }
    // group rows by crash_id in first-seen order
    std::vector<std::string> order;
    std::map<std::string, std::vector<CrashRecord>> groups;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      FilterResult res = filter_record(csv_row_to_map(lines[i]));
      if (!std::holds_alternative<CrashRecord>(res)) continue;
      CrashRecord rec = std::get<CrashRecord>(res);
      auto it = groups.find(rec.crash_id);
      if (it == groups.end()) {
        order.push_back(rec.crash_id);
        groups[rec.crash_id].push_back(std::move(rec));
      } else {
        it->second.push_back(std::move(rec));
      }
    }
    std::vector<std::string> unpaired;
    for (const std::string& id : order) {
      if (groups[id].size() != 2) unpaired.push_back(id);
    }
    if (!unpaired.empty()) {
      std::string msg = "unpaired crash records:";
      for (const std::string& id : unpaired) msg += " " + id;
      throw PairingError(msg);
    }

    std::string narratives_jsonl, prompts_jsonl;
    std::array<std::uint64_t, kNumClasses> freq{};
    for (const std::string& id : order) {
      TwoVehicleNarrative n = pair_records(groups[id][0], groups[id][1]);
      freq[static_cast<std::size_t>(static_cast<int>(n.label))] += 1;

      json jn;
      jn["crash_id"] = n.crash_id;
      jn["label"] = std::string(label_name(n.label));
      jn["hazardous_driver_index"] = std::string(hazardous_driver_name(n.hazardous));
      json d1 = json::object(), d2 = json::object();
      for (auto& [k, v] : record_to_map(n.driver1)) d1[k] = v;
      for (auto& [k, v] : record_to_map(n.driver2)) d2[k] = v;
      jn["driver1"] = d1;
      jn["driver2"] = d2;
      narratives_jsonl += jn.dump() + "\n";

      PromptTriple p = render_prompt(n);
      json jp;
      jp["crash_id"] = n.crash_id;
      jp["label"] = std::string(label_name(n.label));
      jp["system"] = p.system;
      jp["user"] = p.user;
      jp["assistant"] = p.assistant_target;
      prompts_jsonl += jp.dump() + "\n";
    }

    SplitManifest manifest = split(order, cfg.split_seed);

    std::string freq_csv = "label,count\n";
    for (int k = 0; k < kNumClasses; ++k) {
      freq_csv += std::string(label_name(static_cast<NarrativeLabel>(k))) + "," +
                  std::to_string(freq[static_cast<std::size_t>(k)]) + "\n";
    }

    atomic_write_file(narratives_path, narratives_jsonl);
    atomic_write_file(prompts_path, prompts_jsonl);
    atomic_write_file(split_path, split_manifest_to_json(manifest));
    atomic_write_file(freq_path, freq_csv);
    update_manifest(cfg, {narratives_path, prompts_path, split_path, freq_path});
    std::cout << "prepare: " << order.size() << " narratives (train " << manifest.train.size()
              << ", eval " << manifest.eval.size() << ", test " << manifest.test.size()
              << ")\n";
    std::cout << freq_csv;
  });
}

int cmd_train(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("train", [&] {
    const auto prompts_path = cfg.data_dir / "prompts.jsonl";
    const auto split_path = cfg.data_dir / "split_manifest.json";
    require_artifact(prompts_path);
    require_artifact(split_path);

    std::filesystem::create_directories(cfg.checkpoint_dir);
    const auto vocab_path = cfg.data_dir / "vocab.jsonl";
    const auto ckpt_path = cfg.checkpoint_dir / "checkpoint.bin";
    const auto log_path = cfg.checkpoint_dir / "train_log.jsonl";
    if (!opts.resume) refuse_overwrite({ckpt_path, vocab_path, log_path}, opts.force);

    std::vector<PromptRow> prompts = load_prompts(prompts_path);
    SplitManifest manifest = split_manifest_from_json(read_file(split_path));
    auto by_id = index_prompts(prompts);
    auto rows_for = [&](const std::vector<std::string>& ids) {
      std::vector<const PromptRow*> out;
      for (const std::string& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ParseError("split references unknown crash_id " + id);
        out.push_back(it->second);
      }
      return out;
    };
    auto train_rows = rows_for(manifest.train);
    auto eval_rows = rows_for(manifest.eval);
    if (train_rows.empty()) throw ConfigError("train split is empty");

    // vocabulary from the training split only
    std::vector<std::string> corpus;
    corpus.push_back(system_prompt());
    for (const PromptRow* r : train_rows) corpus.push_back(r->user);
    Vocab vocab = Vocab::build(corpus, cfg.vocab_max_size);

    std::vector<TrainExample> train_set, eval_set;
    for (const PromptRow* r : train_rows) train_set.push_back(make_example(vocab, *r));
    for (const PromptRow* r : eval_rows) eval_set.push_back(make_example(vocab, *r));

    MicroLM model = [&] {
      if (opts.resume && std::filesystem::exists(ckpt_path)) {
        std::cout << "train: resuming from " << ckpt_path.string() << "\n";
        return load_checkpoint(ckpt_path);
      }
      ModelConfig mc = cfg.model;
      mc.vocab_size = vocab.size();
      MicroLM fresh = init_model(mc);
      lora_wrap(fresh, cfg.lora);
      return fresh;
    }();
    model.vocab_hash = vocab.content_hash();

    std::ostringstream log;
    TrainReport rep = train(model, train_set, cfg.train, &eval_set, &log);

    atomic_write_file(vocab_path, vocab.to_jsonl());
    save_checkpoint(model, ckpt_path);
    atomic_write_file(log_path, log.str());
    update_manifest(cfg, {vocab_path, ckpt_path, log_path});
    double final_loss = rep.losses.empty() ? 0.0 : rep.losses.back();
    std::cout << "train: " << rep.steps << " steps, final loss "
              << format_double(final_loss, 4) << ", checkpoint " << ckpt_path.string()
              << "\n";
  });
}

int cmd_eval(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("eval", [&] {
    const auto prompts_path = cfg.data_dir / "prompts.jsonl";
    const auto split_path = cfg.data_dir / "split_manifest.json";
    const auto vocab_path = cfg.data_dir / "vocab.jsonl";
    const auto ckpt_path = cfg.checkpoint_dir / "checkpoint.bin";
    for (const auto& p : {prompts_path, split_path, vocab_path, ckpt_path}) {
      require_artifact(p);
    }
    std::filesystem::create_directories(cfg.report_dir);
    std::vector<std::filesystem::path> outputs = {
        cfg.report_dir / "metrics_llm.csv",     cfg.report_dir / "metrics_llm.json",
        cfg.report_dir / "confusion_llm.csv",   cfg.report_dir / "metrics_tfidf.csv",
        cfg.report_dir / "metrics_tfidf.json",  cfg.report_dir / "confusion_tfidf.csv",
        cfg.report_dir / "eval_summary.csv",    cfg.checkpoint_dir / "tfidf_model.json",
        cfg.checkpoint_dir / "baseline_classifier.json"};
    refuse_overwrite(outputs, opts.force);

    std::vector<PromptRow> prompts = load_prompts(prompts_path);
    SplitManifest manifest = split_manifest_from_json(read_file(split_path));
    Vocab vocab = Vocab::from_jsonl(read_file(vocab_path));
    MicroLM model = load_checkpoint(ckpt_path);
    if (model.vocab_hash != vocab.content_hash()) {
      throw ConfigError("checkpoint was trained with a different vocabulary");
    }

    auto by_id = index_prompts(prompts);
    auto rows_for = [&](const std::vector<std::string>& ids) {
      std::vector<const PromptRow*> out;
      for (const std::string& id : ids) out.push_back(by_id.at(id));
      return out;
    };
    auto train_rows = rows_for(manifest.train);
    auto test_rows = rows_for(manifest.test);

    // micro-LM on the test split
    std::vector<NarrativeLabel> y_true(test_rows.size());
    std::vector<NarrativeLabel> y_llm(test_rows.size());
    parallel_for(test_rows.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        y_true[i] = test_rows[i]->label;
        y_llm[i] = predict(model, make_example(vocab, *test_rows[i]).ids);
      }
    });
    ConfusionMatrix cm_llm = confusion(y_true, y_llm);
    MetricReport rep_llm = report(cm_llm);

    // TF-IDF + softmax regression baseline, trained on the same split
    std::vector<std::string> train_docs;
    std::vector<NarrativeLabel> train_labels;
    for (const PromptRow* r : train_rows) {
      train_docs.push_back(r->user);
      train_labels.push_back(r->label);
    }
    TfidfModel tfidf = tfidf_fit(train_docs);
    std::vector<SparseVector> train_vecs(train_docs.size());
    parallel_for(train_docs.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        train_vecs[i] = tfidf_transform(train_docs[i], tfidf);
      }
    });
    LinearClassifier linear =
        linear_fit(train_vecs, train_labels, static_cast<int>(tfidf.terms.size()),
                   cfg.baseline);

    std::vector<NarrativeLabel> y_tfidf(test_rows.size());
    parallel_for(test_rows.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        y_tfidf[i] = linear_predict_label(linear, tfidf_transform(test_rows[i]->user, tfidf));
      }
    });
    ConfusionMatrix cm_tfidf = confusion(y_true, y_tfidf);
    MetricReport rep_tfidf = report(cm_tfidf);

    std::string summary = "model,accuracy,macro_f1,weighted_f1\n";
    summary += "micro_lm," + format_double(rep_llm.accuracy, 4) + "," +
               format_double(rep_llm.macro_f1, 4) + "," +
               format_double(rep_llm.weighted_f1, 4) + "\n";
    summary += "tfidf_softmax," + format_double(rep_tfidf.accuracy, 4) + "," +
               format_double(rep_tfidf.macro_f1, 4) + "," +
               format_double(rep_tfidf.weighted_f1, 4) + "\n";

    atomic_write_file(cfg.report_dir / "metrics_llm.csv", report_to_csv(rep_llm));
    atomic_write_file(cfg.report_dir / "metrics_llm.json", report_to_json(rep_llm));
    atomic_write_file(cfg.report_dir / "confusion_llm.csv", confusion_to_csv(cm_llm));
    atomic_write_file(cfg.report_dir / "metrics_tfidf.csv", report_to_csv(rep_tfidf));
    atomic_write_file(cfg.report_dir / "metrics_tfidf.json", report_to_json(rep_tfidf));
    atomic_write_file(cfg.report_dir / "confusion_tfidf.csv", confusion_to_csv(cm_tfidf));
    atomic_write_file(cfg.report_dir / "eval_summary.csv", summary);
    atomic_write_file(cfg.checkpoint_dir / "tfidf_model.json", tfidf.to_json());
    atomic_write_file(cfg.checkpoint_dir / "baseline_classifier.json", linear.to_json());
    update_manifest(cfg, outputs);
    std::cout << "eval:\n" << summary;
  });
}

int cmd_shift(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("shift", [&] {
    const auto narratives_path = cfg.data_dir / "narratives.jsonl";
    const auto split_path = cfg.data_dir / "split_manifest.json";
    const auto vocab_path = cfg.data_dir / "vocab.jsonl";
    const auto ckpt_path = cfg.checkpoint_dir / "checkpoint.bin";
    for (const auto& p : {narratives_path, split_path, vocab_path, ckpt_path}) {
      require_artifact(p);
    }
    std::filesystem::create_directories(cfg.report_dir);

    const Scenario scenarios[3] = {
        {ScenarioKind::SingleDriverDistraction, cfg.scenario_single_seed},
        {ScenarioKind::BothDriverDistraction, 0},
        {ScenarioKind::TeenDrivers, cfg.scenario_teen_seed},
    };
    std::vector<std::filesystem::path> outputs = {cfg.report_dir / "probs_baseline.csv"};
    for (const Scenario& s : scenarios) {
      std::string kind(scenario_kind_name(s.kind));
      outputs.push_back(cfg.report_dir / ("probs_" + kind + ".csv"));
      outputs.push_back(cfg.report_dir / ("shift_" + kind + ".csv"));
      outputs.push_back(cfg.report_dir / ("shift_" + kind + ".svg"));
      outputs.push_back(cfg.report_dir / ("scenario_" + kind + ".json"));
    }
    refuse_overwrite(outputs, opts.force);

    std::vector<TwoVehicleNarrative> all = load_narratives(narratives_path);
    SplitManifest manifest = split_manifest_from_json(read_file(split_path));
    Vocab vocab = Vocab::from_jsonl(read_file(vocab_path));
    MicroLM model = load_checkpoint(ckpt_path);
    if (model.vocab_hash != vocab.content_hash()) {
      throw ConfigError("checkpoint was trained with a different vocabulary");
    }

    std::map<std::string, const TwoVehicleNarrative*> by_id;
    for (const TwoVehicleNarrative& n : all) by_id[n.crash_id] = &n;
    std::vector<TwoVehicleNarrative> test_set;
    for (const std::string& id : manifest.test) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ParseError("split references unknown crash_id " + id);
      test_set.push_back(*it->second);
    }

    ProbabilitySample baseline = collect_probabilities(model, vocab, test_set);
    QuartileSummary baseline_q = summarize(baseline);
    atomic_write_file(cfg.report_dir / "probs_baseline.csv",
                      probability_sample_to_csv(baseline));

    for (const Scenario& s : scenarios) {
      std::string kind(scenario_kind_name(s.kind));
      std::vector<TwoVehicleNarrative> perturbed = perturb(test_set, s);
      ProbabilitySample sample = collect_probabilities(model, vocab, perturbed);
      QuartileSummary q = summarize(sample);
      ShiftReport rep = delta_metrics(baseline_q, q);
      rep.scenario_id = kind;
      rep.baseline_id = "test_baseline";
      atomic_write_file(cfg.report_dir / ("probs_" + kind + ".csv"),
                        probability_sample_to_csv(sample));
      atomic_write_file(cfg.report_dir / ("shift_" + kind + ".csv"),
                        shift_report_to_csv(rep));
      atomic_write_file(cfg.report_dir / ("shift_" + kind + ".svg"),
                        shift_report_to_svg(rep));
      atomic_write_file(cfg.report_dir / ("scenario_" + kind + ".json"),
                        scenario_manifest_json(s, "test"));
    }
    update_manifest(cfg, outputs);
    std::cout << "shift: baseline + " << 3 << " scenarios over " << test_set.size()
              << " test narratives -> " << cfg.report_dir.string() << "\n";
  });
}

int cmd_report(const PipelineConfig& cfg, const StageOptions& opts) {
  return run_stage("report", [&] {
    const auto summary_path = cfg.report_dir / "eval_summary.csv";
    require_artifact(summary_path);
    const auto out_path = cfg.report_dir / "report.md";
    refuse_overwrite({out_path}, opts.force);

    std::string md = "# Run report\n\n## Model comparison\n\n";
    auto csv_as_table = [](const std::string& csv) {
      std::string out;
      std::istringstream in(csv);
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string row = "|";
        for (const std::string& f : split_csv_line(line)) row += " " + f + " |";
        out += row + "\n";
        if (first) {
          std::size_t cols = split_csv_line(line).size();
          out += "|";
          for (std::size_t i = 0; i < cols; ++i) out += " --- |";
          out += "\n";
          first = false;
        }
      }
      return out;
    };
    md += csv_as_table(read_file(summary_path)) + "\n";

    for (const char* name : {"metrics_llm", "metrics_tfidf"}) {
      auto p = cfg.report_dir / (std::string(name) + ".csv");
      if (std::filesystem::exists(p)) {
        md += std::string("## ") + name + "\n\n" + csv_as_table(read_file(p)) + "\n";
      }
    }
    for (const char* kind : {"single_driver_distraction", "both_driver_distraction",
                             "teen_drivers"}) {
      auto p = cfg.report_dir / ("shift_" + std::string(kind) + ".csv");
      if (std::filesystem::exists(p)) {
        md += "## shift: " + std::string(kind) + "\n\n" + csv_as_table(read_file(p)) +
              "\nChart: shift_" + std::string(kind) + ".svg\n\n";
      }
    }
    atomic_write_file(out_path, md);
    update_manifest(cfg, {out_path});
    std::cout << "report: " << out_path.string() << "\n";
  });
}

namespace {

json parse_set_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (...) {
    return json(text);  // plain string
  }
}

void apply_set(json& doc, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects key=value, got '" + spec + "'");
  }
  std::string key = spec.substr(0, eq);
  json value = parse_set_value(spec.substr(eq + 1));
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = key.find('.', pos);
    std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw ConfigError("--set key has empty segment: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  const std::string usage =
      "usage: dha_forge <generate|prepare|train|eval|shift|report> [--config PATH]\n"
      "                 [--force] [--resume] [--set KEY=VALUE ...] [--seed-override N]\n";
  if (args.empty()) {
    std::cerr << usage;
    return 2;
  }
  std::string command = args[0];
  std::string config_path;
  StageOptions opts;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed_override;

  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    auto next = [&]() -> const std::string& {
      if (i + 1 >= args.size()) throw ConfigError("missing value after " + a);
      return args[++i];
    };
    try {
      if (a == "--config") {
        config_path = next();
      } else if (a == "--force") {
        opts.force = true;
      } else if (a == "--resume") {
        opts.resume = true;
      } else if (a == "--set") {
        sets.push_back(next());
      } else if (a == "--seed-override") {
        seed_override = std::stoull(next());
      } else {
        std::cerr << "unknown argument: " << a << "\n" << usage;
        return 2;
      }
    } catch (const std::exception& e) {
      std::cerr << "argument error: " << e.what() << "\n";
      return 2;
    }
  }

  PipelineConfig cfg;
  try {
    json doc = json::object();
    if (!config_path.empty()) {
      doc = json::parse(read_file(config_path));
    }
    for (const std::string& s : sets) apply_set(doc, s);
    if (seed_override) {
      doc["generator"]["seed"] = *seed_override;
      doc["split_seed"] = *seed_override + 1;
      doc["train"]["seed"] = *seed_override + 2;
      doc["baseline"]["seed"] = *seed_override + 3;
      doc["scenarios"]["single_driver_seed"] = *seed_override + 4;
      doc["scenarios"]["teen_seed"] = *seed_override + 5;
    }
    cfg = PipelineConfig::from_json_text(doc.dump());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (command == "generate") return cmd_generate(cfg, opts);
  if (command == "prepare") return cmd_prepare(cfg, opts);
  if (command == "train") return cmd_train(cfg, opts);
  if (command == "eval") return cmd_eval(cfg, opts);
  if (command == "shift") return cmd_shift(cfg, opts);
  if (command == "report") return cmd_report(cfg, opts);
  std::cerr << "unknown command: " << command << "\n" << usage;
  return 2;
}

}  // namespace dha
