/* Copyright 2026 The gsaseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// gsanet: data generation, training, evaluation and inspection front end.
//
// Exit codes: 0 success, 1 usage error, 2 validation or contract failure,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsa/config.hpp"
#include "gsa/dataset.hpp"
#include "gsa/gradcheck.hpp"
#include "gsa/io.hpp"
#include "gsa/segnet.hpp"
#include "gsa/sparsemax.hpp"
#include "gsa/train.hpp"

namespace fs = std::filesystem;
using namespace gsa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

const char* const kManifest = "manifest.txt";

std::string sample_stem(std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05lld", static_cast<long long>(i));
  return buf;
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

// Manifest: "key=value" header lines, then one "image label" pair per line.
struct Manifest {
  std::uint64_t seed = 0;
  int num_classes = 0;
  std::int64_t size = 0;
  std::vector<std::pair<std::string, std::string>> files;
};

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifest;
  if (!fs::exists(path)) throw IoError("no dataset at " + dir.string() + " (missing manifest)");
  std::istringstream in(read_text(path));
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      try {
        if (key == "seed") m.seed = std::stoull(value);
        else if (key == "classes") m.num_classes = std::stoi(value);
        else if (key == "size") m.size = std::stoll(value);
        else if (key != "count") throw ParseError("manifest: unknown key '" + key + "'", lineno);
      } catch (const std::logic_error&) {
        throw ParseError("manifest: bad value for '" + key + "'", lineno);
      }
      continue;
    }
    std::istringstream fields(line);
    std::string image, label;
    if (!(fields >> image >> label)) throw ParseError("manifest: expected 'image label'", lineno);
    m.files.emplace_back(image, label);
  }
  if (m.num_classes < 2) throw ParseError("manifest: missing classes", lineno);
  return m;
}

std::vector<SegSample> load_dataset(const fs::path& dir, int* num_classes = nullptr) {
  const Manifest m = read_manifest(dir);
  std::vector<SegSample> out;
  for (const auto& [image, label] : m.files) {
    SegSample s{read_ppm(dir / image), read_pgm(dir / label)};
    if (s.label.height != s.image.dim(0) || s.label.width != s.image.dim(1)) {
      throw ContractError("dataset: " + image + " and " + label + " differ in size");
    }
    for (auto v : s.label.data) {
      if (v != kIgnoreLabel && v >= m.num_classes) {
        throw ContractError("dataset: " + label + " holds class " + std::to_string(v) +
                            " but the manifest declares " + std::to_string(m.num_classes));
      }
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ContractError("dataset at " + dir.string() + " is empty");
  if (num_classes) *num_classes = m.num_classes;
  return out;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : parse_config(read_text(path));
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

GstArchive to_archive(const ParamMap& params) {
  GstArchive a;
  for (const auto& [name, t] : params) a.emplace_back(name, t.detach());
  return a;
}

ParamMap from_archive(const GstArchive& a) {
  ParamMap p;
  for (const auto& [name, t] : a) {
    if (!p.emplace(name, t).second) throw ContractError("checkpoint repeats tensor '" + name + "'");
  }
  return p;
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::int64_t n = 200;
  int classes = 4;
  std::int64_t size = 64;
  std::uint64_t seed = 0;
  std::string out;
  bool colorize = false;
};

int cmd_gen_data(const GenDataArgs& a) {
  const auto samples = gen_shapes_dataset(a.n, a.classes, a.size, a.seed);
  const fs::path dir(a.out);
  make_dir(dir);
  std::ostringstream manifest;
  manifest << "seed=" << a.seed << "\nclasses=" << a.classes << "\nsize=" << a.size
           << "\ncount=" << a.n << "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string stem = sample_stem(static_cast<std::int64_t>(i));
    write_ppm(dir / ("img_" + stem + ".ppm"), samples[i].image);
    write_pgm(dir / ("lbl_" + stem + ".pgm"), samples[i].label);
    if (a.colorize) write_ppm(dir / ("col_" + stem + ".ppm"), colorize_labels(samples[i].label));
    manifest << "img_" << stem << ".ppm lbl_" << stem << ".pgm\n";
  }
  write_text(dir / kManifest, manifest.str());
  std::cout << "wrote " << samples.size() << " samples to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string data;
  std::string eval_data;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = load_config(a.config, a.overrides);
  if (a.seed) {
    cfg.model.seed = *a.seed;
    cfg.train.seed = *a.seed;
  }
  int classes = 0;
  const auto train_set = load_dataset(a.data, &classes);
  if (classes != cfg.model.num_classes) {
    throw ContractError("dataset has " + std::to_string(classes) + " classes but model.num_classes = " +
                        std::to_string(cfg.model.num_classes));
  }
  std::vector<SegSample> eval_set;
  if (!a.eval_data.empty()) {
    int eval_classes = 0;
    eval_set = load_dataset(a.eval_data, &eval_classes);
    if (eval_classes != classes) throw ContractError("train and eval datasets disagree on classes");
  }

  const fs::path out(a.out);
  make_dir(out);
  write_text(out / "config.ini", format_config(cfg));
  std::ofstream log(out / "metrics.log", std::ios::trunc);
  if (!log) throw IoError("cannot write " + (out / "metrics.log").string());
  const auto result = train(cfg.model, cfg.train, train_set, eval_set, init_model(cfg.model),
                            [&](const std::string& line) {
                              log << line << '\n';
                              log.flush();
                              if (!a.quiet) std::cout << line << '\n';
                            });
  if (!log) throw IoError("failed writing metrics.log");
  gst_write(to_archive(result.final_params), out / "final.gst");
  gst_write(to_archive(result.best_params), out / "best.gst");
  if (result.best_miou >= 0) std::printf("best_miou=%.6f\n", result.best_miou);
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string checkpoint;
  std::string data;
  std::string predictions;
  std::string dump;
};

int cmd_eval(const EvalArgs& a) {
  const RunConfig cfg = load_config(a.config, a.overrides);
  int classes = 0;
  const auto samples = load_dataset(a.data, &classes);
  if (classes != cfg.model.num_classes) {
    throw ContractError("dataset has " + std::to_string(classes) + " classes but model.num_classes = " +
                        std::to_string(cfg.model.num_classes));
  }

  ConfusionMatrix cm(classes);
  std::vector<LabelMap> preds;
  if (!a.predictions.empty()) {
    // Score label maps produced elsewhere, matched to the dataset by file name.
    const Manifest m = read_manifest(a.data);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      LabelMap p = read_pgm(fs::path(a.predictions) / m.files[i].second);
      if (p.height != samples[i].label.height || p.width != samples[i].label.width) {
        throw ContractError("prediction " + m.files[i].second + " has the wrong size");
      }
      accumulate_confusion(p.data, samples[i].label.data, cm);
      preds.push_back(std::move(p));
    }
  } else {
    if (a.checkpoint.empty()) throw ContractError("eval needs --checkpoint or --predictions");
    const ParamMap params = from_archive(gst_read(a.checkpoint));
    check_params(params, model_param_specs(cfg.model));
    cm = evaluate(samples, cfg.model, params, 8, &preds);
  }

  if (!a.dump.empty()) {
    const fs::path dir(a.dump);
    make_dir(dir);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const std::string stem = sample_stem(static_cast<std::int64_t>(i));
      write_pgm(dir / ("pred_" + stem + ".pgm"), preds[i]);
      write_ppm(dir / ("pred_" + stem + ".ppm"), colorize_labels(preds[i]));
    }
  }

  const MiouResult r = miou(cm);
  std::printf("%-6s %10s\n", "class", "iou");
  for (int k = 0; k < classes; ++k) {
    if (r.per_class[static_cast<std::size_t>(k)]) {
      std::printf("%-6d %10.6f\n", k, *r.per_class[static_cast<std::size_t>(k)]);
    } else {
      std::printf("%-6d %10s\n", k, "absent");
    }
  }
  std::printf("miou=%.6f\n", r.miou);
  return kExitOk;
}

// ---------------------------------------------------------------- count

struct CountArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::int64_t height = 64;
  std::int64_t width = 64;
  std::string format = "table";
};

int cmd_count(const CountArgs& a) {
  const RunConfig cfg = load_config(a.config, a.overrides);
  const CostReport r = count_cost(cfg.model, a.height, a.width);
  std::cout << (a.format == "kv" ? format_cost_kv(r) : format_cost_table(r));
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string op;
  bool inject_fault = false;
  int probes = 64;
  std::uint64_t seed = 1;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  testing::inject_sparsemax_jvp_fault(a.inject_fault);
  GradCheckOptions opt;
  opt.probes = a.probes;
  opt.seed = a.seed;
  const auto results = run_gradcheck_suites(a.op, opt);
  if (results.empty()) throw ContractError("no gradient suite matches '" + a.op + "'");
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-22s worst_rel_error=%.3e probes=%d skipped=%d %s\n", r.name.c_str(),
                r.worst_rel_error, r.probes, r.skipped_kinks, r.passed ? "ok" : "FAIL");
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------- sparsemax

struct SparsemaxArgs {
  std::string z;
  std::string mode = "sparsemax";
};

std::vector<double> parse_scores(const std::string& text) {
  std::string spaced = text;
  for (auto& c : spaced) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != tok.size()) throw ParseError("not a number: '" + tok + "'", out.size() + 1);
    out.push_back(v);
  }
  return out;
}

int cmd_sparsemax(const SparsemaxArgs& a) {
  std::string text = a.z;
  if (text.empty()) text.assign(std::istreambuf_iterator<char>(std::cin), {});
  const std::vector<double> z = parse_scores(text);
  if (z.empty()) throw ContractError("no scores given");
  auto print_row = [](const std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) std::printf(i ? " %.9g" : "%.9g", p[i]);
    std::printf("\n");
  };
  if (a.mode == "softmax") {
    const Tensor s = softmax_rows(Tensor({static_cast<std::int64_t>(z.size())},
                                         std::vector<float>(z.begin(), z.end())));
    print_row(std::vector<double>(s.data().begin(), s.data().end()));
    return kExitOk;
  }
  const SimplexProjection p = sparsemax(z);
  print_row(p.output);
  std::printf("tau=%.9g\n", p.tau);
  std::printf("support=");
  for (std::size_t i = 0; i < p.support.size(); ++i) std::printf(i ? ",%zu" : "%zu", p.support[i]);
  std::printf("\n");
  return kExitOk;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GSANet segmentation toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* g = app.add_subcommand("gen-data", "Write a synthetic shapes dataset");
  g->add_option("--n", gen.n, "Number of samples")->check(CLI::NonNegativeNumber);
  g->add_option("--classes", gen.classes, "Class count including background")
      ->check(CLI::Range(2, kShapeKinds + 1));
  g->add_option("--size", gen.size, "Image side in pixels")->check(CLI::Range(16, 4096));
  g->add_option("--seed", gen.seed, "Dataset seed");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--colorize", gen.colorize, "Also write palette-colorized label images");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a dataset directory");
  t->add_option("--config", tr.config, "Run configuration file")->check(CLI::ExistingFile);
  t->add_option("--set", tr.overrides, "Override, section.key=value (repeatable)");
  t->add_option("--data", tr.data, "Training dataset directory")->required();
  t->add_option("--eval-data", tr.eval_data, "Evaluation dataset directory");
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--seed", tr.seed, "Seed for initialization and augmentation");
  t->add_flag("--quiet", tr.quiet, "Do not echo the metrics log");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Single-scale evaluation, per-class IoU and mIoU");
  e->add_option("--config", ev.config, "Run configuration file")->check(CLI::ExistingFile);
  e->add_option("--set", ev.overrides, "Override, section.key=value (repeatable)");
  e->add_option("--checkpoint", ev.checkpoint, "GST checkpoint");
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--predictions", ev.predictions,
                "Score these label maps (named as in the dataset) instead of running a model");
  e->add_option("--dump", ev.dump, "Write predicted label maps here");

  CountArgs co;
  auto* c = app.add_subcommand("count", "Parameter and FLOP report");
  c->add_option("--config", co.config, "Run configuration file")->check(CLI::ExistingFile);
  c->add_option("--set", co.overrides, "Override, section.key=value (repeatable)");
  c->add_option("--height", co.height, "Input height")->check(CLI::PositiveNumber);
  c->add_option("--width", co.width, "Input width")->check(CLI::PositiveNumber);
  c->add_option("--format", co.format, "table or kv")->check(CLI::IsMember({"table", "kv"}));

  GradcheckArgs gc;
  auto* gr = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gr->add_option("--op", gc.op, "Run only suites whose name contains this");
  gr->add_option("--probes", gc.probes, "Probes per suite")->check(CLI::PositiveNumber);
  gr->add_option("--seed", gc.seed, "Probe seed");
  gr->add_flag("--inject-fault", gc.inject_fault, "Corrupt the sparsemax backward (test hook)");

  SparsemaxArgs sm;
  auto* s = app.add_subcommand("sparsemax", "Project scores onto the simplex");
  s->add_option("--z", sm.z, "Scores, comma or space separated (default: stdin)");
  s->add_option("--mode", sm.mode, "sparsemax or softmax")
      ->check(CLI::IsMember({"sparsemax", "softmax"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    // --help and friends exit 0; every other parse failure is a usage error.
    return app.exit(err) == 0 ? kExitOk : kExitUsage;
  }

  if (g->parsed()) return guarded([&] { return cmd_gen_data(gen); });
  if (t->parsed()) return guarded([&] { return cmd_train(tr); });
  if (e->parsed()) return guarded([&] { return cmd_eval(ev); });
  if (c->parsed()) return guarded([&] { return cmd_count(co); });
  if (gr->parsed()) return guarded([&] { return cmd_gradcheck(gc); });
  if (s->parsed()) return guarded([&] { return cmd_sparsemax(sm); });
  return kExitUsage;
}
