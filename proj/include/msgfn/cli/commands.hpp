#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msgfn/eval/metrics.hpp"
#include "msgfn/eval/range.hpp"
#include "msgfn/eval/timing.hpp"
#include "msgfn/io/checkpoint.hpp"
#include "msgfn/training/run.hpp"

namespace msgfn::cli {

inline constexpr const char* kOutputRootVar = "MSGFN_OUTPUT_ROOT";

inline std::string output_root() {
  const char* v = std::getenv(kOutputRootVar);
  return v && *v ? v : "runs";
}

/// `name=value[,name=value...]` against the game's controls.
inline std::map<std::size_t, int> parse_controls(const std::string& text, const std::vector<ControlSpec>& specs) {
  std::map<std::size_t, int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("controls", "expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const int index = control_index(specs, name);
    if (index < 0) {
      std::string known;
      for (const auto& s : specs) known += (known.empty() ? "" : ", ") + s.name;
      throw ConfigError("controls", "unknown control '" + name + "' (known: " + known + ")");
    }
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() - eq - 1)
      throw ConfigError("controls", "value of '" + name + "' is not an integer");
    out[static_cast<std::size_t>(index)] = value;
  }
  return out;
}

inline std::vector<Size> parse_size_list(const std::string& text) {
  std::vector<Size> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_size(item));
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// train

struct TrainOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> game;
  std::optional<std::string> checkpoint;  // resume from here
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t threads = 1;
};

inline TrainConfig train_config(const TrainOptions& o) {
  TrainConfig c;
  if (o.checkpoint) {
    c = load_checkpoint(*o.checkpoint).config;
    if (o.config_path) {
      const TrainConfig file = load_config(*o.config_path);
      c.iterations = file.iterations;
      c.checkpoint_every = file.checkpoint_every;
    }
  } else if (o.config_path) {
    c = load_config(*o.config_path);
  } else {
    c = preset_config(parse_game(o.game.value_or("sokoban")));
  }
  if (o.game && parse_game(*o.game) != c.game) throw ConfigError("game", "--game disagrees with the configuration");
  if (o.seed && !o.checkpoint) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (c.output_dir.empty())
    c.output_dir = (std::filesystem::path(output_root()) / (game_name(c.game) + "-seed" + std::to_string(c.seed))).string();
  c.validate();
  return c;
}

inline int cmd_train(const TrainOptions& o, std::ostream& out) {
  const TrainConfig c = train_config(o);
  std::optional<Checkpoint> resume;
  if (o.checkpoint) resume = load_checkpoint(*o.checkpoint);
  out << "training " << game_name(c.game) << " for " << c.iterations << " iterations into " << c.output_dir
      << std::endl;
  RunOptions ro;
  ro.threads = o.threads;
  ro.progress = &out;
  const RunResult r = run_training(c, c.output_dir, ro, std::move(resume));
  out << "active sizes:";
  for (Size s : r.trainer.curriculum().active) out << ' ' << size_string(s);
  out << "\nreplay levels: " << r.trainer.buffer().total() << "\nwrote " << r.final_checkpoint << std::endl;
  return 0;
}

// generate

struct GenerateOptions {
  std::string checkpoint;
  Size size{0, 0};  // 0x0: the largest trained size
  std::size_t count = 1;
  int trials = 1;
  std::string controls;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<std::string> out;
};

inline Size default_size(const Checkpoint& c) {
  Size best{0, 0};
  for (Size s : c.curriculum.active)
    if (s.area() > best.area()) best = s;
  if (best.area() == 0) best = c.config.seed_sizes.front();
  return best;
}

inline int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const Game game = c.config.game;
  const GameSpec spec = game_spec(game);
  const Size size = o.size.area() > 0 ? o.size : default_size(c);
  const auto controlled = parse_controls(o.controls, spec.controls);
  const GenerateFn gen = policy_generator(c.policy, game, o.threads);
  const ConditionSource source = condition_source(c.gmms, game, size, gen, o.seed, o.threads);
  if (!source.warning.empty()) err << "warning: " << source.warning << std::endl;

  std::vector<Request> requests;
  std::vector<Rng> rngs;
  for (std::size_t i = 0; i < o.count; ++i) {
    Rng cr = make_stream(o.seed, {kEvalConditionStream, i});
    Request r;
    r.controlled = controlled;
    r.u = controlled.empty() ? source.sample(cr) : source.sample_given(controlled, cr);
    requests.push_back(std::move(r));
    rngs.push_back(make_stream(o.seed, {kRetryStream, i}));
  }
  const auto results = generate_with_retries(gen, size, requests, o.trials, rngs, spec.controls, o.threads);

  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(output_root()) / "generated";
  fs::create_directories(dir);
  auto manifest = open_output(dir / "manifest.tsv");
  manifest << "index\tfile\tsize\tplayable\ttrials\treason";
  for (const auto& s : spec.controls) manifest << "\trequested_" << s.name << "\tmeasured_" << s.name;
  manifest << "\terror\tcondition_source\n";
  std::size_t playable = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RetryResult& r = results[i];
    std::ostringstream name;
    name << "level_" << std::setw(5) << std::setfill('0') << i << ".txt";
    open_output(dir / name.str()) << render_level(r.sample.level) << '\n';
    const Analysis& a = r.sample.analysis;
    playable += a.playable;
    manifest << i << '\t' << name.str() << '\t' << size_string(size) << '\t' << (a.playable ? 1 : 0) << '\t'
             << r.trials << '\t' << (a.playable ? "-" : reason_name(a.reason));
    std::vector<int> requested = source.values(requests[i].u);
    for (const auto& [k, v] : controlled) requested[k] = v;
    for (std::size_t k = 0; k < spec.controls.size(); ++k) {
      manifest << '\t' << requested[k] << '\t';
      if (a.has(spec.controls[k].name))
        manifest << a.property(spec.controls[k].name);
      else
        manifest << '-';
    }
    manifest << '\t' << (a.playable ? format_double(r.error) : "-") << '\t' << source_kind_name(source.kind) << '\n';
  }
  out << "generated " << results.size() << " " << game_name(game) << " levels at " << size_string(size) << ", "
      << playable << " playable, in " << dir.string() << std::endl;
  return 0;
}

// evaluate

struct EvaluateOptions {
  std::string checkpoint;
  std::vector<Size> sizes;  // empty: trained sizes
  std::string protocol = "smoke";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<std::string> out;
};

struct Protocol {
  std::size_t quality_samples;
  std::size_t control_per_value;  // 0: each control's own count
  std::size_t timing_batches, timing_batch_size;
};

inline Protocol protocol(const std::string& name) {
  if (name == "smoke") return {500, 10, 2, 20};
  if (name == "full") return {10000, 0, 5, 100};
  throw ConfigError("protocol", "unknown protocol '" + name + "' (smoke or full)");
}

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  const Protocol p = protocol(o.protocol);
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const Game game = c.config.game;
  std::vector<Size> sizes = o.sizes;
  if (sizes.empty()) sizes.assign(c.curriculum.active.begin(), c.curriculum.active.end());
  const GenerateFn gen = policy_generator(c.policy, game, o.threads);
  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(output_root()) / "evaluation";
  fs::create_directories(dir);
  auto quality = open_output(dir / "quality.tsv");
  quality << "game\tsize\tsource\tsamples\tplayable\ttile_diversity\tduplicates\tunique_signatures\tclusters"
             "\tlength_mean\tlength_std\n";
  auto controls = open_output(dir / "controls.tsv");
  controls << "game\tsize\tcontrol\tvalues\tper_value\tplayable\tmae\tr2\tscore\n";
  std::vector<ConditionSource> sources;
  for (Size s : sizes) {
    const ConditionSource src = condition_source(c.gmms, game, s, gen, o.seed, o.threads);
    if (!src.warning.empty()) err << "warning: " << size_string(s) << ": " << src.warning << std::endl;
    sources.push_back(src);
    const std::vector<Sample> samples = sample_unconditional(gen, src, p.quality_samples, o.seed, o.threads);
    const QualityReport q = quality_report(samples, s);
    quality << game_name(game) << '\t' << size_string(s) << '\t' << source_kind_name(src.kind) << '\t' << q.samples
            << '\t' << format_double(q.playable_fraction) << '\t' << format_double(q.tile_diversity) << '\t'
            << format_double(q.duplicate_fraction) << '\t' << format_double(q.signature_fraction) << '\t'
            << q.clusters << '\t' << format_double(q.length_mean) << '\t' << format_double(q.length_std) << '\n';
    out << size_string(s) << ": playable " << format_double(q.playable_fraction) << ", diversity "
        << format_double(q.tile_diversity) << std::endl;

    const auto [x, y] = range_axes(game, s);
    const ExpressiveRange er = expressive_range(samples, x, y);
    const std::string stem = "range_" + game_name(game) + "_" + size_string(s);
    {
      auto csv = open_output(dir / (stem + ".csv"));
      write_range_csv(csv, er);
      auto svg = open_output(dir / (stem + ".svg"));
      write_range_svg(svg, er, game_name(game) + " " + size_string(s));
    }
    for (std::size_t k = 0; k < src.specs.size(); ++k) {
      const ControlReport r = control_eval(gen, src, k, p.control_per_value, o.seed, o.threads);
      controls << game_name(game) << '\t' << size_string(s) << '\t' << r.control << '\t' << r.requested.size() << '\t'
               << r.per_value << '\t' << format_double(r.playable_fraction) << '\t' << format_double(r.mae) << '\t'
               << format_double(r.r2) << '\t' << format_double(r.score) << '\n';
    }
  }
  auto timing = open_output(dir / "timing.tsv");
  timing << "game\tsize\tarea\tbatches\tbatch_size\tbatch_mean_s\tbatch_std_s\tgenerate_mean_s\tlevel_ms\n";
  for (const TimingRow& t : timing_report(gen, sources, p.timing_batches, p.timing_batch_size, o.seed, o.threads))
    timing << game_name(game) << '\t' << size_string(t.size) << '\t' << t.size.area() << '\t' << t.batches << '\t'
           << t.batch_size << '\t' << format_double(t.batch_seconds.mean) << '\t' << format_double(t.batch_seconds.std)
           << '\t' << format_double(t.generate_seconds.mean) << '\t' << format_double(t.level_ms) << '\n';
  out << "wrote reports to " << dir.string() << std::endl;
  return 0;
}

// solve

inline int cmd_solve(const std::string& path, const std::string& game_text, std::ostream& out) {
  const Game game = parse_game(game_text);
  const Level level = parse_level(read_file(path), game);
  const Analysis a = analyze(level);
  out << "size: " << size_string({level.width, level.height}) << '\n';
  out << "playable: " << (a.playable ? "yes" : "no") << '\n';
  if (!a.playable) {
    out << "reason: " << reason_name(a.reason);
    if (!a.detail.empty()) out << " (" << a.detail << ")";
    out << '\n';
  }
  for (const auto& [name, value] : a.properties) out << name << ": " << value << '\n';
  if (a.solution) out << "solution: " << *a.solution << '\n';
  return a.playable ? 0 : 2;
}

// report

/// Summarizes a run directory: per size the first iteration with a playable
/// rollout, the final buffer and cluster counts, and the mean loss over the
/// last 100 logged iterations.
inline int cmd_report(const std::string& run_dir, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  std::ifstream log(dir / "train_log.tsv");
  if (!log) throw std::runtime_error("no train_log.tsv in " + run_dir);
  std::string line;
  std::getline(log, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) header.push_back(f);
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(log, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) row.push_back(f);
    if (row.size() == header.size()) rows.push_back(std::move(row));
  }
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  out << "iterations: " << rows.size() << '\n';
  if (!rows.empty()) out << "active at end: " << rows.back()[static_cast<std::size_t>(col("active"))] << '\n';
  out << "size\tfirst_playable\tbuffer\tclusters\tmean_loss_last_100\n";
  for (const auto& h : header) {
    if (h.rfind("playable_", 0) != 0) continue;
    const std::string s = h.substr(9);
    const int pc = col(h), bc = col("buffer_" + s), cc = col("clusters_" + s), lc = col("loss_" + s);
    std::string first = "-";
    for (const auto& r : rows)
      if (std::stoi(r[static_cast<std::size_t>(pc)]) > 0) {
        first = r[0];
        break;
      }
    double loss = 0;
    int n = 0;
    for (std::size_t i = rows.size() > 100 ? rows.size() - 100 : 0; i < rows.size(); ++i) {
      const std::string& v = rows[i][static_cast<std::size_t>(lc)];
      if (v == "-") continue;
      loss += std::stod(v);
      ++n;
    }
    out << s << '\t' << first << '\t' << (rows.empty() ? "0" : rows.back()[static_cast<std::size_t>(bc)]) << '\t'
        << (rows.empty() ? "0" : rows.back()[static_cast<std::size_t>(cc)]) << '\t'
        << (n ? format_double(loss / n) : "-") << '\n';
  }
  return 0;
}

}  // namespace msgfn::cli
