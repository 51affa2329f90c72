#include <CLI11.hpp>
#include <iostream>

#include "msgfn/cli/commands.hpp"

using namespace msgfn;

namespace {

struct SizeFlag {
  std::string text;
  Size get() const { return text.empty() ? Size{0, 0} : parse_size(text); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-size level generators for Sokoban, Zelda and Danger Dave"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::string out;

  cli::TrainOptions train;
  std::string train_config, train_game, train_checkpoint;
  auto* t = app.add_subcommand("train", "Train a generator; writes logs, checkpoints and final.ckpt");
  t->add_option("--config", train_config, "Configuration file (JSON)");
  t->add_option("--game", train_game, "Game preset when no configuration is given: sokoban, zelda, dave");
  t->add_option("--checkpoint", train_checkpoint, "Resume from this checkpoint");
  auto* train_seed = t->add_option("--seed", seed, "Random seed");
  t->add_option("--threads", threads, "Worker threads");
  t->add_option("--out", out, "Run directory (default $" + std::string(cli::kOutputRootVar) + "/<game>-seed<seed>)");

  cli::GenerateOptions gen;
  SizeFlag gen_size;
  auto* g = app.add_subcommand("generate", "Generate levels from a checkpoint");
  g->add_option("--checkpoint", gen.checkpoint, "Checkpoint to load")->required();
  g->add_option("--size", gen_size.text, "Level size WxH (default: largest trained size)");
  g->add_option("--count", gen.count, "Number of levels");
  g->add_option("--trials", gen.trials, "Attempts per level")->check(CLI::Range(1, 1000));
  g->add_option("--controls", gen.controls, "Requested controls name=value[,name=value]");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--threads", threads, "Worker threads");
  g->add_option("--out", out, "Output directory (default $" + std::string(cli::kOutputRootVar) + "/generated)");

  cli::EvaluateOptions eval;
  std::string eval_sizes;
  auto* e = app.add_subcommand("evaluate", "Quality, control, expressive range and timing reports");
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint to load")->required();
  e->add_option("--size", eval_sizes, "Sizes WxH[,WxH...] (default: trained sizes)");
  e->add_option("--protocol", eval.protocol, "smoke (500 levels) or full (10000 levels)");
  e->add_option("--seed", eval.seed, "Random seed");
  e->add_option("--threads", threads, "Worker threads");
  e->add_option("--out", out, "Report directory (default $" + std::string(cli::kOutputRootVar) + "/evaluation)");

  std::string level_file, solve_game = "sokoban";
  auto* s = app.add_subcommand("solve", "Check a level file and print its solution and properties");
  s->add_option("level", level_file, "Level text file")->required();
  s->add_option("--game", solve_game, "sokoban, zelda or dave");

  std::string run_dir;
  auto* r = app.add_subcommand("report", "Summarize the training log of a run directory");
  r->add_option("run", run_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*t) {
      if (!train_config.empty()) train.config_path = train_config;
      if (!train_game.empty()) train.game = train_game;
      if (!train_checkpoint.empty()) train.checkpoint = train_checkpoint;
      if (*train_seed) train.seed = seed;
      if (!out.empty()) train.out = out;
      train.threads = threads;
      return cli::cmd_train(train, std::cout);
    }
    if (*g) {
      gen.size = gen_size.get();
      gen.threads = threads;
      if (!out.empty()) gen.out = out;
      return cli::cmd_generate(gen, std::cout, std::cerr);
    }
    if (*e) {
      eval.sizes = cli::parse_size_list(eval_sizes);
      eval.threads = threads;
      if (!out.empty()) eval.out = out;
      return cli::cmd_evaluate(eval, std::cout, std::cerr);
    }
    if (*s) return cli::cmd_solve(level_file, solve_game, std::cout);
    if (*r) return cli::cmd_report(run_dir, std::cout);
  } catch (const ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << std::endl;
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << std::endl;
    return 1;
  }
  return 0;
}
