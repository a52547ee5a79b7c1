#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "scatterhsd/checkpoint.hpp"
#include "scatterhsd/config.hpp"
#include "scatterhsd/corpus.hpp"
#include "scatterhsd/error.hpp"
#include "scatterhsd/scatter.hpp"
#include "scatterhsd/trainer.hpp"

namespace fs = std::filesystem;
using namespace scatterhsd;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kIo = 3;
constexpr int kNumerics = 4;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.file, "key=value config file with [section] headers");
  cmd->add_option("--set", args.overrides, "override, e.g. --set train.epochs=20")->take_all();
}

config::Config resolve(const ConfigArgs& args, const std::vector<std::string>& extra = {}) {
  config::Config cfg;
  if (!args.file.empty()) {
    std::ifstream in(args.file);
    if (!in) throw IoError("cannot open config '" + args.file + "'");
    try {
      cfg = config::Config::parse(in);
    } catch (const ParseError& e) {
      throw InvalidInput(args.file + ": " + e.what());
    }
  }
  for (const auto& o : args.overrides) cfg.apply_override(o);
  for (const auto& o : extra) cfg.apply_override(o);
  return cfg;
}

std::string dump(const config::Config& cfg) {
  std::ostringstream os;
  cfg.dump(os);
  return os.str();
}

void print_effective(const config::Config& cfg) {
  std::cout << "# effective config\n" << dump(cfg) << "# end config\n";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

trainer::Dataset build_dataset(const config::Config& cfg, bool with_train) {
  auto split = corpus::gen_split(static_cast<int>(cfg.get_uint("corpus.classes")), cfg.get_uint("corpus.per_class"),
                                 cfg.get_uint("corpus.seed"));
  if (!with_train) split.train.clear();
  const auto model = cfg.model();
  return trainer::prepare(split, cfg.scatter(), model.upstream.target_points, cfg.get_uint("scatter.views"),
                          model.hfe.classes);
}

void print_report(const trainer::EvalReport& r, trainer::Mode mode) {
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (mode == trainer::Mode::classify) {
    std::cout << "OA " << 100.0 * r.oa << "%  mAcc " << 100.0 * r.macc << "%  CDx1000 " << std::setprecision(4)
              << r.cd_x1000 << "  (n=" << r.samples << ")\n";
    for (std::size_t l = 0; l < r.per_level.size(); ++l) {
      std::cout << std::setprecision(2) << "  level " << l + 1 << ": OA " << 100.0 * r.per_level[l].oa << "%  mAcc "
                << 100.0 * r.per_level[l].macc << "%\n";
    }
  } else {
    std::cout << "mIOU " << 100.0 * r.miou << "%  cIOU " << 100.0 * r.ciou << "%  random-labeler mIOU "
              << 100.0 * r.random_miou << "%  CDx1000 " << std::setprecision(4) << r.cd_x1000 << "  (n=" << r.samples
              << ")\n";
  }
}

int run_gen_corpus(int classes, std::size_t per_class, std::uint64_t seed, const std::string& out_dir,
                   const std::string& format, std::size_t points) {
  const auto split = corpus::gen_split(classes, per_class, seed);
  ensure_dir(out_dir);
  std::vector<corpus::ManifestRow> rows;
  auto emit = [&](const std::vector<corpus::ShapeSpec>& specs, const std::string& name) {
    for (const auto& spec : specs) {
      std::ostringstream file;
      file << corpus::class_name(spec.class_id) << '_' << std::hex << std::setw(16) << std::setfill('0')
           << spec.rng_seed << '.' << format;
      const fs::path path = fs::path(out_dir) / file.str();
      const auto cloud = corpus::gen_shape(spec, points);
      if (format == "ply") corpus::save_ply(path, cloud);
      else corpus::save_xyz(path, cloud);
      rows.push_back({spec, name, file.str()});
    }
  };
  emit(split.train, "train");
  emit(split.test, "test");
  corpus::write_manifest(fs::path(out_dir) / "manifest.csv", rows);
  std::cout << "wrote " << rows.size() << " clouds and manifest.csv to " << out_dir << '\n';
  return kOk;
}

int run_scatter(const std::string& in, std::size_t seeds, std::size_t neighbors, std::size_t views,
                std::uint64_t rng_seed, const std::string& out_dir) {
  const auto dense = corpus::load_cloud(in, corpus::format_from_path(in));
  scatter::ScatterConfig cfg{seeds, neighbors, dense.size(), rng_seed};
  cfg.validate();
  ensure_dir(out_dir);
  const auto clouds = scatter::multi_view(dense, cfg, views);
  for (std::size_t v = 0; v < clouds.size(); ++v) {
    const fs::path path = fs::path(out_dir) / ("view_" + std::to_string(v) + (dense.has_labels() ? ".ply" : ".xyz"));
    if (dense.has_labels()) corpus::save_ply(path, clouds[v]);
    else corpus::save_xyz(path, clouds[v]);
  }
  std::cout << "wrote " << clouds.size() << " views of " << cfg.output_size() << " points to " << out_dir << '\n';
  return kOk;
}

int run_train(const config::Config& cfg, const std::string& out_dir, bool two_stage) {
  print_effective(cfg);
  const auto mc = cfg.model();
  const auto tc = cfg.train();
  const auto data = build_dataset(cfg, true);
  ensure_dir(out_dir);
  trainer::Model model(mc, tc.seed);
  const auto result = two_stage ? trainer::train_two_stage(model, data, tc) : trainer::train(model, data, tc);
  auto ckpt = checkpoint::capture(model.params(), {{"config", dump(cfg)}});
  checkpoint::save(fs::path(out_dir) / "model.ckpt", ckpt);
  auto steps = open_out(fs::path(out_dir) / "steps.csv");
  trainer::write_steps_csv(steps, result.steps);
  auto epochs = open_out(fs::path(out_dir) / "epochs.csv");
  trainer::write_traces_csv(epochs, result.traces);
  std::cout << "checkpoint " << (fs::path(out_dir) / "model.ckpt").string() << " hash " << result.checkpoint_hash
            << '\n';
  print_report(trainer::evaluate(model, data.test, data.classes, tc.mode), tc.mode);
  return kOk;
}

int run_eval(const std::string& ckpt_path, const ConfigArgs& args) {
  const auto ckpt = checkpoint::load(ckpt_path);
  config::Config cfg;
  if (auto it = ckpt.meta.find("config"); it != ckpt.meta.end()) {
    std::istringstream in(it->second);
    cfg = config::Config::parse(in);
  }
  if (!args.file.empty()) cfg = resolve(args);
  for (const auto& o : args.overrides) cfg.apply_override(o);
  print_effective(cfg);
  const auto tc = cfg.train();
  trainer::Model model(cfg.model(), tc.seed);
  checkpoint::restore(ckpt, model.params());
  const auto data = build_dataset(cfg, false);
  print_report(trainer::evaluate(model, data.test, data.classes, tc.mode), tc.mode);
  return kOk;
}

int run_ablate(const config::Config& cfg, const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
  print_effective(cfg);
  const auto data = build_dataset(cfg, true);
  ensure_dir(out_dir);
  const auto rows = trainer::ablate(
      {trainer::Suite::baseline, trainer::Suite::dsn, trainer::Suite::scl, trainer::Suite::full_hsd}, seeds, data,
      cfg.model(), cfg.train());
  auto out = open_out(fs::path(out_dir) / "ablation.csv");
  trainer::write_ablation_csv(out, rows);
  trainer::write_ablation_csv(std::cout, rows);
  return kOk;
}

int run_info_plane(const config::Config& cfg, const std::string& out_dir) {
  print_effective(cfg);
  auto tc = cfg.train();
  if (tc.eval_every == 0) tc.eval_every = 1;
  const auto data = build_dataset(cfg, true);
  ensure_dir(out_dir);
  trainer::Model model(cfg.model(), tc.seed);
  const auto result = trainer::train(model, data, tc);
  auto plane = open_out(fs::path(out_dir) / "info_plane.csv");
  plane << "epoch,level,I_XZ,I_YZ\n" << std::setprecision(17);
  auto gap = open_out(fs::path(out_dir) / "kl_gap.csv");
  gap << "epoch,level,kl_gap_to_teacher\n" << std::setprecision(17);
  for (const auto& t : result.traces) {
    plane << t.epoch << ',' << t.level << ',' << t.i_xz << ',' << t.i_yz << '\n';
    gap << t.epoch << ',' << t.level << ',' << t.kl_gap_to_teacher << '\n';
  }
  auto levels = open_out(fs::path(out_dir) / "level_metrics.csv");
  trainer::write_level_metrics_csv(levels, result.level_metrics);
  std::cout << "wrote info_plane.csv, kl_gap.csv, level_metrics.csv to " << out_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattered point cloud reconstruction + hierarchical self-distillation"};
  app.require_subcommand(1);

  int classes = 8;
  std::size_t per_class = 10, points = corpus::kDenseSourceSize;
  std::uint64_t seed = 0;
  std::string out = ".", format = "xyz";
  auto* gen = app.add_subcommand("gen-corpus", "write procedural clouds and a manifest");
  gen->add_option("--classes", classes, "number of shape classes (1-8)");
  gen->add_option("--per-class", per_class, "instances per class");
  gen->add_option("--seed", seed, "corpus seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--format", format, "xyz or ply")->check(CLI::IsMember({"xyz", "ply"}));
  gen->add_option("--points", points, "points per cloud");

  std::string in;
  std::size_t seeds = 32, neighbors = 16, views = 8;
  auto* sc = app.add_subcommand("scatter", "scatter-sample a dense cloud into sparse views");
  sc->add_option("--in", in, "dense cloud (.xyz, .ply, .off)")->required();
  sc->add_option("--seeds", seeds, "FPS centroids");
  sc->add_option("--neighbors", neighbors, "points per patch");
  sc->add_option("--views", views, "number of views");
  sc->add_option("--seed", seed, "sampling seed");
  sc->add_option("--out", out, "output directory")->required();

  ConfigArgs train_args;
  std::optional<double> gamma;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> train_seed;
  std::string objective;
  bool two_stage = false;
  auto* tr = app.add_subcommand("train", "joint training; writes checkpoint and logs");
  add_config_flags(tr, train_args);
  tr->add_option("--gamma", gamma, "CE/KL balance (1.0 gives deep supervision)");
  tr->add_option("--epochs", epochs, "epochs");
  tr->add_option("--seed", train_seed, "training seed");
  tr->add_option("--objective", objective, "baseline, dsn or hsd");
  tr->add_flag("--two-stage", two_stage, "train upstream then downstream separately");
  tr->add_option("--out", out, "output directory");

  ConfigArgs eval_args;
  std::string ckpt;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  ev->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  add_config_flags(ev, eval_args);

  ConfigArgs ablate_args;
  std::vector<std::uint64_t> ablate_seeds{0, 1, 2};
  auto* ab = app.add_subcommand("ablate", "baseline / dsn / scl / full_hsd over several seeds");
  add_config_flags(ab, ablate_args);
  ab->add_option("--seeds", ablate_seeds, "training seeds")->delimiter(',');
  ab->add_option("--out", out, "output directory");

  ConfigArgs ip_args;
  auto* ip = app.add_subcommand("info-plane", "per-epoch MI, KL-gap and per-level metric CSVs");
  add_config_flags(ip, ip_args);
  ip->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return run_gen_corpus(classes, per_class, seed, out, format, points);
    if (*sc) return run_scatter(in, seeds, neighbors, views, seed, out);
    if (*tr) {
      std::vector<std::string> extra;
      if (gamma) extra.push_back("train.gamma=" + std::to_string(*gamma));
      if (epochs) extra.push_back("train.epochs=" + std::to_string(*epochs));
      if (train_seed) extra.push_back("train.seed=" + std::to_string(*train_seed));
      if (!objective.empty()) extra.push_back("train.objective=" + objective);
      return run_train(resolve(train_args, extra), out, two_stage);
    }
    if (*ev) return run_eval(ckpt, eval_args);
    if (*ab) return run_ablate(resolve(ablate_args), ablate_seeds, out);
    if (*ip) return run_info_plane(resolve(ip_args), out);
  } catch (const NumericsError& e) {
    std::cerr << "numerics error: " << e.what() << '\n';
    return kNumerics;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
