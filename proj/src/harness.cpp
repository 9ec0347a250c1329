#include "egs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "egs/error.hpp"
#include "egs/metrics.hpp"
#include "egs/text.hpp"

namespace egs {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<std::uint32_t> random_subset(std::size_t pool_size, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> all(pool_size);
  for (std::uint32_t i = 0; i < pool_size; ++i) all[i] = i;
  // Partial Fisher-Yates: the first k entries are a uniform sample.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool_size - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

struct RecordKey {
  std::string scene;
  std::uint32_t frame;
  int budget;
  auto operator<=>(const RecordKey&) const = default;
};

}  // namespace

std::vector<PreparedScene> load_scenes(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("scene directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".scene") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .scene files under " + dir.string());

  std::vector<PreparedScene> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) {
    PreparedScene s;
    s.scene_id = f.stem().string();
    s.frames = read_scene(f);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::vector<FrameRecord> eval_fast(PolicyNet& policy, const RunConfig& cfg,
                                   Environment& env,
                                   const std::vector<PreparedScene>& scenes,
                                   const std::vector<int>& budgets, std::uint64_t seed) {
  const BudgetSet budget_set = cfg.budget_set();
  for (int b : budgets) {
    if (!budget_set.index_of(b)) {
      throw ArgumentError("eval: budget " + std::to_string(b) +
                          " is not in the configured budget set");
    }
  }
  const bool model_time = cfg.reward.runtime_source == RuntimeSource::kModel;

  std::vector<FrameRecord> records;
  const std::vector<PreparedFrame> frames = Trainer::prepare(scenes, cfg.pool);
  for (const PreparedFrame& pf : frames) {
    if (pf.pool.size() < static_cast<std::size_t>(budget_set.min())) continue;

    const double sampler_t0 = now_seconds();
    const PolicyOutput out = policy.evaluate(pf.descriptors);
    const double policy_seconds = now_seconds() - sampler_t0;
    const Image& full = env.full_render(pf.scene_id, *pf.frame);
    const std::vector<Vec3> centers = pf.pool.centers();

    for (int budget : budgets) {
      const auto k_eff =
          std::min<std::size_t>(static_cast<std::size_t>(budget), pf.pool.size());

      struct MethodRun {
        const char* name;
        std::vector<std::uint32_t> subset;  // pool positions
        double sampler_seconds;
      };
      std::vector<MethodRun> runs;

      {
        double t0 = now_seconds();
        AnchorAction action = infer_action(out, pf.pool.size(), budget_set, budget);
        runs.push_back({"rl", std::move(action.subset), policy_seconds + (now_seconds() - t0)});
      }
      {
        double t0 = now_seconds();
        std::vector<std::uint32_t> sel = fps(centers, k_eff);
        std::sort(sel.begin(), sel.end());
        runs.push_back({"fps", std::move(sel), now_seconds() - t0});
      }
      {
        Rng rng = Rng(seed).fork(fnv1a64(pf.scene_id) ^ (pf.frame->index * 0x9e37ULL) ^
                                 static_cast<std::uint64_t>(budget));
        double t0 = now_seconds();
        runs.push_back({"random", random_subset(pf.pool.size(), k_eff, rng),
                        now_seconds() - t0});
      }

      for (MethodRun& run : runs) {
        std::vector<std::uint32_t> frame_idx;
        frame_idx.reserve(run.subset.size());
        for (std::uint32_t p : run.subset) {
          frame_idx.push_back(pf.pool.candidates[p].original);
        }
        const double render_t0 = now_seconds();
        const Image img = render_indices(*pf.frame, frame_idx, env.view());
        const double render_seconds = now_seconds() - render_t0;

        FrameRecord rec;
        rec.scene_id = pf.scene_id;
        rec.frame = pf.frame->index;
        rec.method = run.name;
        rec.budget = budget;
        rec.psnr_db = psnr(img, full);
        rec.dssim_val = dssim(img, full);
        rec.t_frame = env.runtime_seconds(static_cast<int>(k_eff),
                                          run.sampler_seconds + render_seconds);
        rec.sampler_ms = model_time
                             ? 1000.0 * cfg.reward.time_model_b * static_cast<double>(k_eff)
                             : 1000.0 * run.sampler_seconds;
        records.push_back(std::move(rec));
      }
    }
  }
  std::sort(records.begin(), records.end(), [](const FrameRecord& a, const FrameRecord& b) {
    return std::tie(a.scene_id, a.frame, a.budget, a.method) <
           std::tie(b.scene_id, b.frame, b.budget, b.method);
  });
  return records;
}

std::vector<BudgetComparison> compare_same_budget(
    const std::vector<FrameRecord>& records) {
  std::map<RecordKey, const FrameRecord*> rl, fps_recs;
  std::set<int> budgets;
  for (const FrameRecord& r : records) {
    const RecordKey key{r.scene_id, r.frame, r.budget};
    if (r.method == "rl") rl[key] = &r;
    if (r.method == "fps") fps_recs[key] = &r;
    budgets.insert(r.budget);
  }

  std::map<int, BudgetComparison> by_budget;
  for (const auto& [key, rl_rec] : rl) {
    const auto it = fps_recs.find(key);
    if (it == fps_recs.end()) {
      throw AggregationError("compare: missing fps record for scene=" + key.scene +
                             " frame=" + std::to_string(key.frame) + " budget=" +
                             std::to_string(key.budget));
    }
    BudgetComparison& c = by_budget[key.budget];
    c.budget = key.budget;
    c.pairs += 1;
    const double delta = rl_rec->psnr_db - it->second->psnr_db;
    c.mean_delta_psnr += delta;
    if (delta > 0.0) c.wins += 1;
    if (delta == 0.0) c.ties += 1;
  }
  for (const auto& [key, fps_rec] : fps_recs) {
    if (!rl.count(key)) {
      throw AggregationError("compare: missing rl record for scene=" + key.scene +
                             " frame=" + std::to_string(key.frame) + " budget=" +
                             std::to_string(key.budget));
    }
  }

  std::map<int, std::pair<double, double>> time_sums;  // budget -> (fps, rl)
  for (const auto& [key, rec] : fps_recs) time_sums[key.budget].first += rec->t_frame;
  for (const auto& [key, rec] : rl) time_sums[key.budget].second += rec->t_frame;

  std::vector<BudgetComparison> out;
  for (auto& [budget, c] : by_budget) {
    c.mean_delta_psnr /= static_cast<double>(c.pairs);
    const auto& [t_fps, t_rl] = time_sums[budget];
    c.runtime_ratio = t_rl > 0.0 ? t_fps / t_rl : 0.0;
    out.push_back(c);
  }
  return out;
}

std::vector<FrontierRow> frontier_sweep(const std::vector<FrameRecord>& records,
                                        const BudgetSet& budgets) {
  const int ref_budget = budgets.max();
  std::map<int, std::pair<double, std::size_t>> rl_psnr, fps_psnr;
  std::map<int, double> rl_time, fps_time;
  for (const FrameRecord& r : records) {
    if (r.method == "rl") {
      rl_psnr[r.budget].first += r.psnr_db;
      rl_psnr[r.budget].second += 1;
      rl_time[r.budget] += r.t_frame;
    } else if (r.method == "fps") {
      fps_psnr[r.budget].first += r.psnr_db;
      fps_psnr[r.budget].second += 1;
      fps_time[r.budget] += r.t_frame;
    }
  }
  if (!fps_psnr.count(ref_budget)) {
    throw AggregationError("frontier: no fps records at the reference budget " +
                           std::to_string(ref_budget));
  }
  const double ref_mean_psnr =
      fps_psnr[ref_budget].first / static_cast<double>(fps_psnr[ref_budget].second);
  const double ref_mean_time =
      fps_time[ref_budget] / static_cast<double>(fps_psnr[ref_budget].second);

  std::vector<FrontierRow> rows;
  for (const auto& [budget, acc] : rl_psnr) {
    if (!fps_psnr.count(budget)) {
      throw AggregationError("frontier: missing fps records at budget " +
                             std::to_string(budget));
    }
    const double n = static_cast<double>(acc.second);
    const double mean_rl = acc.first / n;
    const double mean_fps =
        fps_psnr[budget].first / static_cast<double>(fps_psnr[budget].second);
    FrontierRow row;
    row.budget = budget;
    row.dp_fps = mean_rl - mean_fps;
    row.dp_ref = mean_rl - ref_mean_psnr;
    const double mean_rl_time = rl_time[budget] / n;
    const double mean_fps_time =
        fps_time[budget] / static_cast<double>(fps_psnr[budget].second);
    row.rt_vs_fps = mean_fps_time / mean_rl_time;
    row.rt_vs_ref = ref_mean_time / mean_rl_time;
    rows.push_back(row);
  }
  return rows;
}

VariantRow summarize_variant(TrainStage stage, const std::vector<TraceRow>& trace,
                             const BudgetSet& budgets) {
  VariantRow row;
  row.stage = stage;
  if (trace.empty()) {
    row.applicable = false;
    row.tail_budget = static_cast<double>(budgets.max());
    row.note = "no bandit steps; effective budget is max(B)";
    return row;
  }
  std::size_t window = kTailWindow;
  if (trace.size() < window) {
    window = trace.size();
    row.note = "trace shorter than the tail window; averaged the whole trace";
  }
  row.window = window;
  for (std::size_t i = trace.size() - window; i < trace.size(); ++i) {
    const TraceRow& r = trace[i];
    row.tail_budget += r.kappa;
    row.tail_dpsnr += r.psnr_rl - r.psnr_tgt;
    row.tail_speed += r.t_rl > 0.0 ? r.t_ref / r.t_rl : 0.0;
    row.tail_reward += r.reward;
  }
  const double n = static_cast<double>(window);
  row.tail_budget /= n;
  row.tail_dpsnr /= n;
  row.tail_speed /= n;
  row.tail_reward /= n;
  return row;
}

std::vector<VariantRow> ablate_variants(const RunConfig& base,
                                        const std::vector<TrainStage>& stages,
                                        const std::vector<PreparedScene>& scenes) {
  std::vector<VariantRow> rows;
  for (TrainStage stage : stages) {
    RunConfig cfg = base;
    cfg.trainer.stage = stage;
    PolicyNet policy(cfg.policy, cfg.budgets.size(), cfg.trainer.seed);
    // All variants share one camera spanning every scene.
    std::vector<Frame> all_frames;
    for (const auto& s : scenes) {
      all_frames.insert(all_frames.end(), s.frames.begin(), s.frames.end());
    }
    Environment env(cfg.reward, RenderView{scene_bounds(all_frames), cfg.image_width,
                                           cfg.image_height});
    Trainer trainer(cfg, policy, env);
    const TrainResult result = trainer.train(scenes);
    rows.push_back(summarize_variant(stage, result.bandit.trace, cfg.budget_set()));
  }
  return rows;
}

void write_records_csv(const std::vector<FrameRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open records csv for writing: " + path.string());
  out << "scene,frame,method,budget,psnr,dssim,t_frame,sampler_ms\n";
  for (const FrameRecord& r : records) {
    out << r.scene_id << ',' << r.frame << ',' << r.method << ',' << r.budget << ','
        << format_double(r.psnr_db) << ',' << format_double(r.dssim_val) << ','
        << format_double(r.t_frame) << ',' << format_double(r.sampler_ms) << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<FrameRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open records csv: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("records " + path.string() + ": empty");
  std::vector<FrameRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw ParseError("records " + path.string() + ":" + std::to_string(line_no) +
                       ": expected 8 columns");
    }
    FrameRecord r;
    r.scene_id = cells[0];
    r.frame = static_cast<std::uint32_t>(parse_u64(cells[1], "frame"));
    r.method = cells[2];
    r.budget = static_cast<int>(parse_int(cells[3], "budget"));
    r.psnr_db = parse_double(cells[4], "psnr");
    r.dssim_val = parse_double(cells[5], "dssim");
    r.t_frame = parse_double(cells[6], "t_frame");
    r.sampler_ms = parse_double(cells[7], "sampler_ms");
    records.push_back(std::move(r));
  }
  return records;
}

void write_compare_csv(const std::vector<BudgetComparison>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open compare csv for writing: " + path.string());
  out << "budget,pairs,wins,ties,mean_dpsnr,runtime_ratio_fps_over_rl\n";
  for (const BudgetComparison& c : rows) {
    out << c.budget << ',' << c.pairs << ',' << c.wins << ',' << c.ties << ','
        << format_double(c.mean_delta_psnr) << ',' << format_double(c.runtime_ratio)
        << "\n";
  }
}

void write_frontier_csv(const std::vector<FrontierRow>& rows,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open frontier csv for writing: " + path.string());
  out << "budget,dpsnr_vs_fps,dpsnr_vs_ref,rt_vs_fps,rt_vs_ref\n";
  for (const FrontierRow& r : rows) {
    out << r.budget << ',' << format_double(r.dp_fps) << ',' << format_double(r.dp_ref)
        << ',' << format_double(r.rt_vs_fps) << ',' << format_double(r.rt_vs_ref)
        << "\n";
  }
}

void write_variants_csv(const std::vector<VariantRow>& rows,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open variants csv for writing: " + path.string());
  out << "variant,tail_budget,tail_dpsnr,tail_speed,tail_reward,window,note\n";
  for (const VariantRow& r : rows) {
    out << to_string(r.stage) << ',' << format_double(r.tail_budget) << ',';
    if (r.applicable) {
      out << format_double(r.tail_dpsnr) << ',' << format_double(r.tail_speed) << ','
          << format_double(r.tail_reward);
    } else {
      out << "na,na,na";
    }
    out << ',' << r.window << ',' << r.note << "\n";
  }
}

void emit_report(const std::vector<FrameRecord>& records,
                 const std::vector<FrontierRow>& frontier,
                 const std::vector<TraceRow>& trace,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (!records.empty()) write_records_csv(records, out_dir / "records.csv");
  if (!frontier.empty()) write_frontier_csv(frontier, out_dir / "frontier.csv");

  if (!trace.empty()) {
    std::ofstream kappa(out_dir / "curve_kappa.csv", std::ios::binary);
    kappa << "step,kappa\n";
    std::ofstream reward(out_dir / "curve_reward.csv", std::ios::binary);
    reward << "step,reward,ema_baseline\n";
    std::ofstream dpsnr(out_dir / "curve_dpsnr.csv", std::ios::binary);
    dpsnr << "step,dpsnr\n";
    for (const TraceRow& r : trace) {
      kappa << r.step << ',' << r.kappa << "\n";
      reward << r.step << ',' << format_double(r.reward) << ','
             << format_double(r.ema_baseline) << "\n";
      dpsnr << r.step << ',' << format_double(r.psnr_rl - r.psnr_tgt) << "\n";
    }
  }

  nlohmann::json summary;
  summary["record_count"] = records.size();
  summary["trace_steps"] = trace.size();
  if (!records.empty()) {
    std::map<std::string, std::map<int, std::pair<double, std::size_t>>> agg;
    for (const FrameRecord& r : records) {
      auto& cell = agg[r.method][r.budget];
      cell.first += r.psnr_db;
      cell.second += 1;
    }
    nlohmann::json by_method;
    for (const auto& [method, per_budget] : agg) {
      nlohmann::json m;
      for (const auto& [budget, acc] : per_budget) {
        m[std::to_string(budget)] = acc.first / static_cast<double>(acc.second);
      }
      by_method[method] = m;
    }
    summary["mean_psnr"] = by_method;
  }
  if (!frontier.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const FrontierRow& r : frontier) {
      rows.push_back({{"budget", r.budget},
                      {"dpsnr_vs_fps", r.dp_fps},
                      {"dpsnr_vs_ref", r.dp_ref},
                      {"rt_vs_fps", r.rt_vs_fps},
                      {"rt_vs_ref", r.rt_vs_ref}});
    }
    summary["frontier"] = rows;
  }
  std::ofstream js(out_dir / "summary.json", std::ios::binary);
  if (!js) throw IoError("cannot open summary.json for writing");
  js << summary.dump(2) << "\n";
}

TrainArtifacts run_training(const RunConfig& cfg,
                            const std::vector<PreparedScene>& scenes,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<Frame> all_frames;
  for (const auto& s : scenes) {
    all_frames.insert(all_frames.end(), s.frames.begin(), s.frames.end());
  }
  Environment env(cfg.reward,
                  RenderView{scene_bounds(all_frames), cfg.image_width, cfg.image_height});
  PolicyNet policy(cfg.policy, cfg.budgets.size(), cfg.trainer.seed);
  Trainer trainer(cfg, policy, env);
  TrainResult result = trainer.train(scenes);

  TrainArtifacts artifacts;
  artifacts.checkpoint = out_dir / "checkpoint.ckpt";
  artifacts.trace = out_dir / "trace.csv";

  CheckpointMeta meta;
  meta.step = policy.store().step();
  meta.seed = cfg.trainer.seed;
  meta.config_hash = cfg.hash_hex();
  {
    std::istringstream cfg_lines(cfg.serialize());
    std::string line;
    while (std::getline(cfg_lines, line)) {
      const auto eq = line.find(" = ");
      meta.extra["cfg." + line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  save_checkpoint(artifacts.checkpoint, policy.store(), meta);
  write_trace(result.bandit.trace, artifacts.trace);
  artifacts.result = std::move(result);
  return artifacts;
}

LoadedPolicy load_policy(const std::filesystem::path& checkpoint_path) {
  ParameterStore probe;
  const CheckpointMeta meta = load_checkpoint(checkpoint_path, probe);

  std::string cfg_text;
  for (const auto& [key, value] : meta.extra) {
    if (key.rfind("cfg.", 0) == 0) {
      cfg_text += key.substr(4) + " = " + value + "\n";
    }
  }
  if (cfg_text.empty()) {
    throw FormatError("checkpoint " + checkpoint_path.string() +
                      ": META carries no cfg.* entries");
  }
  RunConfig cfg = RunConfig::from_text(cfg_text, checkpoint_path.string() + "(META)");

  LoadedPolicy loaded{cfg, PolicyNet(cfg.policy, cfg.budgets.size(), cfg.trainer.seed),
                      meta};
  ParameterStore& store = loaded.policy.store();
  for (const auto& e : probe.entries()) {
    Tensor& dst = store.value(e.name);
    if (dst.shape != e.value.shape) {
      throw FormatError("checkpoint " + checkpoint_path.string() + ": parameter " +
                        e.name + " shape mismatch against the META config");
    }
    dst = e.value;
  }
  store.set_step(meta.step);
  return loaded;
}

}  // namespace egs
