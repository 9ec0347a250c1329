#include "egs/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "egs/error.hpp"
#include "egs/rng.hpp"
#include "egs/text.hpp"

namespace egs {

std::string to_string(TrainStage s) {
  switch (s) {
    case TrainStage::kSft: return "sft";
    case TrainStage::kRl: return "rl";
    default: return "sft+rl";
  }
}

TrainStage train_stage_from_string(const std::string& s) {
  if (s == "sft") return TrainStage::kSft;
  if (s == "rl") return TrainStage::kRl;
  if (s == "sft+rl") return TrainStage::kSftRl;
  throw ValidationError("stage must be one of sft|rl|sft+rl, got '" + s + "'");
}

void TrainerConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("trainer config: lr must be > 0");
  if (weight_decay < 0.0) throw ValidationError("trainer config: weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("trainer config: betas must lie in [0, 1)");
  }
  if (sft_epochs < 0) throw ValidationError("trainer config: sft_epochs must be >= 0");
  if (rl_steps < 0) throw ValidationError("trainer config: rl_steps must be >= 0");
  if (!(ema_momentum >= 0.0 && ema_momentum < 1.0)) {
    throw ValidationError("trainer config: ema_momentum must lie in [0, 1)");
  }
  if (entropy_weight < 0.0) {
    throw ValidationError("trainer config: entropy_weight must be >= 0");
  }
}

void RunConfig::finalize() {
  const BudgetSet b(budgets);
  reward.kappa_max = b.max();
  if (reward.ref_budget <= 0) reward.ref_budget = b.max();
  if (reward.teacher_budget <= 0) reward.teacher_budget = 2 * reward.ref_budget;
}

void RunConfig::validate() const {
  trainer.validate();
  reward.validate();
  BudgetSet check(budgets);
  if (reward.kappa_max != check.max()) {
    throw ValidationError("config: kappa_max must equal max(budgets); call finalize()");
  }
  if (image_width < 1 || image_height < 1) {
    throw ValidationError("config: image dimensions must be >= 1");
  }
  if (pool.cap < 1) throw ValidationError("config: pool_cap must be >= 1");
  if (!(pool.initial_voxel > 0.0)) {
    throw ValidationError("config: pool_voxel must be > 0");
  }
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // allow surrounding spaces
    std::size_t b = item.find_first_not_of(" \t");
    std::size_t e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError(what + ": empty list entry");
    out.push_back(static_cast<int>(parse_int(item.substr(b, e - b + 1), what)));
  }
  if (out.empty()) throw ParseError(what + ": empty list");
  return out;
}

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError(what + ": expected true/false, got '" + s + "'");
}

// key -> value lines in file order; duplicate keys are errors.
std::vector<std::pair<std::string, std::string>> parse_kv_text(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    for (const auto& [k, v] : out) {
      if (k == key) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                         key + "'");
      }
    }
    out.emplace_back(key, value);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "stage = " << to_string(trainer.stage) << "\n";
  out << "lr = " << format_double(trainer.lr) << "\n";
  out << "weight_decay = " << format_double(trainer.weight_decay) << "\n";
  out << "beta1 = " << format_double(trainer.beta1) << "\n";
  out << "beta2 = " << format_double(trainer.beta2) << "\n";
  out << "grad_clip = " << format_double(trainer.grad_clip) << "\n";
  out << "sft_epochs = " << trainer.sft_epochs << "\n";
  out << "rl_steps = " << trainer.rl_steps << "\n";
  out << "ema_momentum = " << format_double(trainer.ema_momentum) << "\n";
  out << "entropy_weight = " << format_double(trainer.entropy_weight) << "\n";
  out << "entropy_anneal = " << (trainer.entropy_anneal ? "true" : "false") << "\n";
  out << "train_dropout = " << (trainer.train_dropout ? "true" : "false") << "\n";
  out << "seed = " << trainer.seed << "\n";
  out << "budgets = " << join_ints(budgets) << "\n";
  out << "lambda_kappa = " << format_double(reward.lambda_kappa) << "\n";
  out << "lambda_time = " << format_double(reward.lambda_time) << "\n";
  out << "lambda_violation = " << format_double(reward.lambda_violation) << "\n";
  out << "lambda_gain = " << format_double(reward.lambda_gain) << "\n";
  out << "delta_db = " << format_double(reward.delta_db) << "\n";
  out << "eta = " << format_double(reward.eta) << "\n";
  out << "ref_budget = " << reward.ref_budget << "\n";
  out << "teacher_budget = " << reward.teacher_budget << "\n";
  out << "runtime_source = " << to_string(reward.runtime_source) << "\n";
  out << "time_model_a = " << format_double(reward.time_model_a) << "\n";
  out << "time_model_b = " << format_double(reward.time_model_b) << "\n";
  out << "embed_dim = " << policy.embed_dim << "\n";
  out << "heads = " << policy.heads << "\n";
  out << "enc_layers = " << policy.layers << "\n";
  out << "ff_dim = " << policy.ff_dim << "\n";
  out << "dropout = " << format_double(policy.dropout) << "\n";
  out << "pool_cap = " << pool.cap << "\n";
  out << "pool_voxel = " << format_double(pool.initial_voxel) << "\n";
  out << "image_width = " << image_width << "\n";
  out << "image_height = " << image_height << "\n";
  return out.str();
}

std::string RunConfig::hash_hex() const {
  const std::uint64_t h = fnv1a64(serialize());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.reward.ref_budget = 0;      // 0 = derive from budgets in finalize()
  cfg.reward.teacher_budget = 0;
  for (const auto& [key, value] : parse_kv_text(text, origin)) {
    if (key == "stage") cfg.trainer.stage = train_stage_from_string(value);
    else if (key == "lr") cfg.trainer.lr = parse_double(value, key);
    else if (key == "weight_decay") cfg.trainer.weight_decay = parse_double(value, key);
    else if (key == "beta1") cfg.trainer.beta1 = parse_double(value, key);
    else if (key == "beta2") cfg.trainer.beta2 = parse_double(value, key);
    else if (key == "grad_clip") cfg.trainer.grad_clip = parse_double(value, key);
    else if (key == "sft_epochs") cfg.trainer.sft_epochs = static_cast<int>(parse_int(value, key));
    else if (key == "rl_steps") cfg.trainer.rl_steps = static_cast<int>(parse_int(value, key));
    else if (key == "ema_momentum") cfg.trainer.ema_momentum = parse_double(value, key);
    else if (key == "entropy_weight") cfg.trainer.entropy_weight = parse_double(value, key);
    else if (key == "entropy_anneal") cfg.trainer.entropy_anneal = parse_bool(value, key);
    else if (key == "train_dropout") cfg.trainer.train_dropout = parse_bool(value, key);
    else if (key == "seed") cfg.trainer.seed = parse_u64(value, key);
    else if (key == "budgets") cfg.budgets = parse_int_list(value, key);
    else if (key == "lambda_kappa") cfg.reward.lambda_kappa = parse_double(value, key);
    else if (key == "lambda_time") cfg.reward.lambda_time = parse_double(value, key);
    else if (key == "lambda_violation") cfg.reward.lambda_violation = parse_double(value, key);
    else if (key == "lambda_gain") cfg.reward.lambda_gain = parse_double(value, key);
    else if (key == "delta_db") cfg.reward.delta_db = parse_double(value, key);
    else if (key == "eta") cfg.reward.eta = parse_double(value, key);
    else if (key == "ref_budget") cfg.reward.ref_budget = static_cast<int>(parse_int(value, key));
    else if (key == "teacher_budget") cfg.reward.teacher_budget = static_cast<int>(parse_int(value, key));
    else if (key == "runtime_source") cfg.reward.runtime_source = runtime_source_from_string(value);
    else if (key == "time_model_a") cfg.reward.time_model_a = parse_double(value, key);
    else if (key == "time_model_b") cfg.reward.time_model_b = parse_double(value, key);
    else if (key == "embed_dim") cfg.policy.embed_dim = static_cast<int>(parse_int(value, key));
    else if (key == "heads") cfg.policy.heads = static_cast<int>(parse_int(value, key));
    else if (key == "enc_layers") cfg.policy.layers = static_cast<int>(parse_int(value, key));
    else if (key == "ff_dim") cfg.policy.ff_dim = static_cast<int>(parse_int(value, key));
    else if (key == "dropout") cfg.policy.dropout = parse_double(value, key);
    else if (key == "pool_cap") cfg.pool.cap = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "pool_voxel") cfg.pool.initial_voxel = parse_double(value, key);
    else if (key == "image_width") cfg.image_width = static_cast<int>(parse_int(value, key));
    else if (key == "image_height") cfg.image_height = static_cast<int>(parse_int(value, key));
    else throw ValidationError(origin + ": unknown config key '" + key + "'");
  }
  cfg.finalize();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_text(read_file(path), path.string());
}

SceneGenConfig SceneGenConfig::from_file(const std::filesystem::path& path) {
  SceneGenConfig cfg;
  const std::string origin = path.string();
  auto parse_vec3 = [&](const std::string& value, const std::string& key) {
    const auto tok = split_ws(value);
    if (tok.size() != 3) {
      throw ParseError(origin + ": " + key + " needs 3 space-separated numbers");
    }
    return Vec3{parse_double(tok[0], key), parse_double(tok[1], key),
                parse_double(tok[2], key)};
  };
  for (const auto& [key, value] : parse_kv_text(read_file(path), origin)) {
    if (key == "seed") cfg.spec.seed = parse_u64(value, key);
    else if (key == "num_frames") cfg.spec.num_frames = static_cast<std::uint32_t>(parse_u64(value, key));
    else if (key == "clusters") cfg.spec.clusters = static_cast<std::uint32_t>(parse_u64(value, key));
    else if (key == "primitives_per_cluster") cfg.spec.primitives_per_cluster = static_cast<std::uint32_t>(parse_u64(value, key));
    else if (key == "fraction_salient") cfg.spec.fraction_salient = parse_double(value, key);
    else if (key == "motion_amplitude") cfg.spec.motion_amplitude = parse_double(value, key);
    else if (key == "bbox_min") cfg.spec.bbox.min = parse_vec3(value, key);
    else if (key == "bbox_max") cfg.spec.bbox.max = parse_vec3(value, key);
    else if (key == "scene_count") cfg.scene_count = static_cast<int>(parse_int(value, key));
    else throw ValidationError(origin + ": unknown scene spec key '" + key + "'");
  }
  cfg.spec.validate();
  if (cfg.scene_count < 1) throw ValidationError(origin + ": scene_count must be >= 1");
  return cfg;
}

}  // namespace egs
