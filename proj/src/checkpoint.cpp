#include "egs/checkpoint.hpp"

#include <fstream>

#include "egs/error.hpp"
#include "egs/text.hpp"

namespace egs {

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << "EGS-CKPT v1\n";
  for (const auto& e : store.entries()) {
    out << "PARAM " << e.name << " " << e.value.shape.size();
    for (std::size_t d : e.value.shape) out << " " << d;
    out << "\n";
    const std::size_t cols = e.value.cols();
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      out << format_double(e.value.data[i]);
      out << (((i + 1) % cols == 0) ? '\n' : ' ');
    }
  }
  out << "META\n";
  out << "step " << meta.step << "\n";
  out << "seed " << meta.seed << "\n";
  out << "config_hash " << meta.config_hash << "\n";
  for (const auto& [k, v] : meta.extra) out << k << " " << v << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("checkpoint " + path.string() + ":" + std::to_string(line_no) +
                      ": " + msg);
  };

  if (!next_line() || line != "EGS-CKPT v1") throw fail("expected 'EGS-CKPT v1' header");

  CheckpointMeta meta;
  bool in_meta = false;
  while (next_line()) {
    if (line.empty()) continue;
    if (!in_meta && line == "META") {
      in_meta = true;
      continue;
    }
    if (in_meta) {
      auto tok = split_ws(line);
      if (tok.size() < 2) throw fail("META entries need '<key> <value>'");
      const std::string key(tok[0]);
      std::string value(line.substr(line.find(' ') + 1));
      if (key == "step") {
        meta.step = parse_u64(value, "step");
      } else if (key == "seed") {
        meta.seed = parse_u64(value, "seed");
      } else if (key == "config_hash") {
        meta.config_hash = value;
      } else {
        meta.extra[key] = value;
      }
      continue;
    }
    auto tok = split_ws(line);
    if (tok.size() < 3 || tok[0] != "PARAM") throw fail("expected PARAM or META");
    const std::string name(tok[1]);
    const std::size_t ndim = static_cast<std::size_t>(parse_u64(tok[2], "ndim"));
    if (tok.size() != 3 + ndim) throw fail("PARAM dims count mismatch");
    std::vector<std::size_t> shape;
    std::size_t numel = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
      shape.push_back(static_cast<std::size_t>(parse_u64(tok[3 + d], "dim")));
      numel *= shape.back();
    }
    Tensor& dst = store.has(name) ? store.value(name) : store.create(name, shape);
    if (dst.shape != shape) {
      throw FormatError("checkpoint " + path.string() + ": parameter " + name +
                        " has shape " + dst.shape_str() + " in the store");
    }
    std::size_t got = 0;
    while (got < numel) {
      if (!next_line()) {
        throw FormatError("checkpoint " + path.string() + ": parameter " + name +
                          " declares " + std::to_string(numel) + " values but the file " +
                          "ends after " + std::to_string(got));
      }
      for (auto sv : split_ws(line)) {
        if (got >= numel) throw fail("too many values for parameter " + name);
        dst.data[got++] = parse_double(sv, name);
      }
    }
  }
  if (!in_meta) throw FormatError("checkpoint " + path.string() + ": missing META block");
  store.set_step(meta.step);
  return meta;
}

}  // namespace egs
