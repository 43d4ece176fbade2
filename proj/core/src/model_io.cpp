#include "okl/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace okl {

namespace fs = std::filesystem;

namespace {

void write_factor(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelFormatError("cannot write " + path);
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17e", m(i, j));
      out << (j ? " " : "") << buf;
    }
    out << "\n";
  }
}

Matrix read_factor(const std::string& path, Index rows, Index cols) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("missing factor file " + path);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw ModelFormatError(path + ": truncated factor table");
  return m;
}

}  // namespace

void save_inputs(const std::vector<InputPoint>& inputs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelFormatError("cannot write " + path);
  const bool item_mode = !inputs.empty() && std::holds_alternative<ItemPoint>(inputs.front());
  out << (item_mode ? "item" : "scalar") << "\n";
  char buf[64];
  for (const auto& x : inputs) {
    if (item_mode) {
      const ItemPoint* it = std::get_if<ItemPoint>(&x);
      if (it == nullptr) throw ModelFormatError("save_inputs: mixed input kinds");
      out << it->id;
      for (uint8_t g : it->genres) out << " " << static_cast<int>(g);
      out << "\n";
    } else {
      const double* v = std::get_if<double>(&x);
      if (v == nullptr) throw ModelFormatError("save_inputs: mixed input kinds");
      std::snprintf(buf, sizeof(buf), "%.17g", *v);
      out << buf << "\n";
    }
  }
}

std::vector<InputPoint> load_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("missing inputs file " + path);
  std::string kind;
  if (!(in >> kind) || (kind != "scalar" && kind != "item"))
    throw ModelFormatError(path + ": first line must be 'scalar' or 'item'");
  std::vector<InputPoint> out;
  std::string line;
  std::getline(in, line);  // consume the rest of the header line
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (kind == "scalar") {
      double v = 0.0;
      if (!(ss >> v)) throw ModelFormatError(path + ": malformed scalar input line");
      out.emplace_back(v);
    } else {
      ItemPoint item;
      if (!(ss >> item.id)) throw ModelFormatError(path + ": malformed item input line");
      int flag = 0;
      while (ss >> flag) item.genres.push_back(static_cast<uint8_t>(flag != 0));
      out.emplace_back(std::move(item));
    }
  }
  if (out.empty()) throw ModelFormatError(path + ": no inputs");
  return out;
}

void save_model(const OklModel& model, const std::string& dir) {
  fs::create_directories(dir);
  write_factor(model.factors.A, (fs::path(dir) / "A.txt").string());
  write_factor(model.factors.B, (fs::path(dir) / "B.txt").string());
  save_inputs(model.train_inputs, (fs::path(dir) / "inputs.txt").string());

  std::ofstream meta((fs::path(dir) / "metadata.txt").string());
  if (!meta) throw ModelFormatError("cannot write metadata in " + dir);
  char buf[64];
  meta << "format 1\n";
  meta << "kind " << model_kind_name(model.kind) << "\n";
  std::snprintf(buf, sizeof(buf), "%.17e", model.lambda);
  meta << "lambda " << buf << "\n";
  meta << "p " << model.p << "\n";
  std::snprintf(buf, sizeof(buf), "%.17e", model.jitter);
  meta << "jitter " << buf << "\n";
  meta << "kernel " << kernel_variant_name(model.kernel.variant) << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", model.kernel.decay);
  meta << "decay " << buf << "\n";
  meta << "seed " << model.seed << "\n";
  meta << "rows " << model.factors.A.rows() << "\n";
  meta << "tasks " << model.factors.B.rows() << "\n";
}

OklModel load_model(const std::string& dir) {
  const fs::path meta_path = fs::path(dir) / "metadata.txt";
  std::ifstream meta(meta_path.string());
  if (!meta) throw ModelFormatError("missing metadata file in " + dir);

  std::map<std::string, std::string> kv;
  std::string key, value;
  while (meta >> key >> value) kv[key] = value;

  auto require = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw ModelFormatError(meta_path.string() + ": missing key '" + k + "'");
    return it->second;
  };

  if (require("format") != "1") throw ModelFormatError("unsupported model format " + kv["format"]);

  OklModel model;
  model.kind = model_kind_from_name(require("kind"));
  model.lambda = std::stod(require("lambda"));
  model.p = static_cast<Index>(std::stoll(require("p")));
  model.jitter = std::stod(require("jitter"));
  model.kernel.variant = kernel_variant_from_name(require("kernel"));
  model.kernel.decay = std::stod(require("decay"));
  model.seed = std::stoull(require("seed"));

  const Index rows = static_cast<Index>(std::stoll(require("rows")));
  const Index tasks = static_cast<Index>(std::stoll(require("tasks")));

  model.factors.A = read_factor((fs::path(dir) / "A.txt").string(), rows, model.p);
  model.factors.B = read_factor((fs::path(dir) / "B.txt").string(), tasks, model.p);
  model.train_inputs = load_inputs((fs::path(dir) / "inputs.txt").string());
  if (static_cast<Index>(model.train_inputs.size()) != rows)
    throw ModelFormatError(dir + ": input count does not match factor rows");
  return model;
}

}  // namespace okl
